"""Cross-play evaluation: pairwise win-rate matrix with explicit role
assignment and the antisymmetry diagnostic."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..env.tasks import TaskEnv, task_config
from .agents import AgentHandle

SCORE_WIN = 1.0
SCORE_DRAW = 0.5
SCORE_LOSS = 0.0


@dataclass
class CrossPlayMatrix:
    agents: tuple[str, ...]
    entries: np.ndarray        # entries[i][j]: mean score of i as Player 1 vs j as Player 2
    episodes_per_cell: int
    task_id: str


@dataclass
class AntisymmetryReport:
    pair_deviation: np.ndarray   # |e[i][j] + e[j][i] - 1|, zero diagonal
    mean_deviation: float
    max_deviation: float
    worst: list[tuple[int, int, float]]
    self_bias: np.ndarray        # |e[i][i] - 0.5|


def play_episode(
    agent_p1: AgentHandle, agent_p2: AgentHandle, task, episode_seed: int
) -> float:
    """One seeded episode; returns Player 1's score (win 1, draw 0.5, loss 0)."""
    cfg = task_config(task)
    if not cfg.two_agent:
        raise ValueError("cross-play needs a two-agent task")
    env = TaskEnv(cfg)
    obs0, obs1 = env.reset(seed=episode_seed)
    p1 = agent_p1.make_policy(episode_seed)
    p2 = agent_p2.make_policy(episode_seed)
    terminal = False
    info = None
    while not terminal:
        (obs0, obs1), rewards, terminal, info = env.step(p1.act(obs0), p2.act(obs1))
    winner = info["winner"]
    if winner == 1:
        return SCORE_WIN
    if winner == 2:
        return SCORE_LOSS
    return SCORE_DRAW


def _episode_seed(seed: int, i: int, j: int, e: int) -> int:
    return int(np.random.SeedSequence((seed, i, j, e)).generate_state(1)[0])


def crossplay_evaluate(
    pool: list[AgentHandle],
    episodes_per_cell: int,
    task="aikido-dojo-v1",
    seed: int = 0,
    workers: int = 1,
) -> CrossPlayMatrix:
    """Every ordered pair (i, j), diagonal included, plays E seeded episodes
    with i as Player 1.  Episodes are independent, so workers just collect."""
    if not pool:
        raise ValueError("agent pool is empty")
    if episodes_per_cell < 1:
        raise ValueError("episodes_per_cell must be >= 1")
    n = len(pool)
    cfg = task_config(task)
    jobs = [
        (i, j, e, _episode_seed(seed, i, j, e))
        for i in range(n) for j in range(n) for e in range(episodes_per_cell)
    ]
    scores = np.zeros((n, n))
    if workers > 1:
        def run(job):
            i, j, e, s = job
            return i, j, play_episode(pool[i], pool[j], cfg, s)

        with ThreadPoolExecutor(max_workers=workers) as ex:
            for i, j, sc in ex.map(run, jobs):
                scores[i, j] += sc
    else:
        for i, j, e, s in jobs:
            scores[i, j] += play_episode(pool[i], pool[j], cfg, s)
    return CrossPlayMatrix(
        agents=tuple(a.id for a in pool),
        entries=scores / episodes_per_cell,
        episodes_per_cell=episodes_per_cell,
        task_id=cfg.task_id,
    )


def antisymmetry_report(m: CrossPlayMatrix) -> AntisymmetryReport:
    """Fairness diagnostic: entries[i][j] + entries[j][i] should equal 1; the
    diagonal should sit at 0.5 (a fair mirror must not favor Player 1)."""
    e = m.entries
    n = e.shape[0]
    dev = np.abs(e + e.T - 1.0)
    np.fill_diagonal(dev, 0.0)
    pairs = [(i, j, float(dev[i, j])) for i in range(n) for j in range(i + 1, n)]
    pairs.sort(key=lambda t: -t[2])
    offdiag = [p[2] for p in pairs]
    return AntisymmetryReport(
        pair_deviation=dev,
        mean_deviation=float(np.mean(offdiag)) if offdiag else 0.0,
        max_deviation=float(np.max(offdiag)) if offdiag else 0.0,
        worst=pairs[: min(5, len(pairs))],
        self_bias=np.abs(np.diagonal(e) - 0.5),
    )


def render_matrix(m: CrossPlayMatrix) -> str:
    """Versioned tabular text form (deterministic, diff-friendly)."""
    lines = [f"# kumite-table v1 crossplay task={m.task_id} episodes_per_cell={m.episodes_per_cell}"]
    lines.append("p1\\p2\t" + "\t".join(m.agents))
    for i, name in enumerate(m.agents):
        row = "\t".join(repr(float(x)) for x in m.entries[i])
        lines.append(f"{name}\t{row}")
    return "\n".join(lines) + "\n"


def render_report(r: AntisymmetryReport, agents: tuple[str, ...]) -> str:
    lines = ["# kumite-table v1 antisymmetry"]
    lines.append(f"mean_deviation\t{r.mean_deviation!r}")
    lines.append(f"max_deviation\t{r.max_deviation!r}")
    for i, j, d in r.worst:
        lines.append(f"pair\t{agents[i]}\t{agents[j]}\t{d!r}")
    for i, name in enumerate(agents):
        lines.append(f"self_bias\t{name}\t{float(r.self_bias[i])!r}")
    return "\n".join(lines) + "\n"
