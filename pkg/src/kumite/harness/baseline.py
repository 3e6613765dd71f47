"""Cross-entropy search baseline for the single-agent task.

Open-loop policy: a categorical distribution per (turn, action entry).  Each
iteration samples a population of action tables, plays one seeded episode
per sample, keeps the elite by return, and refits the distributions with
exponential smoothing.  The learner exists to demonstrate that the task is
learnable at desk scale, not to compete with deep RL.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..env.tasks import TaskEnv, task_config
from .agents import AgentHandle, sequence_agent

POPULATION = 32
ELITE = 8
SMOOTHING = 0.25   # weight kept on the previous distribution


@dataclass
class TrainingCurvePoint:
    iteration: int
    episodes_used: int
    mean_return: float
    elite_return: float
    best_return: float


@dataclass
class TrainingResult:
    agent: AgentHandle
    curve: list[TrainingCurvePoint]
    best_return: float
    episodes_used: int


def rollout_return(env: TaskEnv, sequence: np.ndarray, episode_seed: int) -> float:
    env.reset(seed=episode_seed)
    total = 0.0
    terminal = False
    t = 0
    while not terminal:
        a = sequence[min(t, sequence.shape[0] - 1)]
        _, r, terminal, _ = env.step(a)
        total += r
        t += 1
    return total


def evaluate_agent(agent: AgentHandle, task="destroy-uke-v1", episodes: int = 50,
                   seed: int = 0) -> float:
    """Mean episodic return over seeded evaluation episodes."""
    env = TaskEnv(task)
    total = 0.0
    for e in range(episodes):
        ep_seed = int(np.random.SeedSequence((seed, 0xE7A1, e)).generate_state(1)[0])
        policy = agent.make_policy(ep_seed)
        obs = env.reset(seed=ep_seed)
        terminal = False
        while not terminal:
            obs, r, terminal, _ = env.step(policy.act(obs))
            total += r
    return total / episodes


def search_agent_train(
    task="destroy-uke-v1",
    budget: int = 2000,
    seed: int = 0,
) -> TrainingResult:
    """Cross-entropy search within an episode budget; deterministic for a
    given (seed, budget)."""
    cfg = task_config(task)
    if cfg.two_agent:
        raise ValueError("the baseline learner targets the single-agent task")
    if budget < POPULATION:
        raise ValueError(f"budget must cover one population ({POPULATION} episodes), got {budget}")

    turns = cfg.settings.matchframes // cfg.settings.turnframes_schedule[0]
    rng = np.random.default_rng(np.random.SeedSequence((0xCE, seed)))
    # probs[t, k, c]: categorical over modes; grip entries use the first two
    probs = np.full((turns, 22, 4), 0.25)
    probs[:, 20:, :2] = 0.5
    probs[:, 20:, 2:] = 0.0

    env = TaskEnv(cfg)
    iterations = budget // POPULATION
    curve: list[TrainingCurvePoint] = []
    best_return = -np.inf
    best_seq: np.ndarray | None = None
    episodes_used = 0

    for it in range(iterations):
        cum = np.cumsum(probs, axis=2)
        u = rng.random((POPULATION, turns, 22, 1))
        samples = (u < cum[None]).argmax(axis=3) + 1  # categories 1..4 / 1..2
        returns = np.empty(POPULATION)
        for k in range(POPULATION):
            ep_seed = int(np.random.SeedSequence((seed, it, k)).generate_state(1)[0])
            returns[k] = rollout_return(env, samples[k], ep_seed)
            episodes_used += 1
        order = np.argsort(-returns, kind="stable")
        elite = samples[order[:ELITE]]
        if returns[order[0]] > best_return:
            best_return = float(returns[order[0]])
            best_seq = samples[order[0]].copy()
        onehot = np.zeros((ELITE, turns, 22, 4))
        for c in range(4):
            onehot[..., c] = elite == c + 1
        freq = onehot.mean(axis=0)
        probs = (1.0 - SMOOTHING) * freq + SMOOTHING * probs
        # grips have no mass on categories 3/4 by construction; keep it that way
        probs[:, 20:, 2:] = 0.0
        probs[:, 20:, :2] /= probs[:, 20:, :2].sum(axis=2, keepdims=True)
        probs[:, :20, :] /= probs[:, :20, :].sum(axis=2, keepdims=True)
        curve.append(TrainingCurvePoint(
            iteration=it,
            episodes_used=episodes_used,
            mean_return=float(returns.mean()),
            elite_return=float(returns[order[:ELITE]].mean()),
            best_return=best_return,
        ))

    agent = sequence_agent(f"ce-baseline-{seed}", best_seq, revision=str(iterations))
    return TrainingResult(
        agent=agent, curve=curve, best_return=best_return, episodes_used=episodes_used
    )


def save_policy(path, result: TrainingResult) -> None:
    seq = result.agent.make_policy(0)._seq
    np.savez(
        path, sequence=seq, best_return=result.best_return,
        episodes_used=result.episodes_used,
        curve=np.array([
            (p.iteration, p.episodes_used, p.mean_return, p.elite_return, p.best_return)
            for p in result.curve
        ]),
    )


def load_policy_agent(path) -> AgentHandle:
    data = np.load(path)
    name = str(path).rsplit("/", 1)[-1]
    return sequence_agent(f"baseline:{name}", data["sequence"])


def render_curve(curve: list[TrainingCurvePoint]) -> str:
    lines = ["# kumite-table v1 training-curve"]
    lines.append("iteration\tepisodes\tmean_return\telite_return\tbest_return")
    for p in curve:
        lines.append(f"{p.iteration}\t{p.episodes_used}\t{p.mean_return!r}\t{p.elite_return!r}\t{p.best_return!r}")
    return "\n".join(lines) + "\n"
