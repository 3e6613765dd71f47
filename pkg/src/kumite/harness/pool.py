"""Self-play opponent scheduling: random / past models / current self."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .agents import AgentHandle, random_agent


@dataclass
class OpponentPoolConfig:
    random_agent: AgentHandle
    self_agent: AgentHandle
    past_pool: tuple[AgentHandle, ...] = ()
    p_random: float = 0.20
    p_past: float = 0.20
    p_self: float = 0.60
    swap_probability_per_game: float = 0.01

    def __post_init__(self):
        total = self.p_random + self.p_past + self.p_self
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"category probabilities must sum to 1, got {total}")


def select_opponent(
    cfg: OpponentPoolConfig,
    rng: np.random.Generator,
    previous: AgentHandle | None = None,
) -> AgentHandle:
    """Keep the previous opponent with probability 1 - swap; otherwise draw
    the category (random/past/self) and a uniform member.  An empty past pool
    redistributes its mass proportionally over random and self."""
    if previous is not None and rng.random() >= cfg.swap_probability_per_game:
        return previous
    p_random, p_past, p_self = cfg.p_random, cfg.p_past, cfg.p_self
    if not cfg.past_pool:
        rest = p_random + p_self
        p_random += p_past * (p_random / rest)
        p_self += p_past * (p_self / rest)
        p_past = 0.0
    u = rng.random()
    if u < p_random:
        return cfg.random_agent
    if u < p_random + p_past:
        return cfg.past_pool[int(rng.integers(0, len(cfg.past_pool)))]
    return cfg.self_agent


def simulate_schedule(
    cfg: OpponentPoolConfig, games: int, seed: int
) -> dict[str, float]:
    """Measure the selection statistics over ``games`` draws.

    Frequencies come from fresh draws (no previous opponent).  The swap rate
    is measured against a sentinel previous agent, because a redraw can land
    on the same opponent (self is 60% likely) and would otherwise be
    invisible."""
    rng = np.random.default_rng(seed)
    counts = {"random": 0, "past": 0, "self": 0}
    past_ids = {a.id for a in cfg.past_pool}
    for _ in range(games):
        chosen = select_opponent(cfg, rng, None)
        if chosen.id == cfg.random_agent.id:
            counts["random"] += 1
        elif chosen.id in past_ids:
            counts["past"] += 1
        else:
            counts["self"] += 1
    sentinel = AgentHandle(id="__sentinel__", make_policy=lambda s: None)
    swaps = 0
    for _ in range(games):
        if select_opponent(cfg, rng, sentinel) is not sentinel:
            swaps += 1
    return {
        "games": games,
        "freq_random": counts["random"] / games,
        "freq_past": counts["past"] / games,
        "freq_self": counts["self"] / games,
        "swap_rate": swaps / games,
    }
