"""Built-in agents and the agent interface used by evaluation tooling."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np

from ..env.observations import ObservationVector
from ..physics.world import all_hold_action


class Policy(Protocol):
    def act(self, obs: ObservationVector) -> np.ndarray: ...


@dataclass(frozen=True)
class AgentHandle:
    """A named agent: ``make_policy(episode_seed)`` yields a fresh per-episode
    policy (its own memory, its own rng stream).  Deterministic agents emit
    identical action streams for identical observation streams and seeds."""

    id: str
    make_policy: Callable[[int], Policy]
    deterministic: bool = True
    revision: str = "0"


class _RandomPolicy:
    def __init__(self, agent_seed: int, episode_seed: int):
        self._rng = np.random.default_rng(np.random.SeedSequence((agent_seed, episode_seed)))

    def act(self, obs: ObservationVector) -> np.ndarray:
        return np.concatenate([self._rng.integers(1, 5, 20), self._rng.integers(1, 3, 2)])


def random_agent(seed: int) -> AgentHandle:
    """Uniform draws over every entry's domain each turn; seeded."""
    return AgentHandle(
        id=f"random-{seed}",
        make_policy=lambda episode_seed: _RandomPolicy(seed, episode_seed),
    )


class _HoldPolicy:
    def act(self, obs: ObservationVector) -> np.ndarray:
        return all_hold_action()


def hold_agent() -> AgentHandle:
    """All joints Hold, grips Release, every turn (the immobile dummy)."""
    return AgentHandle(id="hold", make_policy=lambda episode_seed: _HoldPolicy())


class _SequencePolicy:
    """Open-loop: plays a fixed per-turn action table."""

    def __init__(self, sequence: np.ndarray):
        self._seq = sequence
        self._t = 0

    def act(self, obs: ObservationVector) -> np.ndarray:
        t = min(self._t, self._seq.shape[0] - 1)
        self._t += 1
        return self._seq[t]


def sequence_agent(agent_id: str, sequence: np.ndarray, revision: str = "0") -> AgentHandle:
    seq = np.array(sequence, dtype=np.int64)
    return AgentHandle(
        id=agent_id,
        make_policy=lambda episode_seed: _SequencePolicy(seq),
        revision=revision,
    )
