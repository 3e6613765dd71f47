"""Packaged tasks behind a step/reset interface.

Two presets ship:

* ``destroy-uke-v1``: single-agent, immobile opponent, 1000 frames at 10
  frames per turn, engagement distance uniform in [100, 200], 126-entry
  position observation, injury-delta reward.
* ``aikido-dojo-v1``: two-agent self-play rules, 500-frame limit, turn
  frames rising 10 to 50, dojo and disqualification on, extra observation
  blocks, terminal +-1 reward.

The environment runs either in-process (fast; the default) or against a TCP
server (``address=...``); both produce bit-identical numbers because the
wire encoding round-trips floats exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..match.rules import AIKIDO_SCHEDULE, MatchSettings, new_match, submit_actions
from ..physics.world import all_hold_action, validate_action
from .client import EnvClient
from .observations import (
    GameState,
    ObservationVector,
    game_state_from_match,
    normalize_observation,
)
from .rewards import reward_destroy_uke, reward_win_loss


class TaskError(RuntimeError):
    pass


@dataclass(frozen=True)
class TaskConfig:
    task_id: str
    settings: MatchSettings
    engagement_range: tuple[float, float]   # lo == hi means fixed
    opponent: str                           # "immobile" | "none"
    include_extras: bool
    two_agent: bool


PRESETS: dict[str, TaskConfig] = {
    "destroy-uke-v1": TaskConfig(
        task_id="destroy-uke-v1",
        settings=MatchSettings(
            matchframes=1000, turnframes_schedule=(10,), dojo_radius=0.0,
            dq_enabled=False, dismemberment_enabled=True,
        ),
        engagement_range=(100.0, 200.0),
        opponent="immobile",
        include_extras=False,
        two_agent=False,
    ),
    "aikido-dojo-v1": TaskConfig(
        task_id="aikido-dojo-v1",
        settings=MatchSettings(
            matchframes=500, turnframes_schedule=AIKIDO_SCHEDULE,
            dojo_radius=375.0, dq_enabled=True, dismemberment_enabled=True,
        ),
        engagement_range=(150.0, 150.0),
        opponent="none",
        include_extras=True,
        two_agent=True,
    ),
}


def task_config(task: str | TaskConfig) -> TaskConfig:
    if isinstance(task, TaskConfig):
        return task
    try:
        return PRESETS[task]
    except KeyError:
        raise TaskError(f"unknown task preset {task!r}; have {sorted(PRESETS)}") from None


class _LocalBackend:
    """Drives the match engine directly (identical numbers to the wire)."""

    def __init__(self):
        self._match = None
        self._uke_rng = None
        self._opponent = "none"

    def start(self, settings: MatchSettings, opponent: str) -> GameState:
        self._match = new_match(settings)
        self._opponent = opponent
        return game_state_from_match(self._match)

    def step(self, a1, a2) -> GameState:
        if a2 is None:
            if self._opponent != "immobile":
                raise TaskError("opponent action required (no builtin opponent)")
            a2 = all_hold_action()
        self._match, _ = submit_actions(self._match, a1, a2)
        return game_state_from_match(self._match)

    def close(self) -> None:
        self._match = None


class _RemoteBackend:
    def __init__(self, host: str, port: int | None):
        self._client = EnvClient(host, port).connect()

    def start(self, settings: MatchSettings, opponent: str) -> GameState:
        wire = {
            "matchframes": str(settings.matchframes),
            "turnframes": ",".join(str(t) for t in settings.turnframes_schedule),
            "engagement_distance": repr(settings.engagement_distance),
            "dojo_radius": repr(settings.dojo_radius),
            "dq": str(int(settings.dq_enabled)),
            "dismemberment": str(int(settings.dismemberment_enabled)),
            "seed": str(settings.seed),
        }
        if opponent != "none":
            wire["opponent"] = opponent
        state = self._client.new_game(wire)
        self._client.get_state()
        return state

    def step(self, a1, a2) -> GameState:
        self._client.make_actions(a1, a2)
        state, _ = self._client.get_state()
        return state

    def close(self) -> None:
        self._client.close()


class TaskEnv:
    """Gym-style reset/step loop over a packaged task."""

    def __init__(self, task: str | TaskConfig = "destroy-uke-v1", *,
                 address: tuple[str, int | None] | None = None, seed: int = 0):
        self.config = task_config(task)
        self._backend = (
            _RemoteBackend(*address) if address is not None else _LocalBackend()
        )
        self._episode_rng = np.random.default_rng(np.random.SeedSequence((0xE9, seed)))
        self._gs: GameState | None = None
        self._prev: GameState | None = None
        self._started = False

    # --- helpers ---------------------------------------------------------------
    def _observe(self, gs: GameState, viewpoint: int) -> ObservationVector:
        return normalize_observation(
            gs, viewpoint,
            include_extras=self.config.include_extras,
            matchframes=self.config.settings.matchframes,
        )

    def _obs_out(self, gs: GameState):
        if self.config.two_agent:
            return self._observe(gs, 0), self._observe(gs, 1)
        return self._observe(gs, 0)

    # --- api ---------------------------------------------------------------------
    def reset(self, seed: int | None = None):
        if seed is None:
            seed = int(self._episode_rng.integers(0, 2**31 - 1))
        rng = np.random.default_rng(np.random.SeedSequence((0x5EED, seed)))
        lo, hi = self.config.engagement_range
        engagement = float(lo if lo == hi else rng.uniform(lo, hi))
        settings = replace(
            self.config.settings, engagement_distance=engagement, seed=int(seed)
        )
        self._gs = self._backend.start(settings, self.config.opponent)
        self._prev = self._gs
        self._started = True
        return self._obs_out(self._gs)

    def step(self, action, action2=None):
        if not self._started:
            raise TaskError("step before reset")
        if self._gs is not None and self._gs.terminal:
            raise TaskError("step on a terminal episode; call reset")
        if self.config.two_agent:
            if action2 is None:
                if isinstance(action, tuple) and len(action) == 2:
                    action, action2 = action
                else:
                    raise TaskError("two-agent task needs both actions")
            a1 = validate_action(action)
            a2 = validate_action(action2)
        else:
            if action2 is not None:
                raise TaskError("single-agent task takes one action")
            a1 = validate_action(action)
            a2 = None
        self._prev = self._gs
        self._gs = self._backend.step(a1, a2)
        gs = self._gs
        info = {
            "frames_played": gs.frames_played,
            "injuries": (gs.players[0].injury, gs.players[1].injury),
            "winner": gs.winner,
        }
        if self.config.two_agent:
            rewards = (reward_win_loss(gs, 0), reward_win_loss(gs, 1))
            return self._obs_out(gs), rewards, gs.terminal, info
        reward = reward_destroy_uke(self._prev, gs)
        return self._obs_out(gs), reward, gs.terminal, info

    def close(self) -> None:
        self._backend.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc) -> None:
        self.close()
