"""Step/reset task wrapper over the raw protocol client.

Preset ids match the server package: "destroy-uke-v1" and "aikido-dojo-v1";
the engagement-distance sampling and observation constants are the same, so
both clients produce identical episodes for identical seeds.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .client import ControlClient, GameState, OrderError, normalize_observation


@dataclass(frozen=True)
class Preset:
    task_id: str
    settings: dict
    engagement_range: tuple[float, float]
    opponent: str
    include_extras: bool
    two_agent: bool


PRESETS = {
    "destroy-uke-v1": Preset(
        task_id="destroy-uke-v1",
        settings={"matchframes": 1000, "turnframes": "10", "dojo_radius": 0.0,
                  "dq": 0, "dismemberment": 1},
        engagement_range=(100.0, 200.0),
        opponent="immobile",
        include_extras=False,
        two_agent=False,
    ),
    "aikido-dojo-v1": Preset(
        task_id="aikido-dojo-v1",
        settings={"matchframes": 500, "turnframes": "10,15,20,25,30,35,40,45,50",
                  "dojo_radius": 375.0, "dq": 1, "dismemberment": 1},
        engagement_range=(150.0, 150.0),
        opponent="none",
        include_extras=True,
        two_agent=True,
    ),
}

INJURY_REWARD_NORM = 5000.0


class TaskSession:
    """Gym-style loop: reset(seed) -> observation; step(action) ->
    (observation, reward, terminal, info)."""

    def __init__(self, task: str = "destroy-uke-v1", host: str = "127.0.0.1",
                 port: int = 4747, seed: int = 0):
        if task not in PRESETS:
            raise ValueError(f"unknown task {task!r}; have {sorted(PRESETS)}")
        self.preset = PRESETS[task]
        self._client = ControlClient(host, port).connect()
        self._episode_rng = np.random.default_rng(np.random.SeedSequence((0xE9, seed)))
        self._gs: GameState | None = None
        self._prev: GameState | None = None

    def _obs(self, gs: GameState, viewpoint: int):
        return normalize_observation(
            gs, viewpoint,
            include_extras=self.preset.include_extras,
            matchframes=int(self.preset.settings["matchframes"]),
        )

    def _obs_out(self, gs: GameState):
        if self.preset.two_agent:
            return self._obs(gs, 0), self._obs(gs, 1)
        return self._obs(gs, 0)

    def reset(self, seed: int | None = None):
        if seed is None:
            seed = int(self._episode_rng.integers(0, 2**31 - 1))
        rng = np.random.default_rng(np.random.SeedSequence((0x5EED, seed)))
        lo, hi = self.preset.engagement_range
        engagement = float(lo if lo == hi else rng.uniform(lo, hi))
        wire = dict(self.preset.settings)
        wire["engagement_distance"] = engagement
        wire["seed"] = int(seed)
        if self.preset.opponent != "none":
            wire["opponent"] = self.preset.opponent
        if self._gs is None:
            self._gs = self._client.new_game(wire)
        else:
            try:
                self._gs = self._client.reset(wire)
            except OrderError:
                self._gs = self._client.new_game(wire)
        self._client.get_state()
        self._prev = self._gs
        return self._obs_out(self._gs)

    def step(self, action, action2=None):
        if self._gs is None:
            raise OrderError("step before reset")
        if self._gs.terminal:
            raise OrderError("episode is over; call reset")
        if self.preset.two_agent and action2 is None:
            raise OrderError("two-agent task needs both actions")
        self._prev = self._gs
        self._client.make_actions(action, action2)
        self._gs, _ = self._client.get_state()
        gs = self._gs
        info = {
            "frames_played": gs.frames_played,
            "injuries": (gs.players[0].injury, gs.players[1].injury),
            "winner": gs.winner,
        }
        if self.preset.two_agent:
            rewards = (self._win_loss(gs, 0), self._win_loss(gs, 1))
            return self._obs_out(gs), rewards, gs.terminal, info
        du = gs.players[1].injury - self._prev.players[1].injury
        dp = gs.players[0].injury - self._prev.players[0].injury
        return self._obs_out(gs), (du - dp) / INJURY_REWARD_NORM, gs.terminal, info

    @staticmethod
    def _win_loss(gs: GameState, viewpoint: int) -> float:
        if not gs.terminal or gs.winner in (0, 3):
            return 0.0
        return 1.0 if gs.winner - 1 == viewpoint else -1.0

    def close(self) -> None:
        self._client.close()
