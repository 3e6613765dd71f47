"""Controller-side state shaping: wire State -> GameState -> normalized,
clipped observation vectors."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..match.rules import MatchState, Winner
from ..physics.bodydef import GROIN_PART_ID, JOINT_LR_SWAP, N_PARTS, PART_LR_SWAP
from ..proto import messages as msg

OBS_SCALE = 10.0   # world units per observation unit
OBS_CLIP = 30.0
TURNFRAMES_NORM = 50.0


@dataclass
class PlayerState:
    positions: np.ndarray       # (21,3)
    velocities: np.ndarray      # (21,3)
    groin_rotation: np.ndarray  # (3,3), row-major wire order
    joint_modes: np.ndarray     # (20,)
    grips: np.ndarray           # (2,)
    injury: float


@dataclass
class GameState:
    players: tuple[PlayerState, PlayerState]
    terminal: bool
    winner: int                 # 0 none, 1 player1, 2 player2, 3 draw
    frames_played: int
    next_turnframes: int


def game_state_from_message(m: msg.State) -> GameState:
    players = tuple(
        PlayerState(
            positions=np.array(b.positions).reshape(21, 3),
            velocities=np.array(b.velocities).reshape(21, 3),
            groin_rotation=np.array(b.groin_rotation).reshape(3, 3),
            joint_modes=np.array(b.joint_modes, dtype=np.int64),
            grips=np.array(b.grips, dtype=np.int64),
            injury=b.injury,
        )
        for b in m.players
    )
    return GameState(players, m.terminal, m.winner, m.frames_played, m.next_turnframes)


def game_state_from_match(match: MatchState) -> GameState:
    """Local shortcut producing the exact numbers the wire would carry."""
    w = match.world
    players = []
    for p in range(2):
        lo = p * N_PARTS
        players.append(PlayerState(
            positions=w.pos[lo:lo + N_PARTS].copy(),
            velocities=w.vel[lo:lo + N_PARTS].copy(),
            groin_rotation=w.rot[lo + GROIN_PART_ID].copy(),
            joint_modes=w.jmode[p * 20:(p + 1) * 20].copy(),
            grips=w.gmode[2 * p:2 * p + 2].copy(),
            injury=float(w.injury[p]),
        ))
    winner = 0
    if match.terminal and match.outcome is not None:
        winner = {Winner.PLAYER1: 1, Winner.PLAYER2: 2, Winner.DRAW: 3}[match.outcome.winner]
    return GameState(tuple(players), match.terminal, winner,
                     match.frames_played, match.current_turnframes)


@dataclass
class ObservationVector:
    """Normalized feature blocks; every entry lies in [-OBS_CLIP, OBS_CLIP]."""

    relative_positions: np.ndarray   # (126,) viewpoint parts then opponent parts
    extras: np.ndarray | None = None  # (4,): own/opp dojo distance, frames left, turnframes

    def concat(self) -> np.ndarray:
        if self.extras is None:
            return self.relative_positions
        return np.concatenate([self.relative_positions, self.extras])


def normalize_observation(
    gs: GameState,
    viewpoint: int,
    *,
    include_extras: bool = False,
    arena_center: tuple[float, float] = (0.0, 0.0),
    matchframes: int = 1000,
) -> ObservationVector:
    """Center on the viewpoint groin, rotate into its frame, substitute the
    groin's absolute height, scale by OBS_SCALE, clip to +-OBS_CLIP."""
    own = gs.players[viewpoint]
    opp = gs.players[1 - viewpoint]
    g = own.positions[GROIN_PART_ID]
    rot = own.groin_rotation
    rel = np.empty((2 * N_PARTS, 3))
    rel[:N_PARTS] = (own.positions - g) @ rot     # equals (R^T (p-g))^T row-wise
    rel[N_PARTS:] = (opp.positions - g) @ rot
    rel[GROIN_PART_ID, 2] = g[2]                  # absolute height, pre-scale
    rel /= OBS_SCALE
    np.clip(rel, -OBS_CLIP, OBS_CLIP, out=rel)

    extras = None
    if include_extras:
        cx, cy = arena_center
        go = own.positions[GROIN_PART_ID]
        gq = opp.positions[GROIN_PART_ID]
        own_d = math.hypot(go[0] - cx, go[1] - cy) / OBS_SCALE
        opp_d = math.hypot(gq[0] - cx, gq[1] - cy) / OBS_SCALE
        frames_left = (matchframes - gs.frames_played) / matchframes
        ntf = gs.next_turnframes / TURNFRAMES_NORM
        extras = np.clip(np.array([own_d, opp_d, frames_left, ntf]), -OBS_CLIP, OBS_CLIP)
    return ObservationVector(relative_positions=rel.reshape(-1), extras=extras)


_LR_BOTH = np.concatenate([PART_LR_SWAP, PART_LR_SWAP + N_PARTS])


def mirror_observation(obs: ObservationVector) -> ObservationVector:
    """The observation image of the world mirror: left/right part slots swap
    and the lateral (y) coordinate flips sign.  Extras are invariant."""
    rel = obs.relative_positions.reshape(2 * N_PARTS, 3)[_LR_BOTH].copy()
    rel[:, 1] = -rel[:, 1]
    return ObservationVector(
        relative_positions=rel.reshape(-1),
        extras=None if obs.extras is None else obs.extras.copy(),
    )


_ROT_SIGNS = np.array(
    [[-1.0, 1.0, -1.0],
     [1.0, -1.0, 1.0],
     [1.0, -1.0, 1.0]]
)


def mirror_game_state(gs: GameState, center_x: float = 0.0) -> GameState:
    """Client-side image of the world mirror (players and left/right slots
    swapped, reflected across the arena center plane).  Diagnostic helper."""
    out = []
    for p in (1, 0):
        src = gs.players[p]
        pos = src.positions[PART_LR_SWAP].copy()
        pos[:, 0] = 2.0 * center_x - pos[:, 0] if center_x != 0.0 else -pos[:, 0]
        vel = src.velocities[PART_LR_SWAP].copy()
        vel[:, 0] = -vel[:, 0]
        out.append(PlayerState(
            positions=pos,
            velocities=vel,
            groin_rotation=src.groin_rotation * _ROT_SIGNS,
            joint_modes=src.joint_modes[JOINT_LR_SWAP].copy(),
            grips=src.grips[::-1].copy(),
            injury=src.injury,
        ))
    winner = {0: 0, 1: 2, 2: 1, 3: 3}[gs.winner]
    return GameState(tuple(out), gs.terminal, winner, gs.frames_played, gs.next_turnframes)
