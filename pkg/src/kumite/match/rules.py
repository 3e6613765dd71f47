"""Match rules: configuration, the turn loop, disqualification, outcomes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from ..physics import bodydef
from ..physics.bodydef import FOOT_PART_IDS, HAND_PART_IDS, N_PARTS
from ..physics.engine import FrameEvents, step_frame
from ..physics.world import (
    SimulationFault,
    WorldState,
    make_world,
    set_joint_modes,
    validate_action,
)

SAFE_GROUND_PARTS = frozenset(HAND_PART_IDS) | frozenset(FOOT_PART_IDS)


class MatchSettingsError(ValueError):
    """Invalid match settings; the message names the offending field."""


class MatchTerminalError(RuntimeError):
    """Acting on a match that already ended."""


class Winner(Enum):
    PLAYER1 = 1
    PLAYER2 = 2
    DRAW = 3


class Reason(Enum):
    SCORE = "score"
    DISQUALIFICATION = "disqualification"
    TIMEOUT_DRAW = "timeout-draw"


def aikido_turnframes(turn_index: int) -> int:
    """Frames per turn rising from 10 to 50 over the match."""
    return min(10 + 5 * turn_index, 50)


AIKIDO_SCHEDULE = tuple(aikido_turnframes(i) for i in range(9))


@dataclass(frozen=True)
class MatchSettings:
    matchframes: int = 1000
    turnframes_schedule: tuple[int, ...] = (10,)
    engagement_distance: float = 150.0
    dojo_radius: float = 0.0          # 0 disables the dojo rule
    dq_enabled: bool = False
    dismemberment_enabled: bool = True
    gravity: tuple[float, float, float] = bodydef.GRAVITY_DEFAULT
    seed: int = 0
    replay_name: str | None = None

    def validate(self) -> "MatchSettings":
        if self.matchframes < 1:
            raise MatchSettingsError(f"matchframes must be >= 1, got {self.matchframes}")
        if not self.turnframes_schedule:
            raise MatchSettingsError("turnframes_schedule must not be empty")
        for i, tf in enumerate(self.turnframes_schedule):
            if tf < 1:
                raise MatchSettingsError(f"turnframes_schedule[{i}] must be >= 1, got {tf}")
        if not (self.engagement_distance > 0):
            raise MatchSettingsError(
                f"engagement_distance must be > 0, got {self.engagement_distance}"
            )
        if self.dojo_radius < 0:
            raise MatchSettingsError(f"dojo_radius must be >= 0, got {self.dojo_radius}")
        if len(self.gravity) != 3:
            raise MatchSettingsError("gravity must be a 3-vector")
        return self

    def turnframes_for(self, turn_index: int) -> int:
        sched = self.turnframes_schedule
        return sched[min(turn_index, len(sched) - 1)]


@dataclass
class DqDetail:
    player: int
    part_id: int
    inside_dojo: bool


@dataclass
class Outcome:
    winner: Winner
    reason: Reason
    final_injuries: tuple[float, float]
    dq_detail: DqDetail | None = None


@dataclass
class FrameRecord:
    frame_index: int
    pos: np.ndarray
    vel: np.ndarray
    rot: np.ndarray
    modes: np.ndarray          # (2,22) joint modes + grips per player
    injuries: tuple[float, float]
    events: FrameEvents


@dataclass
class TurnReport:
    frames_advanced: int
    injury_deltas: tuple[float, float]
    events: list[FrameEvents]
    terminal: bool
    outcome: Outcome | None


@dataclass
class MatchState:
    world: WorldState
    settings: MatchSettings
    frames_played: int = 0
    turn_index: int = 0
    current_turnframes: int = 10
    terminal: bool = False
    outcome: Outcome | None = None
    turn_log: list[tuple[int, np.ndarray, np.ndarray]] = field(default_factory=list)
    recording: bool = False
    frame_records: list[FrameRecord] = field(default_factory=list)


def new_match(settings: MatchSettings, record: bool | None = None) -> MatchState:
    settings.validate()
    world = make_world(
        settings.engagement_distance,
        seed=settings.seed,
        gravity=settings.gravity,
        dismemberment_enabled=settings.dismemberment_enabled,
    )
    if record is None:
        record = settings.replay_name is not None
    return MatchState(
        world=world,
        settings=settings,
        current_turnframes=settings.turnframes_for(0),
        recording=record,
    )


def _modes_snapshot(world: WorldState) -> np.ndarray:
    out = np.empty((2, 22), dtype=np.int64)
    for p in range(2):
        out[p, :20] = world.jmode[p * 20:(p + 1) * 20]
        out[p, 20:] = world.gmode[2 * p:2 * p + 2]
    return out


def check_disqualification(
    world: WorldState, settings: MatchSettings, events: FrameEvents
) -> tuple[int, DqDetail] | None:
    """First offending player this frame, ties broken by (player, part id).

    Ground contact disqualifies when the part is severed, when the part lies
    outside the dojo circle (any part, measured at the part's own horizontal
    position), or when a non-hand/foot part touches inside the dojo (or the
    dojo rule is disabled).
    """
    offenders: list[tuple[int, int, bool]] = []
    cx = world.arena_center_x
    for player, part in events.ground_touches:
        gid = player * N_PARTS + part
        severed = not world.attached[gid]
        inside = True
        if settings.dojo_radius > 0:
            px, py = world.pos[gid, 0], world.pos[gid, 1]
            inside = math.hypot(px - cx, py) <= settings.dojo_radius
        if severed or not inside or part not in SAFE_GROUND_PARTS:
            offenders.append((player, part, inside))
    if not offenders:
        return None
    offenders.sort(key=lambda o: (o[0], o[1]))
    player, part, inside = offenders[0]
    return player, DqDetail(player=player, part_id=part, inside_dojo=inside)


def _score_outcome(injuries: tuple[float, float]) -> Outcome:
    if injuries[0] == injuries[1]:
        return Outcome(Winner.DRAW, Reason.TIMEOUT_DRAW, injuries)
    winner = Winner.PLAYER1 if injuries[0] < injuries[1] else Winner.PLAYER2
    return Outcome(winner, Reason.SCORE, injuries)


def submit_actions(match: MatchState, a1, a2) -> tuple[MatchState, TurnReport]:
    """Run one turn: set both players' modes, advance the scheduled frames
    (clamped at matchframes), checking disqualification after every frame."""
    if match.terminal:
        raise MatchTerminalError("match already ended")
    a1 = validate_action(a1)
    a2 = validate_action(a2)
    world = match.world
    set_joint_modes(world, 0, a1)
    set_joint_modes(world, 1, a2)
    match.turn_log.append((match.frames_played, a1.copy(), a2.copy()))

    frames = min(match.current_turnframes, match.settings.matchframes - match.frames_played)
    advanced = 0
    d0 = 0.0
    d1 = 0.0
    events: list[FrameEvents] = []
    for _ in range(frames):
        world, ev = step_frame(world)
        if world.fault:
            raise SimulationFault(
                f"non-finite state at frame {world.frame_index}; world frozen"
            )
        advanced += 1
        match.frames_played += 1
        d0 += ev.injury_deltas[0]
        d1 += ev.injury_deltas[1]
        events.append(ev)
        if match.recording:
            match.frame_records.append(FrameRecord(
                frame_index=world.frame_index,
                pos=world.pos.copy(), vel=world.vel.copy(), rot=world.rot.copy(),
                modes=_modes_snapshot(world),
                injuries=(float(world.injury[0]), float(world.injury[1])),
                events=ev,
            ))
        if match.settings.dq_enabled:
            dq = check_disqualification(world, match.settings, ev)
            if dq is not None:
                player, detail = dq
                winner = Winner.PLAYER2 if player == 0 else Winner.PLAYER1
                match.terminal = True
                match.outcome = Outcome(
                    winner, Reason.DISQUALIFICATION,
                    (float(world.injury[0]), float(world.injury[1])),
                    dq_detail=detail,
                )
                break

    if not match.terminal and match.frames_played >= match.settings.matchframes:
        match.terminal = True
        match.outcome = _score_outcome((float(world.injury[0]), float(world.injury[1])))

    match.turn_index += 1
    match.current_turnframes = match.settings.turnframes_for(match.turn_index)
    return match, TurnReport(
        frames_advanced=advanced,
        injury_deltas=(d0, d1),
        events=events,
        terminal=match.terminal,
        outcome=match.outcome,
    )


def reset_match(match: MatchState, settings: MatchSettings | None = None) -> MatchState:
    """Fresh match, optionally with new settings."""
    return new_match(settings if settings is not None else match.settings)
