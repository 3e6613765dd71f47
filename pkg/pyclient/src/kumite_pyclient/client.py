"""Thin, dependency-light client for the combat-environment TCP protocol.

Pure sockets, no native extensions, no imports from the server package.
Wire behavior is byte-identical to the reference client: sorted NEWGAME
keys, shortest-round-trip floats, one ACT per controlled player plus STEP
per turn.  See the server repo's docs/protocol.md for the grammar.
"""
from __future__ import annotations

import math
import socket
from dataclasses import dataclass

import numpy as np

PROTOCOL_VERSION = 1
N_PARTS = 21
GROIN = 4
PLAYER_BLOCK_FIELDS = 63 + 63 + 9 + 20 + 2 + 1
STATE_FIELDS = 3 + 2 * PLAYER_BLOCK_FIELDS + 1

OBS_SCALE = 10.0
OBS_CLIP = 30.0
TURNFRAMES_NORM = 50.0


class ClientError(RuntimeError):
    pass


class WireError(ClientError):
    """Malformed line from the server."""


class OrderError(ClientError):
    """API call out of lockstep order."""


class ServerError(ClientError):
    def __init__(self, code: str, text: str):
        super().__init__(f"server error [{code}]: {text}")
        self.code = code
        self.text = text


@dataclass
class PlayerState:
    positions: np.ndarray       # (21,3)
    velocities: np.ndarray      # (21,3)
    groin_rotation: np.ndarray  # (3,3)
    joint_modes: np.ndarray     # (20,)
    grips: np.ndarray           # (2,)
    injury: float


@dataclass
class GameState:
    players: tuple[PlayerState, PlayerState]
    terminal: bool
    winner: int
    frames_played: int
    next_turnframes: int


def _parse_block(fields: list[str], base: int) -> PlayerState:
    i = base
    pos = np.array([float(x) for x in fields[i:i + 63]]).reshape(21, 3)
    i += 63
    vel = np.array([float(x) for x in fields[i:i + 63]]).reshape(21, 3)
    i += 63
    rot = np.array([float(x) for x in fields[i:i + 9]]).reshape(3, 3)
    i += 9
    modes = np.array([int(x) for x in fields[i:i + 20]], dtype=np.int64)
    i += 20
    grips = np.array([int(x) for x in fields[i:i + 2]], dtype=np.int64)
    i += 2
    injury = float(fields[i])
    return PlayerState(pos, vel, rot, modes, grips, injury)


def parse_state_line(line: str) -> GameState:
    fields = line.rstrip("\n").split(" ")
    if fields[0] != "STATE":
        raise WireError(f"expected STATE, got {fields[0]!r}")
    if len(fields) - 1 != STATE_FIELDS:
        raise WireError(f"STATE needs {STATE_FIELDS} fields, got {len(fields) - 1}")
    return GameState(
        players=(
            _parse_block(fields, 4),
            _parse_block(fields, 4 + PLAYER_BLOCK_FIELDS),
        ),
        terminal=fields[1] == "1",
        winner=int(fields[4 + 2 * PLAYER_BLOCK_FIELDS]),
        frames_played=int(fields[2]),
        next_turnframes=int(fields[3]),
    )


def parse_frame_line(line: str) -> tuple[int, GameState]:
    fields = line.rstrip("\n").split(" ")
    if fields[0] != "FRAME":
        raise WireError(f"expected FRAME, got {fields[0]!r}")
    expected = 1 + 2 * PLAYER_BLOCK_FIELDS
    if len(fields) - 1 != expected:
        raise WireError(f"FRAME needs {expected} fields, got {len(fields) - 1}")
    gs = GameState(
        players=(
            _parse_block(fields, 2),
            _parse_block(fields, 2 + PLAYER_BLOCK_FIELDS),
        ),
        terminal=False, winner=0, frames_played=int(fields[1]), next_turnframes=0,
    )
    return int(fields[1]), gs


def format_action(entries) -> str:
    arr = [int(x) for x in entries]
    if len(arr) != 22:
        raise ValueError(f"action needs 22 entries, got {len(arr)}")
    for i, e in enumerate(arr):
        hi = 4 if i < 20 else 2
        if not 1 <= e <= hi:
            raise ValueError(f"entry {i} out of range 1..{hi}: {e}")
    return " ".join(str(e) for e in arr)


def normalize_observation(gs: GameState, viewpoint: int, *,
                          include_extras: bool = False,
                          arena_center: tuple[float, float] = (0.0, 0.0),
                          matchframes: int = 1000):
    """Identical formulas and constants to the reference client: center on
    the viewpoint groin, rotate by its orientation transpose, substitute the
    groin's absolute height, divide by 10, clip to [-30, 30]."""
    own = gs.players[viewpoint]
    opp = gs.players[1 - viewpoint]
    g = own.positions[GROIN]
    rot = own.groin_rotation
    rel = np.empty((2 * N_PARTS, 3))
    rel[:N_PARTS] = (own.positions - g) @ rot
    rel[N_PARTS:] = (opp.positions - g) @ rot
    rel[GROIN, 2] = g[2]
    rel /= OBS_SCALE
    np.clip(rel, -OBS_CLIP, OBS_CLIP, out=rel)
    flat = rel.reshape(-1)
    if not include_extras:
        return flat
    cx, cy = arena_center
    own_d = math.hypot(g[0] - cx, g[1] - cy) / OBS_SCALE
    oq = opp.positions[GROIN]
    opp_d = math.hypot(oq[0] - cx, oq[1] - cy) / OBS_SCALE
    extras = np.clip(
        np.array([own_d, opp_d,
                  (matchframes - gs.frames_played) / matchframes,
                  gs.next_turnframes / TURNFRAMES_NORM]),
        -OBS_CLIP, OBS_CLIP,
    )
    return np.concatenate([flat, extras])


class ControlClient:
    """Direct protocol API: init / get_state / make_actions / close."""

    def __init__(self, host: str = "127.0.0.1", port: int = 4747, timeout: float = 60.0):
        self.host = host
        self.port = port
        self.timeout = timeout
        self._sock = None
        self._rf = None
        self._phase = "closed"
        self._state: GameState | None = None

    def init(self, settings: dict | None = None) -> "ControlClient":
        """Connect, handshake, and start a match with the given settings."""
        self.connect()
        self.new_game(settings or {})
        return self

    def connect(self) -> "ControlClient":
        if self._sock is not None:
            raise OrderError("already connected")
        try:
            self._sock = socket.create_connection((self.host, self.port), timeout=self.timeout)
        except OSError as exc:
            raise ClientError(f"cannot connect to {self.host}:{self.port}: {exc}") from exc
        self._rf = self._sock.makefile("rb")
        self._send_line(f"HELLO {PROTOCOL_VERSION}")
        reply = self._read_line()
        if reply != "OK":
            raise ClientError(f"handshake failed: {reply!r}")
        self._phase = "idle"
        return self

    def close(self) -> None:
        """Idempotent."""
        if self._sock is None:
            return
        try:
            self._send_line("QUIT")
        except OSError:
            pass
        try:
            self._sock.close()
        finally:
            self._sock = None
            self._rf = None
            self._phase = "closed"

    def _send_line(self, line: str) -> None:
        if self._sock is None:
            raise OrderError("not connected")
        self._sock.sendall((line + "\n").encode("ascii"))

    def _read_line(self) -> str:
        raw = self._rf.readline()
        if not raw:
            raise ClientError("server closed the connection")
        return raw.decode("ascii").rstrip("\n")

    def _read_state(self) -> GameState:
        line = self._read_line()
        if line.startswith("ERR "):
            _, code, text = line.split(" ", 2)
            raise ServerError(code, text)
        self._state = parse_state_line(line)
        self._phase = "state_ready"
        return self._state

    @staticmethod
    def _settings_line(tag: str, settings: dict) -> str:
        parts = [tag]
        for k in sorted(settings):
            v = settings[k]
            if isinstance(v, float):
                v = repr(v)
            parts.append(f"{k}={v}")
        return " ".join(parts)

    def new_game(self, settings: dict | None = None) -> GameState:
        if self._phase not in ("idle", "terminal"):
            raise OrderError(f"cannot start a game in phase {self._phase}")
        self._send_line(self._settings_line("NEWGAME", settings or {}))
        return self._read_state()

    def reset(self, settings: dict | None = None) -> GameState:
        if self._phase != "terminal":
            raise OrderError("reset is only valid after a terminal state")
        self._send_line(self._settings_line("RESET", settings or {}))
        return self._read_state()

    def get_state(self) -> tuple[GameState, bool]:
        if self._phase != "state_ready":
            raise OrderError("no state pending")
        self._phase = "terminal" if self._state.terminal else "awaiting_actions"
        return self._state, self._state.terminal

    def make_actions(self, a1, a2=None) -> None:
        """Send this turn's actions and advance.  ``None`` delegates that
        player to the builtin policy chosen at NEWGAME (``ACT <p> -``)."""
        if self._phase != "awaiting_actions":
            raise OrderError(f"not awaiting actions (phase {self._phase})")
        self._send_line("ACT 0 -" if a1 is None else f"ACT 0 {format_action(a1)}")
        self._send_line("ACT 1 -" if a2 is None else f"ACT 1 {format_action(a2)}")
        self._send_line("STEP")
        self._read_state()

    def save_replay(self, name: str) -> None:
        if self._phase != "terminal":
            raise OrderError("replays can be saved after a terminal state")
        self._send_line(f"REPLAYSAVE {name}")
        line = self._read_line()
        if line != "OK":
            if line.startswith("ERR "):
                _, code, text = line.split(" ", 2)
                raise ServerError(code, text)
            raise WireError(f"unexpected reply {line!r}")

    def load_replay(self, name: str) -> list[tuple[int, GameState]]:
        if self._phase not in ("idle", "terminal"):
            raise OrderError("replay playback is only valid between matches")
        self._send_line(f"REPLAYLOAD {name}")
        frames = []
        while True:
            line = self._read_line()
            if line == "OK":
                return frames
            if line.startswith("ERR "):
                _, code, text = line.split(" ", 2)
                raise ServerError(code, text)
            frames.append(parse_frame_line(line))
