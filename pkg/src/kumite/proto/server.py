"""Synchronous TCP control server: one match session per connection.

Lockstep: after NEWGAME/RESET/STEP the server pushes a STATE line; the client
answers with one ACT per controlled player and STEP.  Physics never advances
without one resolved action per player (an ACT of "-", or the builtin
opponent configured at NEWGAME, counts as resolved).
"""
from __future__ import annotations

import os
import socketserver
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..match.replay import Replay, load_replay, record_replay, save_replay
from ..match.rules import (
    FrameRecord,
    MatchSettings,
    MatchSettingsError,
    MatchState,
    Winner,
    new_match,
    submit_actions,
)
from ..physics.bodydef import GROIN_PART_ID, N_PARTS
from ..physics.world import all_hold_action
from . import messages as msg

DEFAULT_PORT = 4747
PORT_ENV_VAR = "KUMITE_PORT"


def default_port() -> int:
    return int(os.environ.get(PORT_ENV_VAR, DEFAULT_PORT))


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = field(default_factory=default_port)
    replay_dir: str | Path = "replays"
    version: int = msg.PROTOCOL_VERSION


BUILTIN_POLICIES = ("none", "immobile", "random")


def parse_wire_settings(
    pairs: tuple[tuple[str, str], ...], base: MatchSettings
) -> tuple[MatchSettings, str, bool]:
    """Merge k=v overrides onto ``base``; returns (settings, opponent, record)."""
    kw: dict = {}
    opponent = "none"
    record = False
    for key, value in pairs:
        try:
            if key == "matchframes":
                kw["matchframes"] = int(value)
            elif key == "turnframes":
                kw["turnframes_schedule"] = tuple(int(x) for x in value.split(","))
            elif key == "engagement_distance":
                kw["engagement_distance"] = float(value)
            elif key == "dojo_radius":
                kw["dojo_radius"] = float(value)
            elif key == "dq":
                kw["dq_enabled"] = bool(int(value))
            elif key == "dismemberment":
                kw["dismemberment_enabled"] = bool(int(value))
            elif key == "gravity":
                g = tuple(float(x) for x in value.split(","))
                if len(g) != 3:
                    raise ValueError("need 3 components")
                kw["gravity"] = g
            elif key == "seed":
                kw["seed"] = int(value)
            elif key == "replay_name":
                kw["replay_name"] = value
            elif key == "record":
                record = bool(int(value))
            elif key == "opponent":
                if value not in BUILTIN_POLICIES:
                    raise ValueError(f"unknown policy {value!r}")
                opponent = value
            else:
                raise ValueError("unknown setting")
        except ValueError as exc:
            raise MatchSettingsError(f"{key}: {exc}") from None
    settings = MatchSettings(**{**base.__dict__, **kw})
    settings.validate()
    return settings, opponent, (record or settings.replay_name is not None)


def _player_block(pos, vel, rot_groin, modes, grips, injury) -> msg.PlayerBlock:
    return msg.PlayerBlock(
        positions=tuple(float(x) for x in pos.reshape(-1)),
        velocities=tuple(float(x) for x in vel.reshape(-1)),
        groin_rotation=tuple(float(x) for x in rot_groin.reshape(-1)),
        joint_modes=tuple(int(x) for x in modes),
        grips=tuple(int(x) for x in grips),
        injury=float(injury),
    )


def build_state(match: MatchState) -> msg.State:
    w = match.world
    blocks = []
    for p in range(2):
        lo = p * N_PARTS
        blocks.append(_player_block(
            w.pos[lo:lo + N_PARTS], w.vel[lo:lo + N_PARTS],
            w.rot[lo + GROIN_PART_ID],
            w.jmode[p * 20:(p + 1) * 20], w.gmode[2 * p:2 * p + 2],
            w.injury[p],
        ))
    winner = 0
    if match.terminal and match.outcome is not None:
        winner = {Winner.PLAYER1: 1, Winner.PLAYER2: 2, Winner.DRAW: 3}[match.outcome.winner]
    return msg.State(
        terminal=match.terminal,
        frames_played=match.frames_played,
        next_turnframes=match.current_turnframes,
        players=(blocks[0], blocks[1]),
        winner=winner,
    )


def frame_message(fr: FrameRecord) -> msg.Frame:
    blocks = []
    for p in range(2):
        lo = p * N_PARTS
        blocks.append(_player_block(
            fr.pos[lo:lo + N_PARTS], fr.vel[lo:lo + N_PARTS],
            fr.rot[lo + GROIN_PART_ID],
            fr.modes[p, :20], fr.modes[p, 20:], fr.injuries[p],
        ))
    return msg.Frame(frame_index=fr.frame_index, players=(blocks[0], blocks[1]))


class _BuiltinPolicy:
    def __init__(self, kind: str, seed: int, player: int):
        self.kind = kind
        self._rng = np.random.default_rng(np.random.SeedSequence((seed, 9000 + player)))

    def act(self) -> np.ndarray:
        if self.kind == "immobile":
            return all_hold_action()
        return np.concatenate([self._rng.integers(1, 5, 20), self._rng.integers(1, 3, 2)])


_replay_locks: dict[str, threading.Lock] = {}
_replay_locks_guard = threading.Lock()


def _replay_lock(name: str) -> threading.Lock:
    with _replay_locks_guard:
        return _replay_locks.setdefault(name, threading.Lock())


class _Session(socketserver.StreamRequestHandler):
    """One connection = one sequential match session."""

    def _send(self, m) -> None:
        self.wfile.write(msg.encode_message(m).encode("ascii"))
        self.wfile.flush()

    def handle(self) -> None:
        cfg: ServerConfig = self.server.config
        match: MatchState | None = None
        builtins: dict[int, _BuiltinPolicy] = {}
        opponent = "none"
        pending: dict[int, np.ndarray | None] = {}
        phase = "handshake"

        while True:
            raw = self.rfile.readline()
            if not raw:
                return  # disconnect; match discarded
            try:
                m = msg.decode_message(raw.decode("ascii", errors="strict"))
            except (msg.ProtocolError, UnicodeDecodeError) as exc:
                self._send(msg.Err("malformed", str(exc)))
                continue

            if isinstance(m, msg.Quit):
                return

            if phase == "handshake":
                if not isinstance(m, msg.Hello):
                    self._send(msg.Err("bad-order", "expected HELLO"))
                    continue
                if m.version != cfg.version:
                    self._send(msg.Err(
                        "version-mismatch",
                        f"server speaks version {cfg.version}, client sent {m.version}",
                    ))
                    return
                self._send(msg.Ok())
                phase = "idle"
                continue

            if isinstance(m, msg.ReplayLoad):
                if phase == "turn":
                    self._send(msg.Err("bad-order", "match in progress"))
                    continue
                path = Path(cfg.replay_dir) / f"{m.name}.kmrp"
                if not path.exists():
                    self._send(msg.Err("unknown-replay", f"no replay named {m.name}"))
                    continue
                replay = load_replay(path)
                for fr in replay.frames:
                    self._send(frame_message(fr))
                self._send(msg.Ok())
                continue

            if isinstance(m, (msg.NewGame, msg.Reset)):
                if phase == "turn":
                    self._send(msg.Err("bad-order", "match in progress; finish it or QUIT"))
                    continue
                base = MatchSettings() if isinstance(m, msg.NewGame) else (
                    match.settings if match is not None else MatchSettings()
                )
                try:
                    settings, opponent, record = parse_wire_settings(m.settings, base)
                except MatchSettingsError as exc:
                    self._send(msg.Err("bad-settings", str(exc)))
                    continue
                match = new_match(settings, record=record)
                # the chosen builtin is available to both players via ACT "-";
                # player 1 additionally auto-resolves to it with no ACT at all
                builtins = {}
                if opponent != "none":
                    builtins = {p: _BuiltinPolicy(opponent, settings.seed, p) for p in (0, 1)}
                pending = {}
                phase = "turn" if not match.terminal else "terminal"
                self._send(build_state(match))
                continue

            if isinstance(m, msg.Act):
                if phase != "turn":
                    self._send(msg.Err("bad-order", "no turn in progress"))
                    continue
                if m.player in pending:
                    self._send(msg.Err("bad-order", f"duplicate ACT for player {m.player}"))
                    continue
                if m.entries is None and m.player not in builtins:
                    self._send(msg.Err("no-builtin", f"player {m.player} has no builtin policy"))
                    continue
                pending[m.player] = None if m.entries is None else np.array(m.entries, dtype=np.int64)
                continue

            if isinstance(m, msg.Step):
                if phase != "turn":
                    self._send(msg.Err("bad-order", "no turn in progress"))
                    continue
                actions = {}
                ok = True
                for p in (0, 1):
                    if p in pending:
                        actions[p] = pending[p] if pending[p] is not None else builtins[p].act()
                    elif p == 1 and p in builtins:
                        actions[p] = builtins[p].act()
                    else:
                        self._send(msg.Err("bad-order", f"no action resolved for player {p}"))
                        ok = False
                        break
                if not ok:
                    continue
                match, _ = submit_actions(match, actions[0], actions[1])
                pending = {}
                if match.terminal:
                    phase = "terminal"
                self._send(build_state(match))
                continue

            if isinstance(m, msg.ReplaySave):
                if phase != "terminal" or match is None:
                    self._send(msg.Err("bad-order", "no finished match to save"))
                    continue
                if not match.recording:
                    self._send(msg.Err("not-recorded", "match was not recorded; pass record=1 or replay_name"))
                    continue
                replay = record_replay(match)
                path = Path(cfg.replay_dir)
                path.mkdir(parents=True, exist_ok=True)
                with _replay_lock(m.name):
                    save_replay(replay, path / f"{m.name}.kmrp")
                self._send(msg.Ok())
                continue

            self._send(msg.Err("bad-order", f"unexpected {type(m).__name__}"))


class _ThreadedTCPServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True


class GameServer:
    """Running server handle; sessions run on daemon threads."""

    def __init__(self, config: ServerConfig | None = None):
        self.config = config or ServerConfig()
        self._server = _ThreadedTCPServer((self.config.host, self.config.port), _Session)
        self._server.config = self.config
        self.port = self._server.server_address[1]
        self._thread: threading.Thread | None = None

    def start(self) -> "GameServer":
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def __enter__(self) -> "GameServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()


def serve(config: ServerConfig | None = None) -> GameServer:
    """Start a server; returns the running handle (use .stop() to end)."""
    return GameServer(config).start()
