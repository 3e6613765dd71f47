"""Synchronous controller-side client: connect / get_state / make_actions /
close over the TCP protocol, with strict lockstep phase tracking."""
from __future__ import annotations

import socket

import numpy as np

from ..physics.world import validate_action
from ..proto import messages as msg
from ..proto.server import default_port
from .observations import GameState, game_state_from_message


class EnvClientError(RuntimeError):
    pass


class ProtocolOrderError(EnvClientError):
    pass


class ServerReportedError(EnvClientError):
    def __init__(self, code: str, text: str):
        super().__init__(f"server error [{code}]: {text}")
        self.code = code
        self.text = text


class EnvClient:
    """One lockstep session.  Phases: connected -> state_ready (a state is
    waiting to be read) -> awaiting_actions (state was read) -> ..."""

    def __init__(self, host: str = "127.0.0.1", port: int | None = None,
                 timeout: float = 60.0):
        self.host = host
        self.port = port if port is not None else default_port()
        self.timeout = timeout
        self._sock: socket.socket | None = None
        self._rf = None
        self._phase = "closed"
        self._state: GameState | None = None

    # --- transport -----------------------------------------------------------
    def connect(self) -> "EnvClient":
        if self._sock is not None:
            raise ProtocolOrderError("already connected")
        try:
            self._sock = socket.create_connection((self.host, self.port), timeout=self.timeout)
        except OSError as exc:
            raise EnvClientError(f"cannot connect to {self.host}:{self.port}: {exc}") from exc
        self._rf = self._sock.makefile("rb")
        self._send(msg.Hello(msg.PROTOCOL_VERSION))
        reply = self._recv()
        if not isinstance(reply, msg.Ok):
            raise EnvClientError(f"handshake failed: {reply}")
        self._phase = "idle"
        return self

    def close(self) -> None:
        """Idempotent."""
        if self._sock is None:
            return
        try:
            self._send(msg.Quit())
        except OSError:
            pass
        try:
            self._sock.close()
        finally:
            self._sock = None
            self._rf = None
            self._phase = "closed"

    def _send(self, m) -> None:
        if self._sock is None:
            raise ProtocolOrderError("not connected")
        self._sock.sendall(msg.encode_message(m).encode("ascii"))

    def _recv(self):
        line = self._rf.readline()
        if not line:
            raise EnvClientError("server closed the connection")
        return msg.decode_message(line.decode("ascii"))

    def _recv_checked(self):
        reply = self._recv()
        if isinstance(reply, msg.Err):
            raise ServerReportedError(reply.code, reply.text)
        return reply

    # --- session -------------------------------------------------------------
    def new_game(self, settings: dict[str, str] | None = None) -> GameState:
        if self._phase not in ("idle", "terminal"):
            raise ProtocolOrderError(f"cannot start a game in phase {self._phase}")
        pairs = tuple(sorted((k, str(v)) for k, v in (settings or {}).items()))
        self._send(msg.NewGame(pairs))
        state = self._recv_checked()
        if not isinstance(state, msg.State):
            raise EnvClientError(f"expected STATE, got {state}")
        self._state = game_state_from_message(state)
        self._phase = "state_ready"
        return self._state

    def get_state(self) -> tuple[GameState, bool]:
        """The pending state and its terminal flag; one call per turn."""
        if self._phase != "state_ready":
            raise ProtocolOrderError(
                "no state pending (get_state called twice, or before a game started)"
            )
        self._phase = "terminal" if self._state.terminal else "awaiting_actions"
        return self._state, self._state.terminal

    def make_actions(self, a1, a2=None) -> None:
        """Send this turn's action(s) and advance one turn.  ``None``
        delegates that player to the builtin policy chosen at NEWGAME
        (only valid when one was configured)."""
        if self._phase != "awaiting_actions":
            raise ProtocolOrderError(f"not awaiting actions (phase {self._phase})")

        def to_act(player, a):
            if a is None:
                return msg.Act(player, None)
            return msg.Act(player, tuple(int(x) for x in validate_action(a)))

        for a in (to_act(0, a1), to_act(1, a2)):
            self._send(a)
        self._send(msg.Step())
        state = self._recv_checked()
        if not isinstance(state, msg.State):
            raise EnvClientError(f"expected STATE, got {state}")
        self._state = game_state_from_message(state)
        self._phase = "state_ready"
