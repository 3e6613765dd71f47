import base64
import hashlib
import os
import socket
import struct
import threading

import numpy as np
import pytest

from kumite.proto import (
    Act,
    GameServer,
    Gateway,
    GatewayConfig,
    Hello,
    NewGame,
    Ok,
    PROTOCOL_VERSION,
    Quit,
    ReplayLoad,
    ReplaySave,
    Reset,
    ServerConfig,
    Step,
    decode_message,
    encode_message,
)
from kumite.proto import messages as msg


class LineClient:
    def __init__(self, port, host="127.0.0.1"):
        self.sock = socket.create_connection((host, port), timeout=10)
        self.rf = self.sock.makefile("rb")

    def send(self, m):
        self.sock.sendall(encode_message(m).encode("ascii"))

    def send_raw(self, text):
        self.sock.sendall(text.encode("ascii"))

    def recv(self):
        line = self.rf.readline().decode("ascii")
        assert line, "connection closed"
        return decode_message(line)

    def close(self):
        self.sock.close()

    def handshake(self):
        self.send(Hello(PROTOCOL_VERSION))
        assert isinstance(self.recv(), Ok)


@pytest.fixture()
def server(tmp_path):
    srv = GameServer(ServerConfig(port=0, replay_dir=tmp_path / "replays"))
    srv.start()
    yield srv
    srv.stop()


def hold_act(player):
    return Act(player, tuple([1] * 20 + [2, 2]))


def test_session_start_and_first_state(server):
    c = LineClient(server.port)
    c.handshake()
    c.send(NewGame((("matchframes", "100"), ("turnframes", "10"))))
    st = c.recv()
    assert isinstance(st, msg.State)
    assert st.terminal is False
    assert st.frames_played == 0
    assert st.winner == 0
    c.send(Quit())
    c.close()


def test_version_mismatch_is_fatal(server):
    c = LineClient(server.port)
    c.send(Hello(PROTOCOL_VERSION + 1))
    e = c.recv()
    assert isinstance(e, msg.Err) and e.code == "version-mismatch"
    assert c.rf.readline() == b""  # server closed the connection


def test_full_match_100_turns(server):
    c = LineClient(server.port)
    c.handshake()
    c.send(NewGame((("matchframes", "1000"), ("turnframes", "10"),
                    ("opponent", "immobile"), ("seed", "4"))))
    st = c.recv()
    turns = 0
    while not st.terminal:
        c.send(hold_act(0))
        c.send(Step())
        st = c.recv()
        turns += 1
    assert turns == 100
    assert st.frames_played == 1000
    assert st.winner in (1, 2, 3)
    c.close()


def test_lockstep_violations(server):
    c = LineClient(server.port)
    c.handshake()
    c.send(Step())
    assert c.recv().code == "bad-order"
    c.send(NewGame((("opponent", "none"),)))
    assert isinstance(c.recv(), msg.State)
    c.send(Step())  # no actions resolved
    e = c.recv()
    assert isinstance(e, msg.Err) and e.code == "bad-order"
    c.send(hold_act(0))
    c.send(Step())  # player 1 unresolved
    e = c.recv()
    assert isinstance(e, msg.Err) and e.code == "bad-order"
    c.send(hold_act(1))
    c.send(Step())  # now fine; session stayed at last good state
    st = c.recv()
    assert isinstance(st, msg.State) and st.frames_played == 10
    c.send(hold_act(0))
    c.send(hold_act(0))
    e = c.recv()
    assert isinstance(e, msg.Err) and e.code == "bad-order"  # duplicate ACT
    c.close()


def test_act_dash_requires_builtin(server):
    c = LineClient(server.port)
    c.handshake()
    c.send(NewGame(()))
    c.recv()
    c.send(Act(1, None))
    e = c.recv()
    assert isinstance(e, msg.Err) and e.code == "no-builtin"
    c.close()


def test_malformed_line_keeps_session(server):
    c = LineClient(server.port)
    c.handshake()
    c.send_raw("GIBBERISH x y\n")
    e = c.recv()
    assert isinstance(e, msg.Err) and e.code == "malformed"
    c.send(NewGame(()))
    assert isinstance(c.recv(), msg.State)
    c.close()


def test_two_concurrent_sessions_independent(server):
    c1 = LineClient(server.port)
    c2 = LineClient(server.port)
    c1.handshake()
    c2.handshake()
    c1.send(NewGame((("opponent", "random"), ("seed", "1"), ("engagement_distance", "100"))))
    c2.send(NewGame((("opponent", "random"), ("seed", "2"), ("engagement_distance", "100"))))
    s1 = c1.recv()
    s2 = c2.recv()
    for _ in range(30):
        c1.send(Act(0, None))
        c2.send(Act(0, None))
        c1.send(Step())
        c2.send(Step())
        s1 = c1.recv()
        s2 = c2.recv()
    assert s1.players[0].positions != s2.players[0].positions  # different seeds
    c1.close()
    c2.close()


def test_same_seed_sessions_identical(server):
    def run():
        c = LineClient(server.port)
        c.handshake()
        c.send(NewGame((("opponent", "random"), ("seed", "11"),
                        ("engagement_distance", "100"), ("matchframes", "200"))))
        lines = []
        st = c.recv()
        while not st.terminal:
            c.send(Act(0, None))
            c.send(Step())
            st = c.recv()
            lines.append(encode_message(st))
        c.close()
        return lines

    assert run() == run()


def test_reset_after_terminal(server):
    c = LineClient(server.port)
    c.handshake()
    c.send(NewGame((("matchframes", "10"), ("turnframes", "10"))))
    c.recv()
    c.send(hold_act(0))
    c.send(hold_act(1))
    c.send(Step())
    st = c.recv()
    assert st.terminal
    c.send(Reset((("matchframes", "20"),)))
    st2 = c.recv()
    assert st2.terminal is False and st2.frames_played == 0
    c.close()


def test_replay_save_and_load_over_wire(server):
    c = LineClient(server.port)
    c.handshake()
    c.send(NewGame((("matchframes", "30"), ("turnframes", "10"),
                    ("opponent", "immobile"), ("record", "1"))))
    st = c.recv()
    while not st.terminal:
        c.send(hold_act(0))
        c.send(Step())
        st = c.recv()
    c.send(ReplaySave("golden1"))
    assert isinstance(c.recv(), Ok)
    c.send(ReplayLoad("golden1"))
    frames = []
    while True:
        m = c.recv()
        if isinstance(m, Ok):
            break
        assert isinstance(m, msg.Frame)
        frames.append(m)
    assert len(frames) == 30
    assert frames[0].frame_index == 1
    c.send(ReplayLoad("nope"))
    e = c.recv()
    assert isinstance(e, msg.Err) and e.code == "unknown-replay"
    c.close()


def test_bad_settings_named(server):
    c = LineClient(server.port)
    c.handshake()
    c.send(NewGame((("matchframes", "0"),)))
    e = c.recv()
    assert isinstance(e, msg.Err) and e.code == "bad-settings"
    assert "matchframes" in e.text
    c.close()


# ---- gateway -------------------------------------------------------------------

class WsClient:
    """Minimal RFC6455 client for tests."""

    def __init__(self, port):
        self.sock = socket.create_connection(("127.0.0.1", port), timeout=10)
        key = base64.b64encode(os.urandom(16)).decode()
        self.sock.sendall(
            (f"GET / HTTP/1.1\r\nHost: x\r\nUpgrade: websocket\r\n"
             f"Connection: Upgrade\r\nSec-WebSocket-Key: {key}\r\n"
             f"Sec-WebSocket-Version: 13\r\n\r\n").encode()
        )
        self.rf = self.sock.makefile("rb")
        status = self.rf.readline()
        assert b"101" in status, status
        while self.rf.readline() not in (b"\r\n", b"\n"):
            pass

    def send_text(self, text):
        payload = text.encode("ascii")
        mask = os.urandom(4)
        n = len(payload)
        head = bytes([0x81])
        if n < 126:
            head += bytes([0x80 | n])
        else:
            head += bytes([0x80 | 126]) + struct.pack(">H", n)
        body = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
        self.sock.sendall(head + mask + body)

    def recv_text(self):
        head = self.rf.read(2)
        assert len(head) == 2
        opcode = head[0] & 0x0F
        n = head[1] & 0x7F
        if n == 126:
            n = struct.unpack(">H", self.rf.read(2))[0]
        elif n == 127:
            n = struct.unpack(">Q", self.rf.read(8))[0]
        data = self.rf.read(n)
        return opcode, data.decode("ascii")

    def close(self):
        self.sock.close()


@pytest.fixture()
def gateway_stack(tmp_path):
    srv = GameServer(ServerConfig(port=0, replay_dir=tmp_path / "replays"))
    srv.start()
    gw = Gateway(GatewayConfig(port=0, upstream_port=srv.port))
    gw.start()
    yield srv, gw
    gw.stop()
    srv.stop()


def test_gateway_passthrough(gateway_stack):
    srv, gw = gateway_stack
    ws = WsClient(gw.port)
    ws.send_text("HELLO 1")
    op, text = ws.recv_text()
    assert op == 1 and text == "OK"
    ws.send_text("NEWGAME matchframes=20 turnframes=10 opponent=immobile")
    op, text = ws.recv_text()
    assert text.startswith("STATE 0 0 10 ")
    # relayed lines are byte-identical modulo the trailing newline
    assert decode_message(text + "\n").frames_played == 0
    ws.send_text("ACT 0 -")
    ws.send_text("STEP")
    op, text = ws.recv_text()
    assert text.startswith("STATE 0 10 10 ")
    ws.close()


def test_gateway_relays_malformed_error(gateway_stack):
    srv, gw = gateway_stack
    ws = WsClient(gw.port)
    ws.send_text("HELLO 1")
    ws.recv_text()
    ws.send_text("NOT A MESSAGE")
    op, text = ws.recv_text()
    assert text.startswith("ERR malformed ")
    ws.close()


def test_gateway_upstream_unreachable():
    gw = Gateway(GatewayConfig(port=0, upstream_port=1))  # nothing listens on 1
    gw.start()
    try:
        sock = socket.create_connection(("127.0.0.1", gw.port), timeout=10)
        key = base64.b64encode(os.urandom(16)).decode()
        sock.sendall(
            (f"GET / HTTP/1.1\r\nHost: x\r\nUpgrade: websocket\r\n"
             f"Connection: Upgrade\r\nSec-WebSocket-Key: {key}\r\n\r\n").encode()
        )
        reply = sock.recv(4096)
        assert b"502" in reply and b"unreachable" in reply
        sock.close()
    finally:
        gw.stop()
