import numpy as np
import pytest

from kumite.env import EnvClient, EnvClientError, ProtocolOrderError
from kumite.physics import all_hold_action
from kumite.proto import GameServer, ServerConfig


@pytest.fixture()
def server(tmp_path):
    srv = GameServer(ServerConfig(port=0, replay_dir=tmp_path)).start()
    yield srv
    srv.stop()


def test_connect_to_dead_port_errors_quickly():
    # port 9 (discard) is not listening in this sandbox
    with pytest.raises(EnvClientError):
        EnvClient(port=9, timeout=2.0).connect()


def test_double_close_is_idempotent(server):
    c = EnvClient(port=server.port).connect()
    c.close()
    c.close()


def test_lockstep_phase_errors(server):
    c = EnvClient(port=server.port).connect()
    with pytest.raises(ProtocolOrderError):
        c.get_state()  # no game yet
    c.new_game({"matchframes": "20", "turnframes": "10", "opponent": "immobile"})
    c.get_state()
    with pytest.raises(ProtocolOrderError):
        c.get_state()  # twice without make_actions
    c.make_actions(all_hold_action())
    with pytest.raises(ProtocolOrderError):
        c.make_actions(all_hold_action())  # pending state not consumed
    state, terminal = c.get_state()
    assert state.frames_played == 10 and not terminal
    c.close()


def test_delegated_both_players(server):
    c = EnvClient(port=server.port).connect()
    c.new_game({"matchframes": "30", "turnframes": "10", "opponent": "random", "seed": "2"})
    c.get_state()
    for _ in range(3):
        c.make_actions(None, None)
        state, terminal = c.get_state()
    assert terminal and state.frames_played == 30
    c.close()
