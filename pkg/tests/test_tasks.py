import numpy as np
import pytest

from kumite.env import (
    GameState,
    PlayerState,
    TaskEnv,
    TaskError,
    game_state_from_message,
    reward_destroy_uke,
    reward_win_loss,
)
from kumite.proto import GameServer, ServerConfig


def rand_action(rng):
    return np.concatenate([rng.integers(1, 5, 20), rng.integers(1, 3, 2)])


def _gs(injuries, terminal=False, winner=0):
    players = tuple(
        PlayerState(
            positions=np.zeros((21, 3)), velocities=np.zeros((21, 3)),
            groin_rotation=np.eye(3), joint_modes=np.ones(20, dtype=np.int64),
            grips=np.full(2, 2, dtype=np.int64), injury=float(injuries[p]),
        )
        for p in (0, 1)
    )
    return GameState(players, terminal, winner, 0, 10)


# ---- rewards ------------------------------------------------------------------

def test_reward_destroy_uke_formula():
    assert reward_destroy_uke(_gs((0, 0)), _gs((0, 5000))) == 1.0
    assert reward_destroy_uke(_gs((0, 0)), _gs((700, 700))) == 0.0
    assert reward_destroy_uke(_gs((0, 0)), _gs((500, 1000))) == pytest.approx(0.1)
    # literal formula, no clamping: negative when the agent takes more damage
    assert reward_destroy_uke(_gs((0, 0)), _gs((1000, 500))) == pytest.approx(-0.1)


def test_reward_win_loss():
    assert reward_win_loss(_gs((0, 0)), 0) == 0.0
    assert reward_win_loss(_gs((0, 0), terminal=True, winner=3), 0) == 0.0
    assert reward_win_loss(_gs((0, 0), terminal=True, winner=1), 0) == 1.0
    assert reward_win_loss(_gs((0, 0), terminal=True, winner=1), 1) == -1.0


# ---- destroy-uke task -----------------------------------------------------------

def test_reset_seeded_reproducible():
    env = TaskEnv("destroy-uke-v1")
    a = env.reset(seed=42)
    b = env.reset(seed=42)
    np.testing.assert_array_equal(a.relative_positions, b.relative_positions)
    c = env.reset(seed=43)
    assert not np.array_equal(a.relative_positions, c.relative_positions)


def test_engagement_sampled_in_range():
    env = TaskEnv("destroy-uke-v1")
    for seed in range(8):
        env.reset(seed=seed)
        gs = env._gs
        d = gs.players[1].positions[4][0] - gs.players[0].positions[4][0]
        assert 100.0 <= d <= 200.0


def test_destroy_uke_terminates_at_step_100():
    env = TaskEnv("destroy-uke-v1")
    env.reset(seed=1)
    rng = np.random.default_rng(1)
    steps = 0
    terminal = False
    while not terminal:
        obs, reward, terminal, info = env.step(rand_action(rng))
        steps += 1
    assert steps == 100
    assert info["frames_played"] == 1000


def test_reward_telescopes_to_final_injuries():
    env = TaskEnv("destroy-uke-v1")
    env.reset(seed=7)
    rng = np.random.default_rng(7)
    total = 0.0
    terminal = False
    while not terminal:
        _, r, terminal, info = env.step(rand_action(rng))
        total += r
    i0, i1 = info["injuries"]
    assert total == pytest.approx((i1 - i0) / 5000.0)


def test_step_guards():
    env = TaskEnv("destroy-uke-v1")
    with pytest.raises(TaskError):
        env.step(np.ones(22, dtype=np.int64))
    env.reset(seed=0)
    with pytest.raises(TaskError):
        env.step(np.ones(22, dtype=np.int64), np.ones(22, dtype=np.int64))


def test_step_after_terminal_raises():
    env = TaskEnv("destroy-uke-v1")
    env.reset(seed=2)
    rng = np.random.default_rng(2)
    terminal = False
    while not terminal:
        _, _, terminal, _ = env.step(rand_action(rng))
    with pytest.raises(TaskError):
        env.step(rand_action(rng))


# ---- aikido task -----------------------------------------------------------------

def test_aikido_two_agent_api_and_dq_rewards():
    env = TaskEnv("aikido-dojo-v1")
    obs0, obs1 = env.reset(seed=5)
    assert obs0.concat().shape == (130,)
    relax = np.full(22, 2, dtype=np.int64)
    terminal = False
    rewards = None
    while not terminal:
        (obs0, obs1), rewards, terminal, info = env.step(relax, relax)
    # both collapsed; someone was disqualified
    assert rewards in ((1.0, -1.0), (-1.0, 1.0))
    assert info["winner"] in (1, 2)


def test_aikido_requires_both_actions():
    env = TaskEnv("aikido-dojo-v1")
    env.reset(seed=1)
    with pytest.raises(TaskError):
        env.step(np.ones(22, dtype=np.int64))


# ---- remote backend parity --------------------------------------------------------

def test_remote_backend_bitwise_equal_to_local(tmp_path):
    srv = GameServer(ServerConfig(port=0, replay_dir=tmp_path)).start()
    try:
        local = TaskEnv("destroy-uke-v1")
        remote = TaskEnv("destroy-uke-v1", address=("127.0.0.1", srv.port))
        lo = local.reset(seed=11)
        ro = remote.reset(seed=11)
        np.testing.assert_array_equal(lo.relative_positions, ro.relative_positions)
        rng = np.random.default_rng(11)
        for _ in range(5):
            a = rand_action(rng)
            lo, lr, lt, li = local.step(a)
            ro, rr, rt, ri = remote.step(a)
            np.testing.assert_array_equal(lo.relative_positions, ro.relative_positions)
            assert lr == rr and lt == rt and li == ri
        remote.close()
    finally:
        srv.stop()
