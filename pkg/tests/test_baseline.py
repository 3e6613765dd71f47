import numpy as np
import pytest

from kumite.harness.baseline import (
    POPULATION,
    render_curve,
    rollout_return,
    search_agent_train,
)
from kumite.env import TaskEnv


def test_budget_below_one_population_rejected():
    with pytest.raises(ValueError, match="budget"):
        search_agent_train(budget=POPULATION - 1, seed=0)
    with pytest.raises(ValueError, match="budget"):
        search_agent_train(budget=0, seed=0)


def test_two_agent_task_rejected():
    with pytest.raises(ValueError):
        search_agent_train(task="aikido-dojo-v1", budget=64, seed=0)


def test_same_seed_same_policy():
    a = search_agent_train(budget=POPULATION, seed=4)
    b = search_agent_train(budget=POPULATION, seed=4)
    seq_a = a.agent.make_policy(0)._seq
    seq_b = b.agent.make_policy(0)._seq
    np.testing.assert_array_equal(seq_a, seq_b)
    assert a.best_return == b.best_return
    assert render_curve(a.curve) == render_curve(b.curve)


def test_rollout_return_telescopes():
    env = TaskEnv("destroy-uke-v1")
    seq = np.tile(np.array([3] * 20 + [2, 2], dtype=np.int64), (100, 1))
    total = rollout_return(env, seq, episode_seed=5)
    # the return telescopes to the final injury difference over 5000
    gs = env._gs
    assert total == pytest.approx(
        (gs.players[1].injury - gs.players[0].injury) / 5000.0
    )


def test_training_curve_episode_accounting():
    res = search_agent_train(budget=2 * POPULATION, seed=1)
    assert res.episodes_used == 2 * POPULATION
    assert res.curve[-1].episodes_used == 2 * POPULATION
    assert len(res.curve) == 2
