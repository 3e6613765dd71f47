import io

import numpy as np
import pytest

from kumite.match import (
    AIKIDO_SCHEDULE,
    MatchSettings,
    MatchSettingsError,
    MatchTerminalError,
    Reason,
    Winner,
    check_disqualification,
    new_match,
    submit_actions,
)
from kumite.physics import all_hold_action, make_world, sever_joint
from kumite.physics.bodydef import N_PARTS, PART_NAMES
from kumite.physics.engine import FrameEvents


def hold():
    return all_hold_action()


def relax():
    return np.array([2] * 22)


def rand_action(rng):
    return np.concatenate([rng.integers(1, 5, 20), rng.integers(1, 3, 2)])


def ground_touch_events(*touches):
    """FrameEvents fixture with the given (player, part) ground touches."""
    n = len(touches)
    return FrameEvents(
        contact_a=np.array([p * N_PARTS + k for p, k in touches], dtype=np.int64),
        contact_b=np.full(n, -1, dtype=np.int64),
        contact_impulse=np.zeros(n),
        contact_point=np.zeros((n, 3)),
        injury_deltas=(0.0, 0.0),
        dismemberments=[],
        n_ground=n,
    )


# ---- settings and match lifecycle ---------------------------------------------

def test_destroy_uke_defaults_give_100_turns():
    s = MatchSettings(matchframes=1000, turnframes_schedule=(10,))
    m = new_match(s)
    turns = 0
    rng = np.random.default_rng(0)
    while not m.terminal:
        m, rep = submit_actions(m, rand_action(rng), hold())
        turns += 1
    assert turns == 100
    assert m.frames_played == 1000


def test_aikido_schedule_rises_10_to_50():
    assert AIKIDO_SCHEDULE[0] == 10
    assert AIKIDO_SCHEDULE[-1] == 50
    assert list(AIKIDO_SCHEDULE) == sorted(AIKIDO_SCHEDULE)
    s = MatchSettings(matchframes=500, turnframes_schedule=AIKIDO_SCHEDULE)
    m = new_match(s)
    seen = [m.current_turnframes]
    while not m.terminal:
        m, _ = submit_actions(m, hold(), hold())
        seen.append(m.current_turnframes)
    assert seen[0] == 10
    assert all(b >= a for a, b in zip(seen, seen[1:]))
    assert max(seen) == 50


def test_zero_matchframes_rejected():
    with pytest.raises(MatchSettingsError, match="matchframes"):
        new_match(MatchSettings(matchframes=0))


def test_bad_schedule_rejected():
    with pytest.raises(MatchSettingsError, match="turnframes_schedule"):
        new_match(MatchSettings(turnframes_schedule=(10, 0)))


def test_all_hold_far_apart_is_timeout_draw():
    s = MatchSettings(matchframes=200, turnframes_schedule=(20,),
                      engagement_distance=2000.0)
    m = new_match(s)
    while not m.terminal:
        m, _ = submit_actions(m, hold(), hold())
    assert m.outcome.final_injuries == (0.0, 0.0)
    assert m.outcome.winner is Winner.DRAW
    assert m.outcome.reason is Reason.TIMEOUT_DRAW


def test_final_turn_clamps_to_matchframes():
    s = MatchSettings(matchframes=995, turnframes_schedule=(10,), engagement_distance=500.0)
    m = new_match(s)
    rep = None
    while not m.terminal:
        m, rep = submit_actions(m, hold(), hold())
    assert m.frames_played == 995
    assert rep.frames_advanced == 5


def test_acting_on_terminal_match_raises():
    s = MatchSettings(matchframes=10, turnframes_schedule=(10,))
    m = new_match(s)
    m, _ = submit_actions(m, hold(), hold())
    assert m.terminal
    with pytest.raises(MatchTerminalError):
        submit_actions(m, hold(), hold())


def test_malformed_action_leaves_match_unchanged():
    m = new_match(MatchSettings())
    bad = hold()
    bad[0] = 9
    frames_before = m.frames_played
    with pytest.raises(Exception):
        submit_actions(m, bad, hold())
    assert m.frames_played == frames_before
    assert not m.turn_log


def test_frame_accounting():
    s = MatchSettings(matchframes=137, turnframes_schedule=(7, 11, 13))
    m = new_match(s)
    total = 0
    rng = np.random.default_rng(1)
    while not m.terminal:
        m, rep = submit_actions(m, rand_action(rng), rand_action(rng))
        total += rep.frames_advanced
        assert m.frames_played <= s.matchframes
    assert total == m.frames_played


def test_score_outcome_consistent():
    rng = np.random.default_rng(3)
    s = MatchSettings(matchframes=300, turnframes_schedule=(10,),
                      engagement_distance=100.0, seed=3)
    m = new_match(s)
    while not m.terminal:
        m, _ = submit_actions(m, rand_action(rng), rand_action(rng))
    out = m.outcome
    if out.reason is Reason.SCORE:
        w = 0 if out.winner is Winner.PLAYER1 else 1
        assert out.final_injuries[w] < out.final_injuries[1 - w]
    else:
        assert out.winner is Winner.DRAW
        assert out.final_injuries[0] == out.final_injuries[1]


# ---- disqualification ----------------------------------------------------------

DQ_SETTINGS = MatchSettings(dq_enabled=True, dojo_radius=400.0)


def test_foot_inside_dojo_no_dq():
    w = make_world(150.0)
    ev = ground_touch_events((0, PART_NAMES.index("r_foot")))
    assert check_disqualification(w, DQ_SETTINGS, ev) is None


def test_hand_inside_dojo_no_dq():
    w = make_world(150.0)
    w.pos[PART_NAMES.index("l_hand"), 2] = 5.0
    ev = ground_touch_events((0, PART_NAMES.index("l_hand")))
    assert check_disqualification(w, DQ_SETTINGS, ev) is None


def test_chest_inside_dojo_dq():
    w = make_world(150.0)
    ev = ground_touch_events((1, PART_NAMES.index("chest")))
    got = check_disqualification(w, DQ_SETTINGS, ev)
    assert got is not None
    player, detail = got
    assert player == 1
    assert detail.part_id == PART_NAMES.index("chest")
    assert detail.inside_dojo


def test_hand_outside_dojo_dq():
    w = make_world(150.0)
    hand = PART_NAMES.index("r_hand")
    w.pos[hand] = (500.0, 0.0, 5.0)  # beyond the 400 radius
    ev = ground_touch_events((0, hand))
    got = check_disqualification(w, DQ_SETTINGS, ev)
    assert got is not None
    assert got[0] == 0
    assert not got[1].inside_dojo


def test_severed_part_dq_anywhere():
    w = make_world(150.0)
    sever_joint(w, 0, 10)  # r_wrist -> r_hand severed
    hand = PART_NAMES.index("r_hand")
    ev = ground_touch_events((0, hand))
    got = check_disqualification(w, DQ_SETTINGS, ev)
    assert got is not None and got[0] == 0


def test_dojo_disabled_only_part_type_matters():
    s = MatchSettings(dq_enabled=True, dojo_radius=0.0)
    w = make_world(150.0)
    hand = PART_NAMES.index("r_hand")
    w.pos[hand] = (5000.0, 0.0, 5.0)
    assert check_disqualification(w, s, ground_touch_events((0, hand))) is None
    assert check_disqualification(w, s, ground_touch_events((0, 0))) is not None


def test_double_offense_reports_lower_player_first():
    w = make_world(150.0)
    ev = ground_touch_events((1, 2), (0, 3), (0, 1))
    player, detail = check_disqualification(w, DQ_SETTINGS, ev)
    assert player == 0
    assert detail.part_id == 1


def test_collapse_inside_dojo_ends_with_dq():
    s = MatchSettings(matchframes=1000, turnframes_schedule=(10,),
                      dq_enabled=True, dojo_radius=500.0, engagement_distance=600.0)
    m = new_match(s)
    while not m.terminal:
        m, _ = submit_actions(m, relax(), relax())
    assert m.outcome.reason is Reason.DISQUALIFICATION
    assert m.outcome.dq_detail is not None
    assert m.outcome.dq_detail.part_id not in (
        PART_NAMES.index("r_hand"), PART_NAMES.index("l_hand"),
        PART_NAMES.index("r_foot"), PART_NAMES.index("l_foot"),
    )
    assert m.frames_played < 1000
