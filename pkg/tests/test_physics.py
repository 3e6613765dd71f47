import numpy as np
import pytest

from kumite.physics import (
    DT,
    ContactEvent,
    InvalidActionError,
    SimulationFault,
    all_hold_action,
    compute_injury,
    make_world,
    mirror_world,
    set_joint_modes,
    sever_joint,
    step_frame,
    validate_action,
)
from kumite.physics import kernels
from kumite.physics.bodydef import PART_NAMES


def random_action(rng):
    return np.concatenate([rng.integers(1, 5, 20), rng.integers(1, 3, 2)])


def run_random(world, frames, rng, turnframes=10):
    events = []
    for t in range(frames // turnframes):
        for p in (0, 1):
            set_joint_modes(world, p, random_action(rng))
        for _ in range(turnframes):
            world, ev = step_frame(world)
            events.append(ev)
    return world, events


# ---- make_world -------------------------------------------------------------

def test_engagement_distance_exact():
    w = make_world(150.0)
    d = w.groin_position(1)[0] - w.groin_position(0)[0]
    assert abs(d - 150.0) <= 1e-9


def test_make_world_rejects_bad_settings():
    with pytest.raises(ValueError, match="engagement_distance"):
        make_world(0.0)
    with pytest.raises(ValueError, match="engagement_distance"):
        make_world(-5.0)


def test_make_world_deterministic():
    a = make_world(123.0, seed=9)
    b = make_world(123.0, seed=9)
    assert a.serialize_state() == b.serialize_state()


def test_all_joints_start_hold_zero_injury():
    w = make_world(100.0)
    assert np.all(w.jmode == 1)
    assert np.all(w.injury == 0.0)
    assert w.frame_index == 0


# ---- actions ----------------------------------------------------------------

def test_action_validation_rejects_out_of_range():
    w = make_world(100.0)
    before = w.serialize_state()
    bad = all_hold_action()
    bad[3] = 5
    with pytest.raises(InvalidActionError):
        set_joint_modes(w, 0, bad)
    assert w.serialize_state() == before  # world unchanged

    bad = all_hold_action()
    bad[20] = 3
    with pytest.raises(InvalidActionError):
        validate_action(bad)

    with pytest.raises(InvalidActionError):
        validate_action([1] * 21)


def test_hold_locks_current_angle():
    w = make_world(150.0)
    rng = np.random.default_rng(3)
    w, _ = run_random(w, 50, rng)
    angles = w.joint_angles()
    set_joint_modes(w, 0, all_hold_action())
    np.testing.assert_array_equal(w.jlock[:20], angles[:20])


def test_relax_collapses_standing_character():
    # Unpowered ragdoll falls.  At gravity 30 a >50% groin drop within the
    # spec's 120 frames exceeds even free fall (60 units max vs 100 needed
    # from a 200-unit stand height), so the check runs over 300 frames; the
    # deviation is recorded in the project notes.
    w = make_world(400.0)
    z0 = w.groin_position(0)[2]
    relax = np.array([2] * 22)
    set_joint_modes(w, 0, relax)
    set_joint_modes(w, 1, relax)
    for _ in range(300):
        w, _ = step_frame(w)
    assert w.groin_position(0)[2] < 0.5 * z0
    assert w.groin_position(1)[2] < 0.5 * z0


def test_all_hold_stands_for_a_full_match():
    w = make_world(400.0)
    z0 = w.groin_position(0)[2]
    for _ in range(1000):
        w, _ = step_frame(w)
    assert w.groin_position(0)[2] > 0.95 * z0
    assert not w.fault


# ---- step_frame -------------------------------------------------------------

def test_single_free_part_semi_implicit_euler():
    # one unconstrained sphere: after one step v = g*dt, z = z0 + v*dt
    n = 1
    pos = np.array([[0.0, 0.0, 10.0]])
    vel = np.zeros((n, 3))
    rot = np.eye(3)[None, :, :].copy()
    angvel = np.zeros((n, 3))
    empty_i = np.zeros(0, dtype=np.int64)
    empty_f3 = np.zeros((0, 3))
    maxc = 3
    ncon, ngr, fault = kernels.step_kernel(
        pos, vel, rot, angvel,
        empty_i, np.zeros(0), np.zeros(0, dtype=bool),
        np.zeros(4, dtype=bool), np.full(4, -1, dtype=np.int64),
        np.zeros((4, 3)), np.zeros((4, 3)),
        np.array([0, 0, 0, 0], dtype=np.int64),
        np.array([1.0]), np.array([1.0]), np.array([1.0]),
        empty_i, empty_i, empty_f3, empty_f3, empty_f3, empty_f3,
        np.zeros(0), np.zeros(0), np.zeros(0), np.zeros(0),
        np.zeros((0, 4), dtype=np.int64), np.array([0], dtype=np.int64),
        0.0, 0.0, -30.0, DT, 0.0,
        np.zeros(maxc, dtype=np.int64), np.zeros(maxc, dtype=np.int64),
        np.zeros(maxc), np.zeros((maxc, 3)), np.zeros(maxc),
        np.zeros(0), empty_f3, empty_f3, empty_f3, empty_f3, empty_f3,
        np.zeros((0, 3, 3)),
        np.zeros(0), np.zeros(0),
        np.zeros((4, 3, 3)), np.zeros((4, 3)), np.zeros((4, 3)), np.zeros((4, 3)),
        np.zeros((maxc, 3)), np.zeros((maxc, 3)), np.zeros((maxc, 3)),
        np.zeros(maxc), np.zeros((maxc, 2)), np.zeros(maxc, dtype=np.int64),
        np.zeros(maxc), np.zeros(maxc),
        np.zeros((maxc, 3)), np.zeros((maxc, 3)), np.zeros(maxc, dtype=np.int64),
    )
    assert not fault
    assert ncon == 0
    expected_v = -30.0 * DT
    assert vel[0, 2] == expected_v
    assert abs(vel[0, 2] - (-0.5)) < 1e-12
    assert pos[0, 2] == 10.0 + expected_v * DT
    assert abs(pos[0, 2] - (10.0 - 0.5 / 60.0)) < 1e-12


def test_zero_gravity_all_hold_is_equilibrium():
    w = make_world(150.0, gravity=(0.0, 0.0, 0.0))
    p0 = w.pos.copy()
    v0 = w.vel.copy()
    for _ in range(10):
        w, ev = step_frame(w)
    np.testing.assert_allclose(w.pos, p0, atol=1e-9)
    np.testing.assert_allclose(w.vel, v0, atol=1e-9)
    assert w.frame_index == 10


def test_frame_index_increments():
    w = make_world(100.0)
    w, _ = step_frame(w)
    assert w.frame_index == 1


def test_collision_produces_impulse_and_injury():
    w = make_world(90.0, seed=3)
    w.vel[:21, 0] = 80.0  # player 0 lunges
    hit = False
    for _ in range(90):
        w, ev = step_frame(w)
        pp = len(ev.contact_a) - ev.n_ground
        if pp > 0:
            assert np.all(ev.contact_impulse[ev.n_ground:] >= 0.0)
            if max(ev.injury_deltas) > 0:
                hit = True
                break
    assert hit
    assert w.injury[0] > 0 and w.injury[1] > 0


def test_stepping_faulted_world_raises():
    w = make_world(100.0)
    w.fault = True
    with pytest.raises(SimulationFault):
        step_frame(w)


def test_injury_monotone_and_no_fault_under_random_play():
    rng = np.random.default_rng(11)
    w = make_world(100.0, seed=5)
    prev = (0.0, 0.0)
    for t in range(60):
        for p in (0, 1):
            set_joint_modes(w, p, random_action(rng))
        for _ in range(10):
            w, ev = step_frame(w)
            cur = (float(w.injury[0]), float(w.injury[1]))
            assert cur[0] >= prev[0] and cur[1] >= prev[1]
            prev = cur
    assert not w.fault


def test_joint_limits_respected():
    # Limits are held by velocity rows plus positional projection; under
    # violent contact the projection leaves transient overshoot of a couple
    # of degrees, so the envelope here is 0.06 rad.
    rng = np.random.default_rng(4)
    w = make_world(100.0, seed=2)
    m = w.model
    lo = np.concatenate([m.jlo, m.jlo])
    hi = np.concatenate([m.jhi, m.jhi])
    for t in range(40):
        for p in (0, 1):
            set_joint_modes(w, p, random_action(rng))
        for _ in range(10):
            w, _ = step_frame(w)
            angles = w.joint_angles()
            ok = w.jintact
            assert np.all(angles[ok] >= lo[ok] - 0.06)
            assert np.all(angles[ok] <= hi[ok] + 0.06)


def test_orthonormal_after_long_run():
    rng = np.random.default_rng(8)
    w = make_world(120.0, seed=1)
    w, _ = run_random(w, 2000, rng)
    for i in range(42):
        err = np.max(np.abs(w.rot[i] @ w.rot[i].T - np.eye(3)))
        assert err < 1e-6
        assert abs(np.linalg.det(w.rot[i]) - 1.0) < 1e-6


# ---- injury -----------------------------------------------------------------

def test_compute_injury_empty():
    assert compute_injury([]) == (0.0, 0.0)


def test_compute_injury_head_vs_hand_ratio():
    head = PART_NAMES.index("head")
    hand = PART_NAMES.index("r_hand")
    e1 = ContactEvent("player_player", 0, head, 1, hand, 100.0, (0, 0, 0))
    d = compute_injury([e1])
    assert d[0] / d[1] == pytest.approx(2.5 / 0.5)
    assert d[0] == pytest.approx(5.0 * d[1])


def test_compute_injury_torso_formula():
    chest = PART_NAMES.index("chest")
    hand = PART_NAMES.index("l_hand")
    e = ContactEvent("player_player", 1, chest, 0, hand, 100.0, (0, 0, 0))
    d = compute_injury([e])
    assert d[1] == pytest.approx(150.0)  # multiplier 1.5 * impulse 100 * scale 1
    assert d[0] == pytest.approx(50.0)


def test_ground_contact_no_injury():
    e = ContactEvent("player_ground", 0, 4, None, None, 500.0, (0, 0, 0))
    assert compute_injury([e]) == (0.0, 0.0)


# ---- dismemberment and grip ---------------------------------------------------

def test_explicit_sever_marks_detached():
    w = make_world(100.0)
    sever_joint(w, 0, 10)  # r_wrist
    assert not w.jintact[10]
    assert not w.attached[PART_NAMES.index("r_hand")]
    assert w.attached[PART_NAMES.index("r_tricep")]


def test_impulse_dismemberment_fires_on_hard_hit():
    w = make_world(90.0, seed=3)
    w.vel[:21, 0] = 250.0
    dis = []
    for _ in range(90):
        w, ev = step_frame(w)
        dis += ev.dismemberments
    assert dis


def test_dismemberment_toggle():
    w = make_world(90.0, seed=3, dismemberment_enabled=False)
    w.vel[:21, 0] = 250.0
    for _ in range(90):
        w, ev = step_frame(w)
        assert ev.dismemberments == []
    assert np.all(w.jintact)


def test_severed_mode_changes_ignored_but_grips_kept():
    w = make_world(90.0, seed=1)
    sever_joint(w, 0, 10)  # r_wrist
    act = all_hold_action()
    act[20] = 1  # right grip
    set_joint_modes(w, 0, act)
    assert w.gmode[0] == 1  # severed hand still controls its grip


def test_grip_attaches_on_contact_and_releases():
    w = make_world(90.0, seed=1)
    grip = np.array([1] * 20 + [1, 1])
    grip[4] = 3
    grip[5] = 3  # swing both arms forward
    set_joint_modes(w, 0, grip)
    set_joint_modes(w, 1, grip)
    for _ in range(300):
        w, _ = step_frame(w)
        if np.any(w.gactive):
            break
    assert np.any(w.gactive)
    release = all_hold_action()
    set_joint_modes(w, 0, release)
    set_joint_modes(w, 1, release)
    assert not np.any(w.gactive)
