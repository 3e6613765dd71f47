import io

import numpy as np
import pytest

from kumite.match import (
    MatchSettings,
    ReplayParseError,
    ReplayVersionError,
    frames_equal,
    load_replay,
    new_match,
    playback_step,
    record_replay,
    resimulate,
    save_replay,
    submit_actions,
)


def rand_action(rng):
    return np.concatenate([rng.integers(1, 5, 20), rng.integers(1, 3, 2)])


def play_random_match(settings, seed):
    m = new_match(settings, record=True)
    rng = np.random.default_rng(seed)
    while not m.terminal:
        m, _ = submit_actions(m, rand_action(rng), rand_action(rng))
    return m


def test_save_load_roundtrip_bitwise():
    s = MatchSettings(matchframes=200, turnframes_schedule=(10,),
                      engagement_distance=110.0, seed=7, replay_name="rt")
    m = play_random_match(s, 7)
    rep = record_replay(m)
    buf = io.BytesIO()
    save_replay(rep, buf)
    blob = buf.getvalue()
    loaded = load_replay(blob)
    buf2 = io.BytesIO()
    save_replay(loaded, buf2)
    assert buf2.getvalue() == blob
    assert len(loaded) == len(rep)
    for a, b in zip(rep.frames, loaded.frames):
        assert frames_equal(a, b)


def test_playback_matches_recorded_frames():
    s = MatchSettings(matchframes=100, turnframes_schedule=(10,), seed=1,
                      engagement_distance=130.0, replay_name="pb")
    m = play_random_match(s, 1)
    rep = record_replay(m)
    for i in range(len(rep)):
        fr = playback_step(rep, i)
        assert fr.frame_index == i + 1
    with pytest.raises(IndexError):
        playback_step(rep, len(rep))


def test_resimulation_reproduces_frames_bitwise():
    s = MatchSettings(matchframes=300, turnframes_schedule=(10,),
                      engagement_distance=100.0, seed=9, replay_name="sim")
    m = play_random_match(s, 9)
    rep = record_replay(m)
    redo = resimulate(rep)
    assert len(redo) == len(rep.frames)
    for a, b in zip(rep.frames, redo):
        assert frames_equal(a, b)


def test_load_empty_input_is_parse_error():
    with pytest.raises(ReplayParseError):
        load_replay(b"")


def test_load_truncated_is_parse_error_with_offset():
    s = MatchSettings(matchframes=20, turnframes_schedule=(10,), replay_name="x")
    m = play_random_match(s, 3)
    buf = io.BytesIO()
    save_replay(record_replay(m), buf)
    blob = buf.getvalue()
    with pytest.raises(ReplayParseError) as ei:
        load_replay(blob[:len(blob) // 2])
    assert ei.value.offset >= 0


def test_version_mismatch_is_version_error():
    s = MatchSettings(matchframes=10, turnframes_schedule=(10,), replay_name="v")
    m = play_random_match(s, 2)
    buf = io.BytesIO()
    save_replay(record_replay(m), buf)
    blob = bytearray(buf.getvalue())
    blob[4] = 99  # bump version field
    with pytest.raises(ReplayVersionError):
        load_replay(bytes(blob))


def test_dq_replay_ends_at_dq_frame():
    s = MatchSettings(matchframes=1000, turnframes_schedule=(10,),
                      dq_enabled=True, dojo_radius=500.0,
                      engagement_distance=600.0, replay_name="dq")
    m = new_match(s, record=True)
    relax = np.array([2] * 22)
    while not m.terminal:
        m, _ = submit_actions(m, relax, relax)
    rep = record_replay(m)
    assert len(rep) == m.frames_played
    assert len(rep) < 1000
    assert rep.frames[-1].frame_index == m.frames_played
