"""Cross-implementation check: this client's observation normalization must
match the reference client to 1e-12 on a shared replay fixture."""
import numpy as np

from kumite_pyclient import normalize_observation as py_normalize
from kumite_pyclient import parse_frame_line

from conftest import DATA


def test_observation_vectors_match_reference_to_1e12():
    from kumite.env import normalize_observation as ref_normalize
    from kumite.proto import decode_message
    from kumite.env.observations import GameState as RefGameState, PlayerState as RefPlayer

    lines = (DATA / "fixture_frames.txt").read_text().splitlines()
    assert len(lines) >= 100
    for line in lines:
        _, gs = parse_frame_line(line + "\n")
        frame = decode_message(line + "\n")
        ref_players = tuple(
            RefPlayer(
                positions=np.array(b.positions).reshape(21, 3),
                velocities=np.array(b.velocities).reshape(21, 3),
                groin_rotation=np.array(b.groin_rotation).reshape(3, 3),
                joint_modes=np.array(b.joint_modes, dtype=np.int64),
                grips=np.array(b.grips, dtype=np.int64),
                injury=b.injury,
            )
            for b in frame.players
        )
        ref_gs = RefGameState(ref_players, False, 0, frame.frame_index, 10)
        for vp in (0, 1):
            mine = py_normalize(gs, vp)
            assert mine.shape == (126,)
            ref = ref_normalize(ref_gs, vp).relative_positions
            np.testing.assert_allclose(mine, ref, atol=1e-12, rtol=0)


def test_extras_match_reference_to_1e12():
    from kumite.env import normalize_observation as ref_normalize
    from kumite.proto import decode_message
    from kumite.env.observations import GameState as RefGameState, PlayerState as RefPlayer

    line = (DATA / "fixture_frames.txt").read_text().splitlines()[50]
    _, gs = parse_frame_line(line + "\n")
    frame = decode_message(line + "\n")
    ref_players = tuple(
        RefPlayer(
            positions=np.array(b.positions).reshape(21, 3),
            velocities=np.array(b.velocities).reshape(21, 3),
            groin_rotation=np.array(b.groin_rotation).reshape(3, 3),
            joint_modes=np.array(b.joint_modes, dtype=np.int64),
            grips=np.array(b.grips, dtype=np.int64),
            injury=b.injury,
        )
        for b in frame.players
    )
    gs = type(gs)(players=gs.players, terminal=False, winner=0,
                  frames_played=frame.frame_index, next_turnframes=10)
    ref_gs = RefGameState(ref_players, False, 0, frame.frame_index, 10)
    mine = py_normalize(gs, 0, include_extras=True, matchframes=500)
    ref = ref_normalize(ref_gs, 0, include_extras=True, matchframes=500).concat()
    np.testing.assert_allclose(mine, ref, atol=1e-12, rtol=0)
