"""Replay files: versioned, length-prefixed binary with little-endian f64.

Layout (all integers little-endian; full field-by-field description in
docs/replay-format.md):

    magic "KMRP" | u32 version | u64 payload_length | payload

    payload = header | u32 n_turns | turn* | u32 n_frames | frame*
    header  = u32 matchframes | u32 schedule_len | u32*schedule
            | f64 engagement_distance | f64 dojo_radius
            | u8 dq | u8 dismemberment | f64*3 gravity | i64 seed
            | u16 name_len | name bytes (utf-8)
    turn    = u32 start_frame | 22*u8 action_p0 | 22*u8 action_p1
    frame   = u32 record_length | u32 frame_index
            | f64*126 pos | f64*126 vel | f64*378 rot
            | u8*44 modes | f64*2 injuries
            | u32 n_contacts | u32 n_ground
            | contact* (i16 a | i16 b | f64 impulse | f64*3 point)
            | u16 n_dismember | (u8 player, u8 joint)*

Saving a loaded replay reproduces the input bytes exactly.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from ..physics.engine import FrameEvents
from .rules import FrameRecord, MatchSettings, MatchState, new_match, submit_actions

MAGIC = b"KMRP"
VERSION = 1


class ReplayError(ValueError):
    pass


class ReplayParseError(ReplayError):
    def __init__(self, offset: int, message: str):
        super().__init__(f"replay parse error at byte {offset}: {message}")
        self.offset = offset


class ReplayVersionError(ReplayError):
    def __init__(self, got: int):
        super().__init__(f"unsupported replay version {got} (expected {VERSION})")
        self.got = got


@dataclass
class Replay:
    settings: MatchSettings
    version: int
    turns: list[tuple[int, np.ndarray, np.ndarray]]
    frames: list[FrameRecord]

    def __len__(self) -> int:
        return len(self.frames)


def record_replay(match: MatchState) -> Replay:
    """Build a Replay from a recorded match."""
    if not match.recording:
        raise ReplayError("match was not recording (set replay_name or record=True)")
    return Replay(
        settings=match.settings,
        version=VERSION,
        turns=list(match.turn_log),
        frames=list(match.frame_records),
    )


def playback_step(replay: Replay, cursor: int) -> FrameRecord:
    """Frame snapshot at ``cursor`` without re-simulation."""
    if not 0 <= cursor < len(replay.frames):
        raise IndexError(f"cursor {cursor} out of range 0..{len(replay.frames) - 1}")
    return replay.frames[cursor]


# ---- serialization -----------------------------------------------------------

def _pack_header(s: MatchSettings) -> bytes:
    name = (s.replay_name or "").encode("utf-8")
    out = [struct.pack("<II", s.matchframes, len(s.turnframes_schedule))]
    out.append(struct.pack(f"<{len(s.turnframes_schedule)}I", *s.turnframes_schedule))
    out.append(struct.pack("<dd", s.engagement_distance, s.dojo_radius))
    out.append(struct.pack("<BB", int(s.dq_enabled), int(s.dismemberment_enabled)))
    out.append(struct.pack("<3d", *s.gravity))
    out.append(struct.pack("<q", s.seed))
    out.append(struct.pack("<H", len(name)))
    out.append(name)
    return b"".join(out)


def _pack_frame(fr: FrameRecord) -> bytes:
    ev = fr.events
    n_con = ev.contact_a.shape[0]
    body = [struct.pack("<I", fr.frame_index)]
    body.append(np.ascontiguousarray(fr.pos, dtype="<f8").tobytes())
    body.append(np.ascontiguousarray(fr.vel, dtype="<f8").tobytes())
    body.append(np.ascontiguousarray(fr.rot, dtype="<f8").tobytes())
    body.append(np.ascontiguousarray(fr.modes, dtype="<u1").tobytes())
    body.append(struct.pack("<dd", *fr.injuries))
    body.append(struct.pack("<II", n_con, ev.n_ground))
    for i in range(n_con):
        body.append(struct.pack(
            "<hhd3d",
            int(ev.contact_a[i]), int(ev.contact_b[i]),
            float(ev.contact_impulse[i]),
            float(ev.contact_point[i, 0]), float(ev.contact_point[i, 1]),
            float(ev.contact_point[i, 2]),
        ))
    body.append(struct.pack("<H", len(ev.dismemberments)))
    for player, joint in ev.dismemberments:
        body.append(struct.pack("<BB", player, joint))
    blob = b"".join(body)
    return struct.pack("<I", len(blob)) + blob


def save_replay(replay: Replay, sink) -> None:
    """Write to a binary file object or a path."""
    payload = [_pack_header(replay.settings)]
    payload.append(struct.pack("<I", len(replay.turns)))
    for start_frame, a1, a2 in replay.turns:
        payload.append(struct.pack("<I", start_frame))
        payload.append(np.ascontiguousarray(a1, dtype="<u1").tobytes())
        payload.append(np.ascontiguousarray(a2, dtype="<u1").tobytes())
    payload.append(struct.pack("<I", len(replay.frames)))
    for fr in replay.frames:
        payload.append(_pack_frame(fr))
    blob = b"".join(payload)
    data = MAGIC + struct.pack("<I", replay.version) + struct.pack("<Q", len(blob)) + blob
    if hasattr(sink, "write"):
        sink.write(data)
    else:
        with open(sink, "wb") as fh:
            fh.write(data)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.off = 0

    def take(self, n: int, what: str) -> bytes:
        if self.off + n > len(self.data):
            raise ReplayParseError(self.off, f"truncated while reading {what}")
        out = self.data[self.off:self.off + n]
        self.off += n
        return out

    def unpack(self, fmt: str, what: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def load_replay(source) -> Replay:
    """Read from a binary file object, a path, or bytes."""
    if isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    elif hasattr(source, "read"):
        data = source.read()
    else:
        with open(source, "rb") as fh:
            data = fh.read()

    r = _Reader(data)
    magic = r.take(4, "magic")
    if magic != MAGIC:
        raise ReplayParseError(0, f"bad magic {magic!r}")
    (version,) = r.unpack("<I", "version")
    if version != VERSION:
        raise ReplayVersionError(version)
    (payload_len,) = r.unpack("<Q", "payload length")
    if len(data) - r.off != payload_len:
        raise ReplayParseError(r.off, f"payload length mismatch: header says {payload_len}, got {len(data) - r.off}")

    matchframes, sched_len = r.unpack("<II", "header")
    schedule = r.unpack(f"<{sched_len}I", "schedule")
    engagement, dojo = r.unpack("<dd", "distances")
    dq, dismember = r.unpack("<BB", "flags")
    gravity = r.unpack("<3d", "gravity")
    (seed,) = r.unpack("<q", "seed")
    (name_len,) = r.unpack("<H", "name length")
    name = r.take(name_len, "name").decode("utf-8") if name_len else None
    settings = MatchSettings(
        matchframes=matchframes, turnframes_schedule=tuple(schedule),
        engagement_distance=engagement, dojo_radius=dojo,
        dq_enabled=bool(dq), dismemberment_enabled=bool(dismember),
        gravity=gravity, seed=seed, replay_name=name,
    )

    (n_turns,) = r.unpack("<I", "turn count")
    turns = []
    for _ in range(n_turns):
        (start,) = r.unpack("<I", "turn start frame")
        a1 = np.frombuffer(r.take(22, "action p0"), dtype="<u1").astype(np.int64)
        a2 = np.frombuffer(r.take(22, "action p1"), dtype="<u1").astype(np.int64)
        turns.append((start, a1, a2))

    (n_frames,) = r.unpack("<I", "frame count")
    frames = []
    for _ in range(n_frames):
        (rec_len,) = r.unpack("<I", "frame record length")
        end = r.off + rec_len
        (frame_index,) = r.unpack("<I", "frame index")
        pos = np.frombuffer(r.take(126 * 8, "positions"), dtype="<f8").reshape(42, 3).copy()
        vel = np.frombuffer(r.take(126 * 8, "velocities"), dtype="<f8").reshape(42, 3).copy()
        rot = np.frombuffer(r.take(378 * 8, "orientations"), dtype="<f8").reshape(42, 3, 3).copy()
        modes = np.frombuffer(r.take(44, "modes"), dtype="<u1").reshape(2, 22).astype(np.int64)
        injuries = r.unpack("<dd", "injuries")
        n_con, n_ground = r.unpack("<II", "contact counts")
        ca = np.empty(n_con, dtype=np.int64)
        cb = np.empty(n_con, dtype=np.int64)
        cimp = np.empty(n_con)
        cpoint = np.empty((n_con, 3))
        for i in range(n_con):
            a, b, imp, px, py, pz = r.unpack("<hhd3d", "contact")
            ca[i] = a
            cb[i] = b
            cimp[i] = imp
            cpoint[i] = (px, py, pz)
        (n_dis,) = r.unpack("<H", "dismember count")
        dis = []
        for _ in range(n_dis):
            player, joint = r.unpack("<BB", "dismemberment")
            dis.append((player, joint))
        if r.off != end:
            raise ReplayParseError(r.off, f"frame record length mismatch (expected end {end})")
        d0, d1 = _recompute_deltas(ca, cb, cimp, n_ground)
        frames.append(FrameRecord(
            frame_index=frame_index, pos=pos, vel=vel, rot=rot, modes=modes,
            injuries=injuries,
            events=FrameEvents(
                contact_a=ca, contact_b=cb, contact_impulse=cimp,
                contact_point=cpoint, injury_deltas=(d0, d1),
                dismemberments=dis, n_ground=n_ground,
            ),
        ))
    if r.off != len(data):
        raise ReplayParseError(r.off, "trailing bytes")
    return Replay(settings=settings, version=version, turns=turns, frames=frames)


def _recompute_deltas(ca, cb, cimp, n_ground):
    from ..physics.bodydef import default_model
    from ..physics.engine import _injury_from_arrays

    if ca.shape[0] == n_ground:
        return 0.0, 0.0
    mult = default_model().injury_mult
    mult2 = np.concatenate([mult, mult])
    return _injury_from_arrays(ca[n_ground:], cb[n_ground:], cimp[n_ground:], mult2)


def resimulate(replay: Replay) -> list[FrameRecord]:
    """Re-run the match from the header settings and logged actions; the
    result matches the recorded frames bitwise."""
    match = new_match(replay.settings, record=True)
    for _, a1, a2 in replay.turns:
        if match.terminal:
            break
        match, _ = submit_actions(match, a1, a2)
    return match.frame_records


def frames_equal(a: FrameRecord, b: FrameRecord) -> bool:
    return (
        a.frame_index == b.frame_index
        and np.array_equal(a.pos, b.pos)
        and np.array_equal(a.vel, b.vel)
        and np.array_equal(a.rot, b.rot)
        and np.array_equal(a.modes, b.modes)
        and a.injuries == b.injuries
        and np.array_equal(a.events.contact_a, b.events.contact_a)
        and np.array_equal(a.events.contact_b, b.events.contact_b)
        and np.array_equal(a.events.contact_impulse, b.events.contact_impulse)
        and a.events.dismemberments == b.events.dismemberments
    )
