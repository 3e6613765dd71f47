"""The line-oriented control protocol: message types and codec.

Every message is one ASCII line of space-separated fields, newline
terminated.  Floats are rendered as the shortest decimal string that parses
back to the identical binary64 value (``repr``), so encode -> decode is
bit-exact.  The full grammar is documented in docs/protocol.md.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

PROTOCOL_VERSION = 1

# per-player State block: 63 positions + 63 velocities + 9 groin rotation
# + 20 joint modes + 2 grips + 1 injury
PLAYER_BLOCK_FIELDS = 63 + 63 + 9 + 20 + 2 + 1
STATE_FIELDS = 3 + 2 * PLAYER_BLOCK_FIELDS + 1  # header + players + winner

_NAME_RE = re.compile(r"^[A-Za-z0-9._-]+$")
_CODE_RE = re.compile(r"^[a-z][a-z0-9-]*$")


class ProtocolError(ValueError):
    pass


class MalformedTag(ProtocolError):
    def __init__(self, tag: str):
        super().__init__(f"unknown message tag {tag!r}")
        self.tag = tag


class FieldCountError(ProtocolError):
    def __init__(self, tag: str, expected: str, got: int):
        super().__init__(f"{tag}: expected {expected} fields, got {got}")
        self.expected = expected
        self.got = got


class RangeError(ProtocolError):
    def __init__(self, field: str, value):
        super().__init__(f"field {field}: value {value!r} out of range")
        self.field = field


class FloatParseError(ProtocolError):
    def __init__(self, field: str, value: str):
        super().__init__(f"field {field}: cannot parse float {value!r}")
        self.field = field


@dataclass(frozen=True)
class Hello:
    version: int


@dataclass(frozen=True)
class Ok:
    pass


@dataclass(frozen=True)
class Err:
    code: str
    text: str


@dataclass(frozen=True)
class NewGame:
    settings: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class Reset:
    settings: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class PlayerBlock:
    positions: tuple[float, ...]       # 63, part-id order x,y,z
    velocities: tuple[float, ...]      # 63
    groin_rotation: tuple[float, ...]  # 9, row-major
    joint_modes: tuple[int, ...]       # 20, values 1..4
    grips: tuple[int, ...]             # 2, values 1..2
    injury: float


@dataclass(frozen=True)
class State:
    terminal: bool
    frames_played: int
    next_turnframes: int
    players: tuple[PlayerBlock, PlayerBlock]
    winner: int  # 0 none, 1 player1, 2 player2, 3 draw


@dataclass(frozen=True)
class Act:
    player: int
    entries: tuple[int, ...] | None  # None means "-": delegate to builtin


@dataclass(frozen=True)
class Step:
    pass


@dataclass(frozen=True)
class ReplaySave:
    name: str


@dataclass(frozen=True)
class ReplayLoad:
    name: str


@dataclass(frozen=True)
class Frame:
    frame_index: int
    players: tuple[PlayerBlock, PlayerBlock]


@dataclass(frozen=True)
class Quit:
    pass


Message = (
    Hello | Ok | Err | NewGame | Reset | State | Act | Step
    | ReplaySave | ReplayLoad | Frame | Quit
)


def _fmt_float(x: float, field: str) -> str:
    if not math.isfinite(x):
        raise RangeError(field, x)
    return repr(float(x))


def _block_fields(b: PlayerBlock, who: str) -> list[str]:
    if len(b.positions) != 63:
        raise RangeError(f"{who}.positions", len(b.positions))
    if len(b.velocities) != 63:
        raise RangeError(f"{who}.velocities", len(b.velocities))
    if len(b.groin_rotation) != 9:
        raise RangeError(f"{who}.groin_rotation", len(b.groin_rotation))
    if len(b.joint_modes) != 20:
        raise RangeError(f"{who}.joint_modes", len(b.joint_modes))
    if len(b.grips) != 2:
        raise RangeError(f"{who}.grips", len(b.grips))
    out = [_fmt_float(x, who) for x in b.positions]
    out += [_fmt_float(x, who) for x in b.velocities]
    out += [_fmt_float(x, who) for x in b.groin_rotation]
    for m in b.joint_modes:
        if not 1 <= m <= 4:
            raise RangeError(f"{who}.joint_modes", m)
        out.append(str(int(m)))
    for g in b.grips:
        if not 1 <= g <= 2:
            raise RangeError(f"{who}.grips", g)
        out.append(str(int(g)))
    out.append(_fmt_float(b.injury, f"{who}.injury"))
    return out


def encode_message(m: Message) -> str:
    """One newline-terminated line for a valid message."""
    if isinstance(m, Hello):
        return f"HELLO {int(m.version)}\n"
    if isinstance(m, Ok):
        return "OK\n"
    if isinstance(m, Err):
        if not _CODE_RE.match(m.code):
            raise RangeError("code", m.code)
        if not m.text or "\n" in m.text:
            raise RangeError("text", m.text)
        return f"ERR {m.code} {m.text}\n"
    if isinstance(m, (NewGame, Reset)):
        tag = "NEWGAME" if isinstance(m, NewGame) else "RESET"
        parts = [tag]
        for k, v in m.settings:
            if not _NAME_RE.match(k) or " " in v or not v:
                raise RangeError("settings", f"{k}={v}")
            parts.append(f"{k}={v}")
        return " ".join(parts) + "\n"
    if isinstance(m, State):
        fields = ["STATE", str(int(m.terminal)), str(int(m.frames_played)),
                  str(int(m.next_turnframes))]
        fields += _block_fields(m.players[0], "p0")
        fields += _block_fields(m.players[1], "p1")
        if not 0 <= m.winner <= 3:
            raise RangeError("winner", m.winner)
        fields.append(str(int(m.winner)))
        return " ".join(fields) + "\n"
    if isinstance(m, Act):
        if m.player not in (0, 1):
            raise RangeError("player", m.player)
        if m.entries is None:
            return f"ACT {m.player} -\n"
        if len(m.entries) != 22:
            raise RangeError("entries", len(m.entries))
        for i, e in enumerate(m.entries):
            hi = 4 if i < 20 else 2
            if not 1 <= e <= hi:
                raise RangeError(f"entries[{i}]", e)
        return f"ACT {m.player} " + " ".join(str(int(e)) for e in m.entries) + "\n"
    if isinstance(m, Step):
        return "STEP\n"
    if isinstance(m, ReplaySave):
        if not _NAME_RE.match(m.name):
            raise RangeError("name", m.name)
        return f"REPLAYSAVE {m.name}\n"
    if isinstance(m, ReplayLoad):
        if not _NAME_RE.match(m.name):
            raise RangeError("name", m.name)
        return f"REPLAYLOAD {m.name}\n"
    if isinstance(m, Frame):
        fields = ["FRAME", str(int(m.frame_index))]
        fields += _block_fields(m.players[0], "p0")
        fields += _block_fields(m.players[1], "p1")
        return " ".join(fields) + "\n"
    if isinstance(m, Quit):
        return "QUIT\n"
    raise TypeError(f"not a protocol message: {m!r}")


def _parse_int(tok: str, field: str, lo: int | None = None, hi: int | None = None) -> int:
    try:
        v = int(tok)
    except ValueError:
        raise RangeError(field, tok) from None
    if (lo is not None and v < lo) or (hi is not None and v > hi):
        raise RangeError(field, v)
    return v


def _parse_float(tok: str, field: str) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise FloatParseError(field, tok) from None
    if not math.isfinite(v):
        raise RangeError(field, tok)
    return v


def _parse_block(fields: list[str], base: int, who: str) -> PlayerBlock:
    i = base
    positions = tuple(_parse_float(fields[i + k], f"{who}.positions[{k}]") for k in range(63))
    i += 63
    velocities = tuple(_parse_float(fields[i + k], f"{who}.velocities[{k}]") for k in range(63))
    i += 63
    rotation = tuple(_parse_float(fields[i + k], f"{who}.groin_rotation[{k}]") for k in range(9))
    i += 9
    modes = tuple(_parse_int(fields[i + k], f"{who}.joint_modes[{k}]", 1, 4) for k in range(20))
    i += 20
    grips = tuple(_parse_int(fields[i + k], f"{who}.grips[{k}]", 1, 2) for k in range(2))
    i += 2
    injury = _parse_float(fields[i], f"{who}.injury")
    return PlayerBlock(positions, velocities, rotation, modes, grips, injury)


def _parse_settings(fields: list[str], tag: str) -> tuple[tuple[str, str], ...]:
    out = []
    for tok in fields:
        key, sep, value = tok.partition("=")
        if not sep or not key or not value or not _NAME_RE.match(key):
            raise RangeError(f"{tag} settings", tok)
        out.append((key, value))
    return tuple(out)


def decode_message(line: str) -> Message:
    """Strict inverse of encode_message."""
    line = line.rstrip("\n")
    if not line or line != line.strip() or "  " in line:
        raise MalformedTag(line[:16])
    fields = line.split(" ")
    tag = fields[0]
    args = fields[1:]
    n = len(args)
    if tag == "HELLO":
        if n != 1:
            raise FieldCountError(tag, "1", n)
        return Hello(_parse_int(args[0], "version", 0))
    if tag == "OK":
        if n != 0:
            raise FieldCountError(tag, "0", n)
        return Ok()
    if tag == "ERR":
        if n < 2:
            raise FieldCountError(tag, ">=2", n)
        if not _CODE_RE.match(args[0]):
            raise RangeError("code", args[0])
        return Err(args[0], " ".join(args[1:]))
    if tag == "NEWGAME":
        return NewGame(_parse_settings(args, tag))
    if tag == "RESET":
        return Reset(_parse_settings(args, tag))
    if tag == "STATE":
        if n != STATE_FIELDS:
            raise FieldCountError(tag, str(STATE_FIELDS), n)
        terminal = _parse_int(args[0], "terminal", 0, 1)
        frames = _parse_int(args[1], "frames_played", 0)
        ntf = _parse_int(args[2], "next_turnframes", 1)
        p0 = _parse_block(args, 3, "p0")
        p1 = _parse_block(args, 3 + PLAYER_BLOCK_FIELDS, "p1")
        winner = _parse_int(args[3 + 2 * PLAYER_BLOCK_FIELDS], "winner", 0, 3)
        return State(bool(terminal), frames, ntf, (p0, p1), winner)
    if tag == "ACT":
        if n == 2 and args[1] == "-":
            return Act(_parse_int(args[0], "player", 0, 1), None)
        if n != 23:
            raise FieldCountError(tag, "23 (player + 22 entries) or 2 (player + '-')", n)
        player = _parse_int(args[0], "player", 0, 1)
        entries = tuple(
            _parse_int(args[1 + i], f"entries[{i}]", 1, 4 if i < 20 else 2)
            for i in range(22)
        )
        return Act(player, entries)
    if tag == "STEP":
        if n != 0:
            raise FieldCountError(tag, "0", n)
        return Step()
    if tag == "REPLAYSAVE" or tag == "REPLAYLOAD":
        if n != 1:
            raise FieldCountError(tag, "1", n)
        if not _NAME_RE.match(args[0]):
            raise RangeError("name", args[0])
        return ReplaySave(args[0]) if tag == "REPLAYSAVE" else ReplayLoad(args[0])
    if tag == "FRAME":
        expected = 1 + 2 * PLAYER_BLOCK_FIELDS
        if n != expected:
            raise FieldCountError(tag, str(expected), n)
        idx = _parse_int(args[0], "frame_index", 0)
        p0 = _parse_block(args, 1, "p0")
        p1 = _parse_block(args, 1 + PLAYER_BLOCK_FIELDS, "p1")
        return Frame(idx, (p0, p1))
    if tag == "QUIT":
        if n != 0:
            raise FieldCountError(tag, "0", n)
        return Quit()
    raise MalformedTag(tag)
