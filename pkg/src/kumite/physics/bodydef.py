"""Canonical skeleton: part/joint naming, the character definition file, and
the compiled arrays the solver kernel runs on.

A character is 21 sphere parts linked by 20 single-axis joints in a tree
rooted at the groin.  The shipped ``default.char`` file is the authoritative
geometry for everything else in the package.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from importlib import resources

import numpy as np

DT = 1.0 / 60.0
GRAVITY_DEFAULT = (0.0, 0.0, -30.0)

INJURY_SCALE = 1.0
# Damage weight per struck part: head hits hurt the most, torso next, limbs
# baseline, extremities least.
INJURY_MULTIPLIERS = {
    "head": 2.5,
    "breast": 1.5,
    "chest": 1.5,
    "stomach": 1.5,
    "groin": 1.5,
    "pec": 1.0,
    "bicep": 1.0,
    "tricep": 1.0,
    "thigh": 1.0,
    "leg": 1.0,
    "hand": 0.5,
    "foot": 0.5,
    "butt": 0.5,
}


class JointMode(IntEnum):
    HOLD = 1
    RELAX = 2
    EXTEND = 3
    CONTRACT = 4


class GripMode(IntEnum):
    GRIP = 1
    RELEASE = 2


PART_NAMES = (
    "head", "breast", "chest", "stomach", "groin",
    "r_pec", "l_pec", "r_bicep", "l_bicep", "r_tricep", "l_tricep",
    "r_hand", "l_hand", "r_butt", "l_butt", "r_thigh", "l_thigh",
    "r_leg", "l_leg", "r_foot", "l_foot",
)

JOINT_NAMES = (
    "neck", "chest", "lumbar", "abs",
    "r_pec", "l_pec", "r_shoulder", "l_shoulder", "r_elbow", "l_elbow",
    "r_wrist", "l_wrist", "r_glute", "l_glute", "r_hip", "l_hip",
    "r_knee", "l_knee", "r_ankle", "l_ankle",
)

N_PARTS = len(PART_NAMES)
N_JOINTS = len(JOINT_NAMES)
N_ACTION = N_JOINTS + 2  # 20 joints + right grip + left grip

HAND_PART_IDS = (PART_NAMES.index("r_hand"), PART_NAMES.index("l_hand"))
FOOT_PART_IDS = (PART_NAMES.index("r_foot"), PART_NAMES.index("l_foot"))
GROIN_PART_ID = PART_NAMES.index("groin")


def _lr_twin(name: str) -> str:
    if name.startswith("r_"):
        return "l_" + name[2:]
    if name.startswith("l_"):
        return "r_" + name[2:]
    return name


PART_LR_SWAP = np.array(
    [PART_NAMES.index(_lr_twin(n)) for n in PART_NAMES], dtype=np.int64
)
JOINT_LR_SWAP = np.array(
    [JOINT_NAMES.index(_lr_twin(n)) for n in JOINT_NAMES], dtype=np.int64
)


class CharacterFileError(ValueError):
    """Raised when a character definition file fails validation."""


@dataclass(frozen=True)
class PartDef:
    name: str
    offset: tuple[float, float, float]
    radius: float
    mass: float


@dataclass(frozen=True)
class JointDef:
    name: str
    parent: str
    child: str
    axis: tuple[float, float, float]
    limits: tuple[float, float]
    torque: float
    hold_spring: float
    dismember_threshold: float


def _parse_vec(text: str, field: str, n: int) -> tuple[float, ...]:
    pieces = text.split(",")
    if len(pieces) != n:
        raise CharacterFileError(f"{field}: expected {n} comma-separated numbers, got {text!r}")
    try:
        return tuple(float(p) for p in pieces)
    except ValueError as exc:
        raise CharacterFileError(f"{field}: {exc}") from None


def _parse_kv(tokens: list[str], line_no: int) -> dict[str, str]:
    out: dict[str, str] = {}
    for tok in tokens:
        if "=" not in tok:
            raise CharacterFileError(f"line {line_no}: expected key=value, got {tok!r}")
        key, _, value = tok.partition("=")
        if key in out:
            raise CharacterFileError(f"line {line_no}: duplicate key {key!r}")
        out[key] = value
    return out


def parse_character(text: str) -> tuple[list[PartDef], list[JointDef]]:
    """Parse and validate a character definition document."""
    parts: dict[str, PartDef] = {}
    joints: dict[str, JointDef] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        kind = tokens[0]
        if kind == "part":
            if len(tokens) < 2:
                raise CharacterFileError(f"line {line_no}: part needs a name")
            name = tokens[1]
            kv = _parse_kv(tokens[2:], line_no)
            missing = {"offset", "radius", "mass"} - kv.keys()
            if missing:
                raise CharacterFileError(f"part {name}: missing {sorted(missing)}")
            radius = float(kv["radius"])
            mass = float(kv["mass"])
            if radius <= 0:
                raise CharacterFileError(f"part {name}: radius must be > 0")
            if mass <= 0:
                raise CharacterFileError(f"part {name}: mass must be > 0")
            parts[name] = PartDef(name, _parse_vec(kv["offset"], f"part {name} offset", 3), radius, mass)
        elif kind == "joint":
            if len(tokens) < 2:
                raise CharacterFileError(f"line {line_no}: joint needs a name")
            name = tokens[1]
            kv = _parse_kv(tokens[2:], line_no)
            missing = {"parent", "child", "axis", "limits", "torque", "hold_spring", "dismember_threshold"} - kv.keys()
            if missing:
                raise CharacterFileError(f"joint {name}: missing {sorted(missing)}")
            lo, hi = _parse_vec(kv["limits"], f"joint {name} limits", 2)
            if lo > hi:
                raise CharacterFileError(f"joint {name}: limits lo > hi")
            axis = _parse_vec(kv["axis"], f"joint {name} axis", 3)
            norm = float(np.linalg.norm(axis))
            if norm == 0.0:
                raise CharacterFileError(f"joint {name}: axis must be nonzero")
            axis = tuple(a / norm for a in axis)
            joints[name] = JointDef(
                name, kv["parent"], kv["child"], axis, (lo, hi),
                float(kv["torque"]), float(kv["hold_spring"]), float(kv["dismember_threshold"]),
            )
        else:
            raise CharacterFileError(f"line {line_no}: unknown record {kind!r}")

    if set(parts) != set(PART_NAMES):
        raise CharacterFileError(
            f"part set mismatch: missing {sorted(set(PART_NAMES) - set(parts))}, "
            f"extra {sorted(set(parts) - set(PART_NAMES))}"
        )
    if set(joints) != set(JOINT_NAMES):
        raise CharacterFileError(
            f"joint set mismatch: missing {sorted(set(JOINT_NAMES) - set(joints))}, "
            f"extra {sorted(set(joints) - set(JOINT_NAMES))}"
        )
    for j in joints.values():
        if j.parent not in parts:
            raise CharacterFileError(f"joint {j.name}: unknown parent {j.parent!r}")
        if j.child not in parts:
            raise CharacterFileError(f"joint {j.name}: unknown child {j.child!r}")
        if j.parent == j.child:
            raise CharacterFileError(f"joint {j.name}: parent == child")

    _check_bilateral_symmetry(parts, joints)
    part_list = [parts[n] for n in PART_NAMES]
    joint_list = [joints[n] for n in JOINT_NAMES]
    _check_tree(joint_list)
    return part_list, joint_list


def _check_bilateral_symmetry(parts: dict[str, PartDef], joints: dict[str, JointDef]) -> None:
    # The simulator's mirror guarantees require the character file itself to
    # be bilaterally symmetric; reject files that are not.
    for name, part in parts.items():
        twin = parts[_lr_twin(name)]
        ox, oy, oz = part.offset
        if twin.offset != (ox, -oy, oz) or twin.radius != part.radius or twin.mass != part.mass:
            raise CharacterFileError(f"part {name}: not mirror-consistent with {twin.name}")
    for name, joint in joints.items():
        twin = joints[_lr_twin(name)]
        ax, ay, az = joint.axis
        if name == _lr_twin(name):
            if ax != 0.0 or az != 0.0:
                raise CharacterFileError(f"joint {name}: central joints must use a pure y axis")
            continue
        if twin.axis != (-ax, ay, -az):
            raise CharacterFileError(f"joint {name}: axis not mirror-consistent with {twin.name}")
        if (twin.limits, twin.torque, twin.hold_spring, twin.dismember_threshold) != (
            joint.limits, joint.torque, joint.hold_spring, joint.dismember_threshold
        ):
            raise CharacterFileError(f"joint {name}: parameters differ from {twin.name}")
        if (_lr_twin(joint.parent), _lr_twin(joint.child)) != (twin.parent, twin.child):
            raise CharacterFileError(f"joint {name}: connectivity differs from {twin.name}")


def _check_tree(joints: list[JointDef]) -> None:
    # Joints must form a tree rooted at the groin (every part except the
    # groin is the child of exactly one joint).
    children = [j.child for j in joints]
    if len(set(children)) != len(children):
        raise CharacterFileError("a part is the child of more than one joint")
    if set(children) != set(PART_NAMES) - {"groin"}:
        raise CharacterFileError("joints do not form a tree rooted at the groin")


def load_default_character() -> tuple[list[PartDef], list[JointDef]]:
    text = resources.files("kumite.physics").joinpath("default.char").read_text()
    return parse_character(text)


def body_layout() -> tuple[list[PartDef], list[JointDef]]:
    """The canonical skeleton: 21 part descriptors and 20 joint descriptors."""
    return load_default_character()


@dataclass(frozen=True)
class BodyModel:
    """Character geometry compiled to solver arrays (one character, the
    player-0 orientation convention: facing +x, right side at -y)."""

    parts: tuple[PartDef, ...]
    joints: tuple[JointDef, ...]
    offsets: np.ndarray          # (21,3) rest centers relative to the groin
    radius: np.ndarray           # (21,)
    mass: np.ndarray             # (21,)
    inv_mass: np.ndarray         # (21,)
    inv_inertia: np.ndarray      # (21,) solid-sphere, isotropic
    jparent: np.ndarray          # (20,) part ids
    jchild: np.ndarray           # (20,)
    jaxis: np.ndarray            # (20,3) unit axis in the parent frame
    juref: np.ndarray            # (20,3) twist reference, perpendicular to axis
    janchor_p: np.ndarray        # (20,3) anchor in parent frame
    janchor_c: np.ndarray        # (20,3) anchor in child frame
    jlo: np.ndarray              # (20,)
    jhi: np.ndarray              # (20,)
    jtorque: np.ndarray          # (20,)
    jspring: np.ndarray          # (20,)
    jthreshold: np.ndarray       # (20,)
    jtopo: np.ndarray            # (20,) joint ids ordered parents-first
    injury_mult: np.ndarray      # (21,)
    stand_height: float          # groin rest height with feet touching ground
    part_pair_id: np.ndarray     # (21,) min(id, lr(id)) for mirror grouping
    joint_groups: np.ndarray     # (12,4) joint-id groups (-1 padded), mirror orbits
    part_groups: np.ndarray      # (13,2) part-id groups (-1 padded)


def _perp_reference(axis: np.ndarray) -> np.ndarray:
    # Any unit vector perpendicular to the axis; picked from the coordinate
    # axis least aligned with it so the choice is stable.
    trial = np.zeros(3)
    trial[int(np.argmin(np.abs(axis)))] = 1.0
    u = trial - np.dot(trial, axis) * axis
    return u / np.linalg.norm(u)


def compile_body(parts: list[PartDef], joints: list[JointDef]) -> BodyModel:
    offsets = np.array([p.offset for p in parts], dtype=np.float64)
    radius = np.array([p.radius for p in parts], dtype=np.float64)
    mass = np.array([p.mass for p in parts], dtype=np.float64)
    inv_mass = 1.0 / mass
    inertia = 0.4 * mass * radius * radius
    inv_inertia = 1.0 / inertia

    name_to_id = {n: i for i, n in enumerate(PART_NAMES)}
    jparent = np.array([name_to_id[j.parent] for j in joints], dtype=np.int64)
    jchild = np.array([name_to_id[j.child] for j in joints], dtype=np.int64)
    jaxis = np.array([j.axis for j in joints], dtype=np.float64)
    juref = np.empty((N_JOINTS, 3))
    for i, j in enumerate(joints):
        ax = jaxis[i]
        u = _perp_reference(ax)
        name = j.name
        if name.startswith("l_"):
            # Twist references of l/r twins must mirror like the axes do so
            # the measured angles coincide for mirrored configurations.
            twin = JOINT_NAMES.index(_lr_twin(name))
            ur = _perp_reference(np.array(joints[twin].axis))
            u = np.array([-ur[0], ur[1], -ur[2]])
        juref[i] = u

    mid = (offsets[jchild] + offsets[jparent]) * 0.5
    janchor_p = mid - offsets[jparent]
    janchor_c = mid - offsets[jchild]

    jlo = np.array([j.limits[0] for j in joints])
    jhi = np.array([j.limits[1] for j in joints])
    jtorque = np.array([j.torque for j in joints])
    jspring = np.array([j.hold_spring for j in joints])
    jthreshold = np.array([j.dismember_threshold for j in joints])

    # Parents-first ordering for attachment propagation.
    depth = {GROIN_PART_ID: 0}
    remaining = list(range(N_JOINTS))
    topo: list[int] = []
    while remaining:
        progressed = False
        for j in list(remaining):
            if int(jparent[j]) in depth:
                depth[int(jchild[j])] = depth[int(jparent[j])] + 1
                topo.append(j)
                remaining.remove(j)
                progressed = True
        if not progressed:
            raise CharacterFileError("joint graph is not connected to the groin")
    jtopo = np.array(topo, dtype=np.int64)

    def _mult(name: str) -> float:
        return INJURY_MULTIPLIERS[name[2:] if name[1] == "_" else name]

    injury_mult = np.array([_mult(n) for n in PART_NAMES])

    stand_height = float(np.max(radius - offsets[:, 2]))

    part_pair_id = np.minimum(np.arange(N_PARTS), PART_LR_SWAP)

    # Mirror-orbit groups over both players (part/joint index + 21/20 for
    # player 1).  Joint groups: [p0.rJ, p0.lJ, p1.rJ, p1.lJ] or the central
    # [p0.J, p1.J] padded with -1.
    jgroups = []
    seen: set[int] = set()
    for j in range(N_JOINTS):
        if j in seen:
            continue
        twin = int(JOINT_LR_SWAP[j])
        seen.update({j, twin})
        if twin == j:
            jgroups.append([j, j + N_JOINTS, -1, -1])
        else:
            jgroups.append([j, twin, j + N_JOINTS, twin + N_JOINTS])
    joint_groups = np.array(jgroups, dtype=np.int64)

    pgroups = []
    pseen: set[int] = set()
    for p in range(N_PARTS):
        if p in pseen:
            continue
        twin = int(PART_LR_SWAP[p])
        pseen.update({p, twin})
        if twin == p:
            pgroups.append([p, -1])
        else:
            pgroups.append([p, twin])
    part_groups = np.array(pgroups, dtype=np.int64)

    return BodyModel(
        parts=tuple(parts), joints=tuple(joints),
        offsets=offsets, radius=radius, mass=mass, inv_mass=inv_mass,
        inv_inertia=inv_inertia, jparent=jparent, jchild=jchild, jaxis=jaxis,
        juref=juref, janchor_p=janchor_p, janchor_c=janchor_c,
        jlo=jlo, jhi=jhi, jtorque=jtorque, jspring=jspring,
        jthreshold=jthreshold, jtopo=jtopo, injury_mult=injury_mult,
        stand_height=stand_height, part_pair_id=part_pair_id,
        joint_groups=joint_groups, part_groups=part_groups,
    )


_DEFAULT_MODEL: BodyModel | None = None


def default_model() -> BodyModel:
    global _DEFAULT_MODEL
    if _DEFAULT_MODEL is None:
        _DEFAULT_MODEL = compile_body(*load_default_character())
    return _DEFAULT_MODEL
