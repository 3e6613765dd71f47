"""World state: construction, action application, mirroring, serialization.

A world holds two characters as flat arrays (player 0 parts are rows 0..20,
player 1 parts are rows 21..41).  Player 0 starts at x = -engagement/2 facing
+x, player 1 is its mirror image; the arena center is the origin, so the
mirror reflection below is an exact floating-point negation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import bodydef
from .bodydef import (
    BodyModel,
    DT,
    GROIN_PART_ID,
    GripMode,
    JointMode,
    N_ACTION,
    N_JOINTS,
    N_PARTS,
    PART_LR_SWAP,
    JOINT_LR_SWAP,
    PART_NAMES,
    JOINT_NAMES,
    default_model,
)
from . import kernels

MAX_CONTACTS = 2 * N_PARTS + N_PARTS * N_PARTS


class InvalidActionError(ValueError):
    """Malformed action: wrong length or out-of-range entry."""


class SimulationFault(RuntimeError):
    """Non-finite state detected; the world is frozen.  Always a bug."""


# Orientation sign masks for the mirror map (world x-reflection conjugated
# with the body-frame y-reflection).
_ROT_SIGNS = np.array(
    [[-1.0, 1.0, -1.0],
     [1.0, -1.0, 1.0],
     [1.0, -1.0, 1.0]]
)
_ANG_SIGNS = np.array([1.0, -1.0, -1.0])
_BODY_Y_FLIP = np.array([1.0, -1.0, 1.0])

# Grip slots: (player, hand part).  Slot k mirrors to slot 3-k.
GRIP_SLOT_HAND = np.array(
    [
        bodydef.HAND_PART_IDS[0],
        bodydef.HAND_PART_IDS[1],
        bodydef.HAND_PART_IDS[0] + N_PARTS,
        bodydef.HAND_PART_IDS[1] + N_PARTS,
    ],
    dtype=np.int64,
)


def _scratch(model: BodyModel) -> dict[str, np.ndarray]:
    m = 2 * N_JOINTS
    return {
        # constants tiled for both players (player-1 part ids offset by 21)
        "radius2": np.concatenate([model.radius, model.radius]),
        "invm2": np.concatenate([model.inv_mass, model.inv_mass]),
        "invi2": np.concatenate([model.inv_inertia, model.inv_inertia]),
        "jp": np.concatenate([model.jparent, model.jparent + N_PARTS]),
        "jc": np.concatenate([model.jchild, model.jchild + N_PARTS]),
        "jaxis2": np.concatenate([model.jaxis, model.jaxis]),
        "juref2": np.concatenate([model.juref, model.juref]),
        "jap": np.concatenate([model.janchor_p, model.janchor_p]),
        "jac": np.concatenate([model.janchor_c, model.janchor_c]),
        "jlo2": np.concatenate([model.jlo, model.jlo]),
        "jhi2": np.concatenate([model.jhi, model.jhi]),
        "jtorque2": np.concatenate([model.jtorque, model.jtorque]),
        "jspring2": np.concatenate([model.jspring, model.jspring]),
        "jthresh2": np.concatenate([model.jthreshold, model.jthreshold]),
        "mult2": np.concatenate([model.injury_mult, model.injury_mult]),
        "part_max": np.zeros(2 * N_PARTS),
        # per-frame solver scratch
        "jang": np.zeros(m),
        "rp": np.zeros((m, 3)),
        "rc": np.zeros((m, 3)),
        "ax": np.zeros((m, 3)),
        "cerr": np.zeros((m, 3)),
        "herr": np.zeros((m, 3)),
        "kinv": np.zeros((m, 3, 3)),
        "llo": np.zeros(m),
        "lhi": np.zeros(m),
        "gk": np.zeros((4, 3, 3)),
        "grp": np.zeros((4, 3)),
        "grc": np.zeros((4, 3)),
        "gcerr": np.zeros((4, 3)),
        "n": np.zeros((MAX_CONTACTS, 3)),
        "t1": np.zeros((MAX_CONTACTS, 3)),
        "t2": np.zeros((MAX_CONTACTS, 3)),
        "kn": np.zeros(MAX_CONTACTS),
        "kt": np.zeros((MAX_CONTACTS, 2)),
        "fr": np.zeros(MAX_CONTACTS, dtype=np.int64),
        "acc1": np.zeros(MAX_CONTACTS),
        "acc2": np.zeros(MAX_CONTACTS),
        "ra": np.zeros((MAX_CONTACTS, 3)),
        "rb": np.zeros((MAX_CONTACTS, 3)),
        "key": np.zeros(MAX_CONTACTS, dtype=np.int64),
        "c_a": np.zeros(MAX_CONTACTS, dtype=np.int64),
        "c_b": np.zeros(MAX_CONTACTS, dtype=np.int64),
        "c_imp": np.zeros(MAX_CONTACTS),
        "c_point": np.zeros((MAX_CONTACTS, 3)),
        "c_depth": np.zeros(MAX_CONTACTS),
    }


@dataclass
class WorldState:
    """Full physical state of both characters at one frame.

    Confined to one logical thread; never share mutably.
    """

    model: BodyModel
    pos: np.ndarray           # (42,3)
    vel: np.ndarray           # (42,3)
    rot: np.ndarray           # (42,3,3)
    angvel: np.ndarray        # (42,3)
    jmode: np.ndarray         # (40,) JointMode ints
    jlock: np.ndarray         # (40,) hold target angles
    jintact: np.ndarray       # (40,) bool
    gmode: np.ndarray         # (4,) GripMode ints, slots [p0.r, p0.l, p1.r, p1.l]
    gactive: np.ndarray       # (4,) bool
    gtarget: np.ndarray       # (4,) gripped part (global id) or -1
    ganchor_own: np.ndarray   # (4,3)
    ganchor_opp: np.ndarray   # (4,3)
    attached: np.ndarray      # (42,) bool
    injury: np.ndarray        # (2,)
    frame_index: int = 0
    gravity: tuple[float, float, float] = bodydef.GRAVITY_DEFAULT
    dt: float = DT
    ground_height: float = 0.0
    arena_center_x: float = 0.0
    rng_state: int = 0        # construction seed; the physics draws nothing
    dismemberment_enabled: bool = True
    fault: bool = False
    scratch: dict = field(default_factory=dict, repr=False)

    def copy(self) -> "WorldState":
        return WorldState(
            model=self.model,
            pos=self.pos.copy(), vel=self.vel.copy(), rot=self.rot.copy(),
            angvel=self.angvel.copy(), jmode=self.jmode.copy(),
            jlock=self.jlock.copy(), jintact=self.jintact.copy(),
            gmode=self.gmode.copy(), gactive=self.gactive.copy(),
            gtarget=self.gtarget.copy(), ganchor_own=self.ganchor_own.copy(),
            ganchor_opp=self.ganchor_opp.copy(), attached=self.attached.copy(),
            injury=self.injury.copy(), frame_index=self.frame_index,
            gravity=self.gravity, dt=self.dt, ground_height=self.ground_height,
            arena_center_x=self.arena_center_x, rng_state=self.rng_state,
            dismemberment_enabled=self.dismemberment_enabled, fault=self.fault,
            scratch=_scratch(self.model),
        )

    # --- typed views (convenience; the hot path works on the arrays) --------
    def part_view(self, player: int, part_id: int) -> "BodyPart":
        i = player * N_PARTS + part_id
        return BodyPart(
            id=part_id, name=PART_NAMES[part_id],
            position=self.pos[i].copy(), velocity=self.vel[i].copy(),
            orientation=self.rot[i].copy(), angular_velocity=self.angvel[i].copy(),
            radius=float(self.model.radius[part_id]),
            mass=float(self.model.mass[part_id]),
            attached=bool(self.attached[i]),
        )

    def joint_view(self, player: int, joint_id: int) -> "Joint":
        j = player * N_JOINTS + joint_id
        m = self.model
        return Joint(
            id=joint_id, name=JOINT_NAMES[joint_id],
            parent_part=int(m.jparent[joint_id]), child_part=int(m.jchild[joint_id]),
            axis=m.jaxis[joint_id].copy(), angle=float(self.joint_angles()[j]),
            mode=JointMode(int(self.jmode[j])),
            torque_magnitude=float(m.jtorque[joint_id]),
            angle_limits=(float(m.jlo[joint_id]), float(m.jhi[joint_id])),
            intact=bool(self.jintact[j]),
        )

    def character_view(self, player: int) -> "CharacterState":
        lo = 2 * player
        grips = (GripMode(int(self.gmode[lo])), GripMode(int(self.gmode[lo + 1])))
        attachments = set()
        for h in (lo, lo + 1):
            if self.gactive[h]:
                own = int(GRIP_SLOT_HAND[h]) % N_PARTS
                attachments.add((own, int(self.gtarget[h]) % N_PARTS))
        return CharacterState(
            parts=[self.part_view(player, i) for i in range(N_PARTS)],
            joints=[self.joint_view(player, j) for j in range(N_JOINTS)],
            grips=grips, grip_attachments=attachments,
            injury=float(self.injury[player]),
        )

    def joint_angles(self) -> np.ndarray:
        sc = self.scratch
        out = np.zeros(2 * N_JOINTS)
        kernels.compute_joint_angles(self.rot, sc["jp"], sc["jc"], sc["jaxis2"], sc["juref2"], out)
        return out

    def groin_position(self, player: int) -> np.ndarray:
        return self.pos[player * N_PARTS + GROIN_PART_ID].copy()

    def serialize_state(self) -> bytes:
        """Canonical little-endian snapshot of the full dynamic state."""
        chunks = [
            np.ascontiguousarray(self.pos, dtype="<f8").tobytes(),
            np.ascontiguousarray(self.vel, dtype="<f8").tobytes(),
            np.ascontiguousarray(self.rot, dtype="<f8").tobytes(),
            np.ascontiguousarray(self.angvel, dtype="<f8").tobytes(),
            np.ascontiguousarray(self.jmode, dtype="<i8").tobytes(),
            np.ascontiguousarray(self.jlock, dtype="<f8").tobytes(),
            np.ascontiguousarray(self.jintact, dtype="<i1").tobytes(),
            np.ascontiguousarray(self.gmode, dtype="<i8").tobytes(),
            np.ascontiguousarray(self.gactive, dtype="<i1").tobytes(),
            np.ascontiguousarray(self.gtarget, dtype="<i8").tobytes(),
            np.ascontiguousarray(self.ganchor_own, dtype="<f8").tobytes(),
            np.ascontiguousarray(self.ganchor_opp, dtype="<f8").tobytes(),
            np.ascontiguousarray(self.attached, dtype="<i1").tobytes(),
            np.ascontiguousarray(self.injury, dtype="<f8").tobytes(),
        ]
        return b"".join(chunks)


@dataclass
class BodyPart:
    id: int
    name: str
    position: np.ndarray
    velocity: np.ndarray
    orientation: np.ndarray
    angular_velocity: np.ndarray
    radius: float
    mass: float
    attached: bool


@dataclass
class Joint:
    id: int
    name: str
    parent_part: int
    child_part: int
    axis: np.ndarray
    angle: float
    mode: JointMode
    torque_magnitude: float
    angle_limits: tuple[float, float]
    intact: bool


@dataclass
class CharacterState:
    parts: list[BodyPart]
    joints: list[Joint]
    grips: tuple[GripMode, GripMode]
    grip_attachments: set[tuple[int, int]]
    injury: float


def validate_action(action) -> np.ndarray:
    """Check an action (22 ints: 20 joint modes in 1..4, 2 grips in 1..2)."""
    arr = np.asarray(action)
    if arr.shape != (N_ACTION,):
        raise InvalidActionError(f"action must have {N_ACTION} entries, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(arr == arr.astype(np.int64)):
            raise InvalidActionError("action entries must be integers")
    arr = arr.astype(np.int64)
    joints = arr[:N_JOINTS]
    grips = arr[N_JOINTS:]
    if np.any((joints < 1) | (joints > 4)):
        bad = int(np.argmax((joints < 1) | (joints > 4)))
        raise InvalidActionError(f"joint entry {bad} out of range 1..4: {int(joints[bad])}")
    if np.any((grips < 1) | (grips > 2)):
        bad = int(np.argmax((grips < 1) | (grips > 2)))
        raise InvalidActionError(f"grip entry {bad} out of range 1..2: {int(grips[bad])}")
    return arr


def all_hold_action() -> np.ndarray:
    return np.array([JointMode.HOLD] * N_JOINTS + [GripMode.RELEASE] * 2, dtype=np.int64)


def make_world(
    engagement_distance: float,
    seed: int = 0,
    gravity: tuple[float, float, float] = bodydef.GRAVITY_DEFAULT,
    dismemberment_enabled: bool = True,
    model: BodyModel | None = None,
) -> WorldState:
    """Two characters in the upright rest pose facing each other along x,
    groins separated by ``engagement_distance``, centered on the origin."""
    if not (engagement_distance > 0):
        raise ValueError(f"engagement_distance must be > 0, got {engagement_distance}")
    if len(gravity) != 3:
        raise ValueError("gravity must be a 3-vector")
    model = model or default_model()
    half = engagement_distance / 2.0
    stand = model.stand_height

    pos = np.zeros((2 * N_PARTS, 3))
    rot = np.zeros((2 * N_PARTS, 3, 3))
    # player 0 at -half, facing +x, identity orientations
    pos[:N_PARTS] = model.offsets + np.array([-half, 0.0, stand])
    rot[:N_PARTS] = np.eye(3)
    # player 1 is the mirror image (equivalently: rotated 180 degrees about z)
    mirrored = model.offsets[PART_LR_SWAP].copy()
    mirrored[:, 0] = -mirrored[:, 0]
    pos[N_PARTS:] = mirrored + np.array([half, 0.0, stand])
    rot[N_PARTS:] = np.diag([-1.0, -1.0, 1.0])

    world = WorldState(
        model=model,
        pos=pos,
        vel=np.zeros((2 * N_PARTS, 3)),
        rot=rot,
        angvel=np.zeros((2 * N_PARTS, 3)),
        jmode=np.full(2 * N_JOINTS, int(JointMode.HOLD), dtype=np.int64),
        jlock=np.zeros(2 * N_JOINTS),
        jintact=np.ones(2 * N_JOINTS, dtype=bool),
        gmode=np.full(4, int(GripMode.RELEASE), dtype=np.int64),
        gactive=np.zeros(4, dtype=bool),
        gtarget=np.full(4, -1, dtype=np.int64),
        ganchor_own=np.zeros((4, 3)),
        ganchor_opp=np.zeros((4, 3)),
        attached=np.ones(2 * N_PARTS, dtype=bool),
        injury=np.zeros(2),
        gravity=tuple(float(g) for g in gravity),
        rng_state=int(seed),
        dismemberment_enabled=bool(dismemberment_enabled),
        scratch=_scratch(model),
    )
    return world


def set_joint_modes(world: WorldState, player: int, action) -> WorldState:
    """Apply one action for one player: joint modes and grips.  No physics.

    Severed joints store the mode but no longer actuate; grips always apply
    (severed hands keep grip control).  A joint set to Hold locks at its
    current angle.
    """
    if world.fault:
        raise SimulationFault("world is frozen after a simulation fault")
    if player not in (0, 1):
        raise ValueError(f"player must be 0 or 1, got {player}")
    arr = validate_action(action)
    base = player * N_JOINTS
    angles = world.joint_angles()
    for j in range(N_JOINTS):
        mode = int(arr[j])
        idx = base + j
        world.jmode[idx] = mode
        if mode == int(JointMode.HOLD):
            world.jlock[idx] = angles[idx]
    for h in range(2):
        slot = 2 * player + h
        gm = int(arr[N_JOINTS + h])
        world.gmode[slot] = gm
        if gm == int(GripMode.RELEASE) and world.gactive[slot]:
            world.gactive[slot] = False
            world.gtarget[slot] = -1
    return world


def sever_joint(world: WorldState, player: int, joint_id: int) -> None:
    """Explicitly dismember a joint (gameplay uses impulse thresholds; this
    exists for tooling and scripted fixtures)."""
    idx = player * N_JOINTS + joint_id
    if not world.jintact[idx]:
        return
    world.jintact[idx] = False
    hand_slot = _hand_slot_for_severed_wrist(world, player, joint_id)
    if hand_slot is not None and world.gactive[hand_slot]:
        world.gactive[hand_slot] = False
        world.gtarget[hand_slot] = -1
    refresh_attached(world)


def _hand_slot_for_severed_wrist(world: WorldState, player: int, joint_id: int) -> int | None:
    # Severing a wrist breaks that hand's active hold (it may re-grip later).
    child = int(world.model.jchild[joint_id])
    for h in range(2):
        if child == bodydef.HAND_PART_IDS[h]:
            return 2 * player + h
    return None


def refresh_attached(world: WorldState) -> None:
    """Recompute which parts are still connected to the groin chain."""
    m = world.model
    for player in range(2):
        pbase = player * N_PARTS
        jbase = player * N_JOINTS
        att = np.zeros(N_PARTS, dtype=bool)
        att[GROIN_PART_ID] = True
        for j in m.jtopo:
            if world.jintact[jbase + j]:
                att[m.jchild[j]] = att[m.jparent[j]]
        world.attached[pbase:pbase + N_PARTS] = att


def mirror_world(world: WorldState) -> WorldState:
    """Reflect across the vertical plane through the arena center, swapping
    players and left/right within each character.  An exact involution."""
    w = world.copy()
    perm = np.concatenate([PART_LR_SWAP + N_PARTS, PART_LR_SWAP])
    jperm = np.concatenate([JOINT_LR_SWAP + N_JOINTS, JOINT_LR_SWAP])

    pos = world.pos[perm].copy()
    pos[:, 0] = (2.0 * world.arena_center_x) - pos[:, 0] if world.arena_center_x != 0.0 else -pos[:, 0]
    vel = world.vel[perm].copy()
    vel[:, 0] = -vel[:, 0]
    rot = world.rot[perm] * _ROT_SIGNS
    angvel = world.angvel[perm] * _ANG_SIGNS

    w.pos = pos
    w.vel = vel
    w.rot = np.ascontiguousarray(rot)
    w.angvel = np.ascontiguousarray(angvel)
    w.jmode = world.jmode[jperm].copy()
    w.jlock = world.jlock[jperm].copy()
    w.jintact = world.jintact[jperm].copy()

    gperm = np.array([3, 2, 1, 0])
    w.gmode = world.gmode[gperm].copy()
    w.gactive = world.gactive[gperm].copy()
    gtarget = world.gtarget[gperm].copy()
    for h in range(4):
        t = gtarget[h]
        if t >= 0:
            gtarget[h] = perm_inverse_target(int(t))
    w.gtarget = gtarget
    w.ganchor_own = world.ganchor_own[gperm] * _BODY_Y_FLIP
    w.ganchor_opp = world.ganchor_opp[gperm] * _BODY_Y_FLIP
    w.attached = world.attached[perm].copy()
    w.injury = world.injury[::-1].copy()
    return w


def perm_inverse_target(part_global: int) -> int:
    player, slot = divmod(part_global, N_PARTS)
    return (1 - player) * N_PARTS + int(PART_LR_SWAP[slot])


def mirror_action(action) -> np.ndarray:
    """The action map matching mirror_world: permute left/right entries."""
    arr = validate_action(action)
    out = arr.copy()
    out[:N_JOINTS] = arr[JOINT_LR_SWAP]
    out[N_JOINTS] = arr[N_JOINTS + 1]
    out[N_JOINTS + 1] = arr[N_JOINTS]
    return out
