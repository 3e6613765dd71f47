"""Frame stepping: drives the solver kernel and applies the game-rule layer
(injury accumulation, dismemberment, grip attachments, events)."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .bodydef import INJURY_SCALE, N_JOINTS, N_PARTS, GripMode
from .world import (
    GRIP_SLOT_HAND,
    SimulationFault,
    WorldState,
    refresh_attached,
)


@dataclass
class ContactEvent:
    """One resolved contact; impulse_magnitude is the accumulated normal
    impulse for the frame."""

    kind: str  # "player_player" or "player_ground"
    player_a: int
    part_a: int
    player_b: int | None
    part_b: int | None
    impulse_magnitude: float
    point: tuple[float, float, float]


@dataclass
class FrameEvents:
    """Per-frame outcomes.  Raw arrays are copies; the ContactEvent list is
    built on demand."""

    contact_a: np.ndarray        # global part ids, a-side (player 0 for pp)
    contact_b: np.ndarray        # global part ids or -1 for ground
    contact_impulse: np.ndarray
    contact_point: np.ndarray
    injury_deltas: tuple[float, float]
    dismemberments: list[tuple[int, int]]   # (player, joint id)
    n_ground: int

    @cached_property
    def contacts(self) -> list[ContactEvent]:
        out = []
        for i in range(self.contact_a.shape[0]):
            a = int(self.contact_a[i])
            b = int(self.contact_b[i])
            pa, ka = divmod(a, N_PARTS)
            point = (
                float(self.contact_point[i, 0]),
                float(self.contact_point[i, 1]),
                float(self.contact_point[i, 2]),
            )
            if b < 0:
                out.append(ContactEvent("player_ground", pa, ka, None, None,
                                        float(self.contact_impulse[i]), point))
            else:
                pb, kb = divmod(b, N_PARTS)
                out.append(ContactEvent("player_player", pa, ka, pb, kb,
                                        float(self.contact_impulse[i]), point))
        return out

    @cached_property
    def ground_touches(self) -> list[tuple[int, int]]:
        out = []
        for i in range(self.n_ground):
            a = int(self.contact_a[i])
            out.append((a // N_PARTS, a % N_PARTS))
        return out


def _sorted_sum(values: np.ndarray) -> float:
    # Ascending-order summation: permutation-invariant, which keeps injury
    # accumulation exactly mirror-symmetric.
    return float(np.sum(np.sort(values)))


def _injury_from_arrays(a, b, imp, mult2) -> tuple[float, float]:
    if a.shape[0] == 0:
        return 0.0, 0.0
    d0 = _sorted_sum((mult2[a] * imp) * INJURY_SCALE)
    d1 = _sorted_sum((mult2[b] * imp) * INJURY_SCALE)
    return d0, d1


def compute_injury(contacts: list[ContactEvent]) -> tuple[float, float]:
    """Injury deltas from one frame's contacts.  Each player-player contact
    damages both ends: multiplier(struck part) x impulse x scale.  Ground
    contacts contribute nothing."""
    from .bodydef import default_model

    mult = default_model().injury_mult
    a_ids = []
    b_ids = []
    imps = []
    for c in contacts:
        if c.kind != "player_player":
            continue
        a_ids.append(c.player_a * N_PARTS + c.part_a)
        b_ids.append(c.player_b * N_PARTS + c.part_b)
        imps.append(c.impulse_magnitude)
    if not imps:
        return 0.0, 0.0
    mult2 = np.concatenate([mult, mult])
    a = np.array(a_ids)
    b = np.array(b_ids)
    imp = np.array(imps)
    da = _sorted_sum((mult2[a] * imp) * INJURY_SCALE)
    db = _sorted_sum((mult2[b] * imp) * INJURY_SCALE)
    # a-side may belong to either player in hand-built event lists
    d = [0.0, 0.0]
    pa = a // N_PARTS
    if np.all(pa == pa[0]):
        d[int(pa[0])] = da
        d[1 - int(pa[0])] = db
        return d[0], d[1]
    d0 = _sorted_sum(np.concatenate([
        (mult2[a[pa == 0]] * imp[pa == 0]) * INJURY_SCALE,
        (mult2[b[pa == 1]] * imp[pa == 1]) * INJURY_SCALE,
    ]))
    d1 = _sorted_sum(np.concatenate([
        (mult2[a[pa == 1]] * imp[pa == 1]) * INJURY_SCALE,
        (mult2[b[pa == 0]] * imp[pa == 0]) * INJURY_SCALE,
    ]))
    return d0, d1


def step_frame(world: WorldState) -> tuple[WorldState, FrameEvents]:
    """Advance exactly one fixed timestep.  Mutates and returns the world."""
    if world.fault:
        raise SimulationFault("world is frozen after a simulation fault")
    sc = world.scratch
    gx, gy, gz = world.gravity

    ncon, nground, fault = kernels.step_kernel(
        world.pos, world.vel, world.rot, world.angvel,
        world.jmode, world.jlock, world.jintact,
        world.gactive, world.gtarget, world.ganchor_own, world.ganchor_opp,
        GRIP_SLOT_HAND,
        sc["radius2"], sc["invm2"], sc["invi2"],
        sc["jp"], sc["jc"], sc["jaxis2"], sc["juref2"], sc["jap"], sc["jac"],
        sc["jlo2"], sc["jhi2"], sc["jtorque2"], sc["jspring2"],
        world.model.joint_groups, world.model.part_pair_id,
        gx, gy, gz, world.dt, world.ground_height,
        sc["c_a"], sc["c_b"], sc["c_imp"], sc["c_point"], sc["c_depth"],
        sc["jang"], sc["rp"], sc["rc"], sc["ax"], sc["cerr"], sc["herr"], sc["kinv"],
        sc["llo"], sc["lhi"],
        sc["gk"], sc["grp"], sc["grc"], sc["gcerr"],
        sc["n"], sc["t1"], sc["t2"], sc["kn"], sc["kt"], sc["fr"],
        sc["acc1"], sc["acc2"],
        sc["ra"], sc["rb"], sc["key"],
    )

    world.frame_index += 1
    if fault:
        world.fault = True

    c_a = sc["c_a"][:ncon].copy()
    c_b = sc["c_b"][:ncon].copy()
    c_imp = sc["c_imp"][:ncon].copy()
    c_point = sc["c_point"][:ncon].copy()
    c_depth = sc["c_depth"][:ncon]

    deltas = (0.0, 0.0)
    dismemberments: list[tuple[int, int]] = []
    if ncon > nground:
        pp_a = c_a[nground:]
        pp_b = c_b[nground:]
        pp_imp = c_imp[nground:]
        deltas = _injury_from_arrays(pp_a, pp_b, pp_imp, sc["mult2"])
        world.injury[0] += deltas[0]
        world.injury[1] += deltas[1]

        if world.dismemberment_enabled:
            part_max = sc["part_max"]
            part_max[:] = 0.0
            np.maximum.at(part_max, pp_a, pp_imp)
            np.maximum.at(part_max, pp_b, pp_imp)
            hit = np.maximum(part_max[sc["jp"]], part_max[sc["jc"]])
            cand = np.flatnonzero(world.jintact & (hit > sc["jthresh2"]))
            for idx in cand:
                idx = int(idx)
                world.jintact[idx] = False
                player, j = divmod(idx, N_JOINTS)
                dismemberments.append((player, j))
                # severing a wrist breaks that hand's active hold
                child = int(sc["jc"][idx]) % N_PARTS
                for h in range(2):
                    if child == GRIP_SLOT_HAND[2 * player + h] % N_PARTS:
                        slot = 2 * player + h
                        if world.gactive[slot]:
                            world.gactive[slot] = False
                            world.gtarget[slot] = -1
            if dismemberments:
                refresh_attached(world)

        _update_grips(world, pp_a, pp_b, c_depth[nground:], c_point[nground:])

    events = FrameEvents(
        contact_a=c_a, contact_b=c_b, contact_impulse=c_imp,
        contact_point=c_point, injury_deltas=deltas,
        dismemberments=dismemberments, n_ground=nground,
    )
    return world, events


def _update_grips(world: WorldState, pp_a, pp_b, pp_depth, pp_point) -> None:
    # A hand in Grip mode attaches to the deepest-contact opponent part.
    for slot in range(4):
        if world.gactive[slot] or world.gmode[slot] != int(GripMode.GRIP):
            continue
        hand = int(GRIP_SLOT_HAND[slot])
        if slot < 2:
            mask = pp_a == hand
            others = pp_b
        else:
            mask = pp_b == hand
            others = pp_a
        if not np.any(mask):
            continue
        idx = np.flatnonzero(mask)
        best = idx[int(np.argmax(pp_depth[idx]))]
        target = int(others[best])
        point = pp_point[best]
        world.gactive[slot] = True
        world.gtarget[slot] = target
        world.ganchor_own[slot] = world.rot[hand].T @ (point - world.pos[hand])
        world.ganchor_opp[slot] = world.rot[target].T @ (point - world.pos[target])
