"""Fixed-timestep solver kernels (numba-compiled, IEEE-strict, no fastmath).

Frame pipeline, in this order:

1. gravity + joint actuation (hold spring+damper / relax / +-torque about
   the joint axis)
2. semi-implicit Euler integration (velocity first, then position/rotation,
   rotations re-orthonormalized every step)
3. sphere-sphere (inter-player) and sphere-ground contact detection
4. velocity-impulse solve: N_ITERS iterations over a fixed, documented
   constraint ordering, then N_PROJ_PASSES positional projection passes for
   joint anchors, hinge axes and angle limits
5. (python side, engine.py) injury, dismemberment, grips, events

Constraint ordering.  Constraints are processed as a fixed sequence of
*mirror-orbit groups*: joint groups in joint-id order (the left/right twins
of both players together), the grip-attachment group, ground contacts in
part order, then inter-player contacts sorted by the unordered pair of
part-pair ids.  Within a group the members are solved Jacobi-style from the
group-entry velocities and their per-body impulse sums are applied together;
any body receives at most two contributions per group, so the two-term sums
are order-independent in floating point.  Groups are Gauss-Seidel relative
to each other.  This makes stepping commute exactly with the world mirror
transform, which the mirror-trajectory guarantees rely on.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

# Solver constants (documented in docs/physics.md).
N_ITERS = 8
N_PROJ_PASSES = 2
BETA = 0.2
CONTACT_SLOP = 0.5
FRICTION_MU = 0.9
# Ground contacts resist rolling as if the sphere flattened into a small
# patch: per-iteration angular impulse clamped by MU_ROLL * lambda_n * radius.
MU_ROLL = 0.5
# Extend/Contract act as velocity motors: the joint drives toward
# +-MOTOR_SPEED rad/s with impulse capped at torque_magnitude * dt, i.e. the
# configured torque saturates until the drive speed is reached.
MOTOR_SPEED = 5.0
RELAX_DAMP = 0.02
HOLD_TORQUE_CLAMP = 4.0

MODE_HOLD = 1
MODE_RELAX = 2
MODE_EXTEND = 3
MODE_CONTRACT = 4

GRIP_GRIP = 1
GRIP_RELEASE = 2


@njit(cache=True, nogil=True)
def _orthonormalize(rot, i):
    # Gram-Schmidt over columns, fixed order.
    r = rot[i]
    c0x, c0y, c0z = r[0, 0], r[1, 0], r[2, 0]
    n0 = math.sqrt(c0x * c0x + c0y * c0y + c0z * c0z)
    c0x /= n0
    c0y /= n0
    c0z /= n0
    c1x, c1y, c1z = r[0, 1], r[1, 1], r[2, 1]
    d01 = c1x * c0x + c1y * c0y + c1z * c0z
    c1x -= d01 * c0x
    c1y -= d01 * c0y
    c1z -= d01 * c0z
    n1 = math.sqrt(c1x * c1x + c1y * c1y + c1z * c1z)
    c1x /= n1
    c1y /= n1
    c1z /= n1
    c2x, c2y, c2z = r[0, 2], r[1, 2], r[2, 2]
    d02 = c2x * c0x + c2y * c0y + c2z * c0z
    c2x -= d02 * c0x
    c2y -= d02 * c0y
    c2z -= d02 * c0z
    d12 = c2x * c1x + c2y * c1y + c2z * c1z
    c2x -= d12 * c1x
    c2y -= d12 * c1y
    c2z -= d12 * c1z
    n2 = math.sqrt(c2x * c2x + c2y * c2y + c2z * c2z)
    c2x /= n2
    c2y /= n2
    c2z /= n2
    r[0, 0], r[1, 0], r[2, 0] = c0x, c0y, c0z
    r[0, 1], r[1, 1], r[2, 1] = c1x, c1y, c1z
    r[0, 2], r[1, 2], r[2, 2] = c2x, c2y, c2z


@njit(cache=True, nogil=True)
def _rotate(rot, i, vx, vy, vz):
    r = rot[i]
    return (
        r[0, 0] * vx + r[0, 1] * vy + r[0, 2] * vz,
        r[1, 0] * vx + r[1, 1] * vy + r[1, 2] * vz,
        r[2, 0] * vx + r[2, 1] * vy + r[2, 2] * vz,
    )


@njit(cache=True, nogil=True)
def _apply_axis_angle(rot, i, ax, ay, az, angle):
    # Left-multiply rot[i] by the rotation of `angle` about unit axis a.
    c = math.cos(angle)
    s = math.sin(angle)
    t = 1.0 - c
    m00 = c + ax * ax * t
    m01 = ax * ay * t - az * s
    m02 = ax * az * t + ay * s
    m10 = ay * ax * t + az * s
    m11 = c + ay * ay * t
    m12 = ay * az * t - ax * s
    m20 = az * ax * t - ay * s
    m21 = az * ay * t + ax * s
    m22 = c + az * az * t
    r = rot[i]
    for col in range(3):
        v0 = r[0, col]
        v1 = r[1, col]
        v2 = r[2, col]
        r[0, col] = m00 * v0 + m01 * v1 + m02 * v2
        r[1, col] = m10 * v0 + m11 * v1 + m12 * v2
        r[2, col] = m20 * v0 + m21 * v1 + m22 * v2


@njit(cache=True, nogil=True)
def joint_angle(rot, p, c, axx, axy, axz, ux, uy, uz):
    """Signed twist of the child relative to the parent about the joint axis."""
    awx, awy, awz = _rotate(rot, p, axx, axy, axz)
    n = math.sqrt(awx * awx + awy * awy + awz * awz)
    awx /= n
    awy /= n
    awz /= n
    v1x, v1y, v1z = _rotate(rot, p, ux, uy, uz)
    v2x, v2y, v2z = _rotate(rot, c, ux, uy, uz)
    d1 = v1x * awx + v1y * awy + v1z * awz
    v1x -= d1 * awx
    v1y -= d1 * awy
    v1z -= d1 * awz
    d2 = v2x * awx + v2y * awy + v2z * awz
    v2x -= d2 * awx
    v2y -= d2 * awy
    v2z -= d2 * awz
    cosv = v1x * v2x + v1y * v2y + v1z * v2z
    cx = v1y * v2z - v1z * v2y
    cy = v1z * v2x - v1x * v2z
    cz = v1x * v2y - v1y * v2x
    sinv = cx * awx + cy * awy + cz * awz
    return math.atan2(sinv, cosv)


@njit(cache=True, nogil=True)
def compute_joint_angles(rot, jparent, jchild, jaxis, juref, out):
    for j in range(jparent.shape[0]):
        out[j] = joint_angle(
            rot, jparent[j], jchild[j],
            jaxis[j, 0], jaxis[j, 1], jaxis[j, 2],
            juref[j, 0], juref[j, 1], juref[j, 2],
        )


@njit(cache=True, nogil=True)
def _mat3_inv(K, out):
    a = K[0, 0]
    b = K[0, 1]
    c = K[0, 2]
    d = K[1, 0]
    e = K[1, 1]
    f = K[1, 2]
    g = K[2, 0]
    h = K[2, 1]
    i = K[2, 2]
    A = e * i - f * h
    B = f * g - d * i
    C = d * h - e * g
    det = a * A + b * B + c * C
    inv = 1.0 / det
    out[0, 0] = A * inv
    out[0, 1] = (c * h - b * i) * inv
    out[0, 2] = (b * f - c * e) * inv
    out[1, 0] = B * inv
    out[1, 1] = (a * i - c * g) * inv
    out[1, 2] = (c * d - a * f) * inv
    out[2, 0] = C * inv
    out[2, 1] = (b * g - a * h) * inv
    out[2, 2] = (a * e - b * d) * inv


@njit(cache=True, nogil=True)
def _ball_kinv(invm_p, invi_p, rpx, rpy, rpz, invm_c, invi_c, rcx, rcy, rcz, K, Kinv):
    s = invm_p + invm_c
    dp = rpx * rpx + rpy * rpy + rpz * rpz
    dc = rcx * rcx + rcy * rcy + rcz * rcz
    diag = s + invi_p * dp + invi_c * dc
    K[0, 0] = diag - invi_p * rpx * rpx - invi_c * rcx * rcx
    K[0, 1] = -invi_p * rpx * rpy - invi_c * rcx * rcy
    K[0, 2] = -invi_p * rpx * rpz - invi_c * rcx * rcz
    K[1, 0] = K[0, 1]
    K[1, 1] = diag - invi_p * rpy * rpy - invi_c * rcy * rcy
    K[1, 2] = -invi_p * rpy * rpz - invi_c * rcy * rcz
    K[2, 0] = K[0, 2]
    K[2, 1] = K[1, 2]
    K[2, 2] = diag - invi_p * rpz * rpz - invi_c * rcz * rcz
    _mat3_inv(K, Kinv)


@njit(cache=True, nogil=True)
def _acc(bid, bdv, bdw, nb, body, dvx, dvy, dvz, dwx, dwy, dwz):
    # Per-body accumulation within one constraint group.  At most two
    # contributions arrive per body, so the sum is order-independent.
    f = -1
    for q in range(nb):
        if bid[q] == body:
            f = q
            break
    if f < 0:
        f = nb
        bid[f] = body
        bdv[f, 0] = 0.0
        bdv[f, 1] = 0.0
        bdv[f, 2] = 0.0
        bdw[f, 0] = 0.0
        bdw[f, 1] = 0.0
        bdw[f, 2] = 0.0
        nb += 1
    bdv[f, 0] += dvx
    bdv[f, 1] += dvy
    bdv[f, 2] += dvz
    bdw[f, 0] += dwx
    bdw[f, 1] += dwy
    bdw[f, 2] += dwz
    return nb


@njit(cache=True, nogil=True)
def _flush_vel(bid, bdv, bdw, nb, vel, angvel):
    for q in range(nb):
        body = bid[q]
        vel[body, 0] += bdv[q, 0]
        vel[body, 1] += bdv[q, 1]
        vel[body, 2] += bdv[q, 2]
        angvel[body, 0] += bdw[q, 0]
        angvel[body, 1] += bdw[q, 1]
        angvel[body, 2] += bdw[q, 2]


@njit(cache=True, nogil=True)
def step_kernel(
    # mutable state
    pos, vel, rot, angvel,
    jmode, jlock, jintact,
    gactive, gtarget, ganchor_own, ganchor_opp, ghand,
    # body constants
    radius, inv_mass, inv_inertia,
    jparent, jchild, jaxis, juref, janchor_p, janchor_c,
    jlo, jhi, jtorque, jspring,
    joint_groups, part_pair,
    # world constants
    gx, gy, gz, dt, ground_z,
    # contact output buffers
    c_a, c_b, c_imp, c_point, c_depth,
    # scratch
    scr_jang, scr_rp, scr_rc, scr_ax, scr_cerr, scr_herr, scr_kinv,
    scr_llo, scr_lhi,
    scr_gk, scr_grp, scr_grc, scr_gcerr,
    scr_n, scr_t1, scr_t2, scr_kn, scr_kt, scr_fr, scr_acc1, scr_acc2,
    scr_ra, scr_rb, scr_key,
):
    n = pos.shape[0]
    m = jparent.shape[0]
    K = np.empty((3, 3))
    bid = np.empty(16, dtype=np.int64)
    bdv = np.empty((16, 3))
    bdw = np.empty((16, 3))
    binv = BETA / dt

    # ---- stage 1: gravity and joint actuation --------------------------------
    for i in range(n):
        vel[i, 0] += gx * dt
        vel[i, 1] += gy * dt
        vel[i, 2] += gz * dt

    compute_joint_angles(rot, jparent, jchild, jaxis, juref, scr_jang)

    for g in range(joint_groups.shape[0]):
        nb = 0
        for k in range(joint_groups.shape[1]):
            j = joint_groups[g, k]
            if j < 0 or not jintact[j]:
                continue
            p = jparent[j]
            c = jchild[j]
            awx, awy, awz = _rotate(rot, p, jaxis[j, 0], jaxis[j, 1], jaxis[j, 2])
            nrm = math.sqrt(awx * awx + awy * awy + awz * awz)
            awx /= nrm
            awy /= nrm
            awz /= nrm
            mode = jmode[j]
            srel = (
                (angvel[c, 0] - angvel[p, 0]) * awx
                + (angvel[c, 1] - angvel[p, 1]) * awy
                + (angvel[c, 2] - angvel[p, 2]) * awz
            )
            ieff = 1.0 / (inv_inertia[p] + inv_inertia[c])
            if mode == MODE_HOLD:
                # implicit spring-damper on the axis DOF (stable for any k),
                # impulse clamped by the hold torque cap
                k = jspring[j]
                cdamp = 2.0 * math.sqrt(k * ieff)
                snew = (ieff * srel + dt * k * (jlock[j] - scr_jang[j])) / (
                    ieff + dt * dt * k + dt * cdamp
                )
                imp = ieff * (snew - srel)
                cap = HOLD_TORQUE_CLAMP * jtorque[j] * dt
                if imp > cap:
                    imp = cap
                elif imp < -cap:
                    imp = -cap
            elif mode == MODE_EXTEND or mode == MODE_CONTRACT:
                target = MOTOR_SPEED if mode == MODE_EXTEND else -MOTOR_SPEED
                imp = ieff * (target - srel)
                cap = jtorque[j] * dt
                if imp > cap:
                    imp = cap
                elif imp < -cap:
                    imp = -cap
            else:
                imp = -RELAX_DAMP * ieff * srel
            nb = _acc(
                bid, bdv, bdw, nb, p, 0.0, 0.0, 0.0,
                -imp * inv_inertia[p] * awx,
                -imp * inv_inertia[p] * awy,
                -imp * inv_inertia[p] * awz,
            )
            nb = _acc(
                bid, bdv, bdw, nb, c, 0.0, 0.0, 0.0,
                imp * inv_inertia[c] * awx,
                imp * inv_inertia[c] * awy,
                imp * inv_inertia[c] * awz,
            )
        _flush_vel(bid, bdv, bdw, nb, vel, angvel)

    # ---- stage 2: integrate (velocity first, then position) ------------------
    for i in range(n):
        pos[i, 0] += vel[i, 0] * dt
        pos[i, 1] += vel[i, 1] * dt
        pos[i, 2] += vel[i, 2] * dt
        wx = angvel[i, 0]
        wy = angvel[i, 1]
        wz = angvel[i, 2]
        r = rot[i]
        for col in range(3):
            v0 = r[0, col]
            v1 = r[1, col]
            v2 = r[2, col]
            r[0, col] = v0 + (wy * v2 - wz * v1) * dt
            r[1, col] = v1 + (wz * v0 - wx * v2) * dt
            r[2, col] = v2 + (wx * v1 - wy * v0) * dt
        _orthonormalize(rot, i)

    # ---- stage 3: contact detection -------------------------------------------
    ncon = 0
    half = n // 2
    for i in range(n):  # ground contacts in part order
        pen = radius[i] - (pos[i, 2] - ground_z)
        if pen > 0.0:
            c_a[ncon] = i
            c_b[ncon] = -1
            c_depth[ncon] = pen
            c_point[ncon, 0] = pos[i, 0]
            c_point[ncon, 1] = pos[i, 1]
            c_point[ncon, 2] = pos[i, 2] - radius[i]
            scr_n[ncon, 0] = 0.0
            scr_n[ncon, 1] = 0.0
            scr_n[ncon, 2] = 1.0
            scr_key[ncon] = -1
            ncon += 1
    nground = ncon
    for i in range(half):  # inter-player sphere contacts
        for j in range(half, n):
            dx = pos[i, 0] - pos[j, 0]
            dy = pos[i, 1] - pos[j, 1]
            dz = pos[i, 2] - pos[j, 2]
            rsum = radius[i] + radius[j]
            d2 = dx * dx + dy * dy + dz * dz
            if d2 < rsum * rsum and d2 > 0.0:
                d = math.sqrt(d2)
                nxx = dx / d
                nyy = dy / d
                nzz = dz / d
                c_a[ncon] = i
                c_b[ncon] = j
                c_depth[ncon] = rsum - d
                # surface midpoint between the two spheres
                c_point[ncon, 0] = (pos[i, 0] + pos[j, 0]) * 0.5 - nxx * (radius[i] - radius[j]) * 0.5
                c_point[ncon, 1] = (pos[i, 1] + pos[j, 1]) * 0.5 - nyy * (radius[i] - radius[j]) * 0.5
                c_point[ncon, 2] = (pos[i, 2] + pos[j, 2]) * 0.5 - nzz * (radius[i] - radius[j]) * 0.5
                scr_n[ncon, 0] = nxx
                scr_n[ncon, 1] = nyy
                scr_n[ncon, 2] = nzz
                pa = part_pair[i]
                pb = part_pair[j - half]
                if pa < pb:
                    scr_key[ncon] = pa * 32 + pb
                else:
                    scr_key[ncon] = pb * 32 + pa
                ncon += 1
    # sort the inter-player span by mirror-invariant group key (stable)
    for i in range(nground + 1, ncon):
        keyi = scr_key[i]
        ai = c_a[i]
        bi = c_b[i]
        di = c_depth[i]
        px = c_point[i, 0]
        py = c_point[i, 1]
        pz = c_point[i, 2]
        nx = scr_n[i, 0]
        ny = scr_n[i, 1]
        nz = scr_n[i, 2]
        k = i - 1
        while k >= nground and scr_key[k] > keyi:
            scr_key[k + 1] = scr_key[k]
            c_a[k + 1] = c_a[k]
            c_b[k + 1] = c_b[k]
            c_depth[k + 1] = c_depth[k]
            c_point[k + 1, 0] = c_point[k, 0]
            c_point[k + 1, 1] = c_point[k, 1]
            c_point[k + 1, 2] = c_point[k, 2]
            scr_n[k + 1, 0] = scr_n[k, 0]
            scr_n[k + 1, 1] = scr_n[k, 1]
            scr_n[k + 1, 2] = scr_n[k, 2]
            k -= 1
        scr_key[k + 1] = keyi
        c_a[k + 1] = ai
        c_b[k + 1] = bi
        c_depth[k + 1] = di
        c_point[k + 1, 0] = px
        c_point[k + 1, 1] = py
        c_point[k + 1, 2] = pz
        scr_n[k + 1, 0] = nx
        scr_n[k + 1, 1] = ny
        scr_n[k + 1, 2] = nz

    # ---- stage 4 prep ----------------------------------------------------------
    compute_joint_angles(rot, jparent, jchild, jaxis, juref, scr_jang)
    for j in range(m):
        if not jintact[j]:
            continue
        p = jparent[j]
        c = jchild[j]
        rpx, rpy, rpz = _rotate(rot, p, janchor_p[j, 0], janchor_p[j, 1], janchor_p[j, 2])
        rcx, rcy, rcz = _rotate(rot, c, janchor_c[j, 0], janchor_c[j, 1], janchor_c[j, 2])
        scr_rp[j, 0] = rpx
        scr_rp[j, 1] = rpy
        scr_rp[j, 2] = rpz
        scr_rc[j, 0] = rcx
        scr_rc[j, 1] = rcy
        scr_rc[j, 2] = rcz
        scr_cerr[j, 0] = (pos[c, 0] + rcx) - (pos[p, 0] + rpx)
        scr_cerr[j, 1] = (pos[c, 1] + rcy) - (pos[p, 1] + rpy)
        scr_cerr[j, 2] = (pos[c, 2] + rcz) - (pos[p, 2] + rpz)
        awx, awy, awz = _rotate(rot, p, jaxis[j, 0], jaxis[j, 1], jaxis[j, 2])
        nrm = math.sqrt(awx * awx + awy * awy + awz * awz)
        awx /= nrm
        awy /= nrm
        awz /= nrm
        scr_ax[j, 0] = awx
        scr_ax[j, 1] = awy
        scr_ax[j, 2] = awz
        acx, acy, acz = _rotate(rot, c, jaxis[j, 0], jaxis[j, 1], jaxis[j, 2])
        ex = awy * acz - awz * acy
        ey = awz * acx - awx * acz
        ez = awx * acy - awy * acx
        edot = ex * awx + ey * awy + ez * awz
        scr_herr[j, 0] = ex - edot * awx
        scr_herr[j, 1] = ey - edot * awy
        scr_herr[j, 2] = ez - edot * awz
        _ball_kinv(
            inv_mass[p], inv_inertia[p], rpx, rpy, rpz,
            inv_mass[c], inv_inertia[c], rcx, rcy, rcz,
            K, scr_kinv[j],
        )
        scr_llo[j] = 0.0
        scr_lhi[j] = 0.0

    for h in range(4):
        if not gactive[h]:
            continue
        p = ghand[h]
        c = gtarget[h]
        rpx, rpy, rpz = _rotate(rot, p, ganchor_own[h, 0], ganchor_own[h, 1], ganchor_own[h, 2])
        rcx, rcy, rcz = _rotate(rot, c, ganchor_opp[h, 0], ganchor_opp[h, 1], ganchor_opp[h, 2])
        scr_grp[h, 0] = rpx
        scr_grp[h, 1] = rpy
        scr_grp[h, 2] = rpz
        scr_grc[h, 0] = rcx
        scr_grc[h, 1] = rcy
        scr_grc[h, 2] = rcz
        scr_gcerr[h, 0] = (pos[c, 0] + rcx) - (pos[p, 0] + rpx)
        scr_gcerr[h, 1] = (pos[c, 1] + rcy) - (pos[p, 1] + rpy)
        scr_gcerr[h, 2] = (pos[c, 2] + rcz) - (pos[p, 2] + rpz)
        _ball_kinv(
            inv_mass[p], inv_inertia[p], rpx, rpy, rpz,
            inv_mass[c], inv_inertia[c], rcx, rcy, rcz,
            K, scr_gk[h],
        )

    for ci in range(ncon):
        a = c_a[ci]
        b = c_b[ci]
        rax = c_point[ci, 0] - pos[a, 0]
        ray = c_point[ci, 1] - pos[a, 1]
        raz = c_point[ci, 2] - pos[a, 2]
        scr_ra[ci, 0] = rax
        scr_ra[ci, 1] = ray
        scr_ra[ci, 2] = raz
        if b >= 0:
            rbx = c_point[ci, 0] - pos[b, 0]
            rby = c_point[ci, 1] - pos[b, 1]
            rbz = c_point[ci, 2] - pos[b, 2]
        else:
            rbx = 0.0
            rby = 0.0
            rbz = 0.0
        scr_rb[ci, 0] = rbx
        scr_rb[ci, 1] = rby
        scr_rb[ci, 2] = rbz
        nx = scr_n[ci, 0]
        ny = scr_n[ci, 1]
        nz = scr_n[ci, 2]
        vax = vel[a, 0] + angvel[a, 1] * raz - angvel[a, 2] * ray
        vay = vel[a, 1] + angvel[a, 2] * rax - angvel[a, 0] * raz
        vaz = vel[a, 2] + angvel[a, 0] * ray - angvel[a, 1] * rax
        if b >= 0:
            vax -= vel[b, 0] + angvel[b, 1] * rbz - angvel[b, 2] * rby
            vay -= vel[b, 1] + angvel[b, 2] * rbx - angvel[b, 0] * rbz
            vaz -= vel[b, 2] + angvel[b, 0] * rby - angvel[b, 1] * rbx
        vn = vax * nx + vay * ny + vaz * nz
        tx = vax - vn * nx
        ty = vay - vn * ny
        tz = vaz - vn * nz
        tmag2 = tx * tx + ty * ty + tz * tz
        if tmag2 > 1e-12:
            tmag = math.sqrt(tmag2)
            t1x = tx / tmag
            t1y = ty / tmag
            t1z = tz / tmag
            scr_t1[ci, 0] = t1x
            scr_t1[ci, 1] = t1y
            scr_t1[ci, 2] = t1z
            scr_t2[ci, 0] = ny * t1z - nz * t1y
            scr_t2[ci, 1] = nz * t1x - nx * t1z
            scr_t2[ci, 2] = nx * t1y - ny * t1x
            scr_fr[ci] = 1
        else:
            scr_fr[ci] = 0
            scr_t1[ci, 0] = 0.0
            scr_t1[ci, 1] = 0.0
            scr_t1[ci, 2] = 0.0
            scr_t2[ci, 0] = 0.0
            scr_t2[ci, 1] = 0.0
            scr_t2[ci, 2] = 0.0
        for which in range(3):
            if which == 0:
                dx = nx
                dy = ny
                dz = nz
            elif which == 1:
                dx = scr_t1[ci, 0]
                dy = scr_t1[ci, 1]
                dz = scr_t1[ci, 2]
            else:
                dx = scr_t2[ci, 0]
                dy = scr_t2[ci, 1]
                dz = scr_t2[ci, 2]
            cxa = ray * dz - raz * dy
            cya = raz * dx - rax * dz
            cza = rax * dy - ray * dx
            kk = inv_mass[a] + inv_inertia[a] * (cxa * cxa + cya * cya + cza * cza)
            if b >= 0:
                cxb = rby * dz - rbz * dy
                cyb = rbz * dx - rbx * dz
                czb = rbx * dy - rby * dx
                kk += inv_mass[b] + inv_inertia[b] * (cxb * cxb + cyb * cyb + czb * czb)
            if which == 0:
                scr_kn[ci] = kk
            else:
                scr_kt[ci, which - 1] = kk
        c_imp[ci] = 0.0
        scr_acc1[ci] = 0.0
        scr_acc2[ci] = 0.0

    # ---- stage 4: velocity impulse iterations ---------------------------------
    for _ in range(N_ITERS):
        for g in range(joint_groups.shape[0]):
            nb = 0
            for k in range(joint_groups.shape[1]):
                j = joint_groups[g, k]
                if j < 0 or not jintact[j]:
                    continue
                p = jparent[j]
                c = jchild[j]
                vpx = vel[p, 0]
                vpy = vel[p, 1]
                vpz = vel[p, 2]
                wpx = angvel[p, 0]
                wpy = angvel[p, 1]
                wpz = angvel[p, 2]
                vcx = vel[c, 0]
                vcy = vel[c, 1]
                vcz = vel[c, 2]
                wcx = angvel[c, 0]
                wcy = angvel[c, 1]
                wcz = angvel[c, 2]
                rpx = scr_rp[j, 0]
                rpy = scr_rp[j, 1]
                rpz = scr_rp[j, 2]
                rcx = scr_rc[j, 0]
                rcy = scr_rc[j, 1]
                rcz = scr_rc[j, 2]
                # ball row
                relx = (vcx + wcy * rcz - wcz * rcy) - (vpx + wpy * rpz - wpz * rpy)
                rely = (vcy + wcz * rcx - wcx * rcz) - (vpy + wpz * rpx - wpx * rpz)
                relz = (vcz + wcx * rcy - wcy * rcx) - (vpz + wpx * rpy - wpy * rpx)
                bx = -(relx + binv * scr_cerr[j, 0])
                by = -(rely + binv * scr_cerr[j, 1])
                bz = -(relz + binv * scr_cerr[j, 2])
                Ki = scr_kinv[j]
                Px = Ki[0, 0] * bx + Ki[0, 1] * by + Ki[0, 2] * bz
                Py = Ki[1, 0] * bx + Ki[1, 1] * by + Ki[1, 2] * bz
                Pz = Ki[2, 0] * bx + Ki[2, 1] * by + Ki[2, 2] * bz
                vcx += Px * inv_mass[c]
                vcy += Py * inv_mass[c]
                vcz += Pz * inv_mass[c]
                wcx += inv_inertia[c] * (rcy * Pz - rcz * Py)
                wcy += inv_inertia[c] * (rcz * Px - rcx * Pz)
                wcz += inv_inertia[c] * (rcx * Py - rcy * Px)
                vpx -= Px * inv_mass[p]
                vpy -= Py * inv_mass[p]
                vpz -= Pz * inv_mass[p]
                wpx -= inv_inertia[p] * (rpy * Pz - rpz * Py)
                wpy -= inv_inertia[p] * (rpz * Px - rpx * Pz)
                wpz -= inv_inertia[p] * (rpx * Py - rpy * Px)
                # hinge alignment rows
                awx = scr_ax[j, 0]
                awy = scr_ax[j, 1]
                awz = scr_ax[j, 2]
                kang = inv_inertia[p] + inv_inertia[c]
                wrx = wcx - wpx
                wry = wcy - wpy
                wrz = wcz - wpz
                wdot = wrx * awx + wry * awy + wrz * awz
                px2 = -((wrx - wdot * awx) + binv * scr_herr[j, 0]) / kang
                py2 = -((wry - wdot * awy) + binv * scr_herr[j, 1]) / kang
                pz2 = -((wrz - wdot * awz) + binv * scr_herr[j, 2]) / kang
                wcx += px2 * inv_inertia[c]
                wcy += py2 * inv_inertia[c]
                wcz += pz2 * inv_inertia[c]
                wpx -= px2 * inv_inertia[p]
                wpy -= py2 * inv_inertia[p]
                wpz -= pz2 * inv_inertia[p]
                # angle limit rows
                th = scr_jang[j]
                if th < jlo[j]:
                    sdot = (wcx - wpx) * awx + (wcy - wpy) * awy + (wcz - wpz) * awz
                    target = -binv * (th - jlo[j])
                    dl = (target - sdot) / kang
                    newacc = scr_llo[j] + dl
                    if newacc < 0.0:
                        newacc = 0.0
                    dl = newacc - scr_llo[j]
                    scr_llo[j] = newacc
                    wcx += dl * inv_inertia[c] * awx
                    wcy += dl * inv_inertia[c] * awy
                    wcz += dl * inv_inertia[c] * awz
                    wpx -= dl * inv_inertia[p] * awx
                    wpy -= dl * inv_inertia[p] * awy
                    wpz -= dl * inv_inertia[p] * awz
                elif th > jhi[j]:
                    sdot = (wcx - wpx) * awx + (wcy - wpy) * awy + (wcz - wpz) * awz
                    target = -binv * (th - jhi[j])
                    dl = (target - sdot) / kang
                    newacc = scr_lhi[j] + dl
                    if newacc > 0.0:
                        newacc = 0.0
                    dl = newacc - scr_lhi[j]
                    scr_lhi[j] = newacc
                    wcx += dl * inv_inertia[c] * awx
                    wcy += dl * inv_inertia[c] * awy
                    wcz += dl * inv_inertia[c] * awz
                    wpx -= dl * inv_inertia[p] * awx
                    wpy -= dl * inv_inertia[p] * awy
                    wpz -= dl * inv_inertia[p] * awz
                nb = _acc(
                    bid, bdv, bdw, nb, p,
                    vpx - vel[p, 0], vpy - vel[p, 1], vpz - vel[p, 2],
                    wpx - angvel[p, 0], wpy - angvel[p, 1], wpz - angvel[p, 2],
                )
                nb = _acc(
                    bid, bdv, bdw, nb, c,
                    vcx - vel[c, 0], vcy - vel[c, 1], vcz - vel[c, 2],
                    wcx - angvel[c, 0], wcy - angvel[c, 1], wcz - angvel[c, 2],
                )
            _flush_vel(bid, bdv, bdw, nb, vel, angvel)

        # grip attachments (one group, hand-slot order)
        nb = 0
        for h in range(4):
            if not gactive[h]:
                continue
            p = ghand[h]
            c = gtarget[h]
            rpx = scr_grp[h, 0]
            rpy = scr_grp[h, 1]
            rpz = scr_grp[h, 2]
            rcx = scr_grc[h, 0]
            rcy = scr_grc[h, 1]
            rcz = scr_grc[h, 2]
            relx = (vel[c, 0] + angvel[c, 1] * rcz - angvel[c, 2] * rcy) - (vel[p, 0] + angvel[p, 1] * rpz - angvel[p, 2] * rpy)
            rely = (vel[c, 1] + angvel[c, 2] * rcx - angvel[c, 0] * rcz) - (vel[p, 1] + angvel[p, 2] * rpx - angvel[p, 0] * rpz)
            relz = (vel[c, 2] + angvel[c, 0] * rcy - angvel[c, 1] * rcx) - (vel[p, 2] + angvel[p, 0] * rpy - angvel[p, 1] * rpx)
            bx = -(relx + binv * scr_gcerr[h, 0])
            by = -(rely + binv * scr_gcerr[h, 1])
            bz = -(relz + binv * scr_gcerr[h, 2])
            Ki = scr_gk[h]
            Px = Ki[0, 0] * bx + Ki[0, 1] * by + Ki[0, 2] * bz
            Py = Ki[1, 0] * bx + Ki[1, 1] * by + Ki[1, 2] * bz
            Pz = Ki[2, 0] * bx + Ki[2, 1] * by + Ki[2, 2] * bz
            nb = _acc(
                bid, bdv, bdw, nb, c,
                Px * inv_mass[c], Py * inv_mass[c], Pz * inv_mass[c],
                inv_inertia[c] * (rcy * Pz - rcz * Py),
                inv_inertia[c] * (rcz * Px - rcx * Pz),
                inv_inertia[c] * (rcx * Py - rcy * Px),
            )
            nb = _acc(
                bid, bdv, bdw, nb, p,
                -Px * inv_mass[p], -Py * inv_mass[p], -Pz * inv_mass[p],
                -inv_inertia[p] * (rpy * Pz - rpz * Py),
                -inv_inertia[p] * (rpz * Px - rpx * Pz),
                -inv_inertia[p] * (rpx * Py - rpy * Px),
            )
        _flush_vel(bid, bdv, bdw, nb, vel, angvel)

        # contacts: ground contacts are mutually disjoint (single-member
        # groups); inter-player contacts group by the sorted key ranges.
        ci = 0
        while ci < ncon:
            if ci < nground:
                gend = ci + 1
            else:
                gend = ci + 1
                while gend < ncon and scr_key[gend] == scr_key[ci]:
                    gend += 1
            nb = 0
            for cc in range(ci, gend):
                a = c_a[cc]
                b = c_b[cc]
                rax = scr_ra[cc, 0]
                ray = scr_ra[cc, 1]
                raz = scr_ra[cc, 2]
                rbx = scr_rb[cc, 0]
                rby = scr_rb[cc, 1]
                rbz = scr_rb[cc, 2]
                vax = vel[a, 0] + angvel[a, 1] * raz - angvel[a, 2] * ray
                vay = vel[a, 1] + angvel[a, 2] * rax - angvel[a, 0] * raz
                vaz = vel[a, 2] + angvel[a, 0] * ray - angvel[a, 1] * rax
                if b >= 0:
                    vax -= vel[b, 0] + angvel[b, 1] * rbz - angvel[b, 2] * rby
                    vay -= vel[b, 1] + angvel[b, 2] * rbx - angvel[b, 0] * rbz
                    vaz -= vel[b, 2] + angvel[b, 0] * rby - angvel[b, 1] * rbx
                nx = scr_n[cc, 0]
                ny = scr_n[cc, 1]
                nz = scr_n[cc, 2]
                vn = vax * nx + vay * ny + vaz * nz
                pen = c_depth[cc] - CONTACT_SLOP
                bias = 0.0
                if pen > 0.0:
                    bias = binv * pen
                dl = -(vn - bias) / scr_kn[cc]
                newacc = c_imp[cc] + dl
                if newacc < 0.0:
                    newacc = 0.0
                dl = newacc - c_imp[cc]
                c_imp[cc] = newacc
                Px = dl * nx
                Py = dl * ny
                Pz = dl * nz
                if scr_fr[cc] == 1:
                    vt1 = vax * scr_t1[cc, 0] + vay * scr_t1[cc, 1] + vaz * scr_t1[cc, 2]
                    dl1 = -vt1 / scr_kt[cc, 0]
                    hi = FRICTION_MU * c_imp[cc]
                    new1 = scr_acc1[cc] + dl1
                    if new1 > hi:
                        new1 = hi
                    elif new1 < -hi:
                        new1 = -hi
                    dl1 = new1 - scr_acc1[cc]
                    scr_acc1[cc] = new1
                    vt2 = vax * scr_t2[cc, 0] + vay * scr_t2[cc, 1] + vaz * scr_t2[cc, 2]
                    dl2 = -vt2 / scr_kt[cc, 1]
                    new2 = scr_acc2[cc] + dl2
                    if new2 > hi:
                        new2 = hi
                    elif new2 < -hi:
                        new2 = -hi
                    dl2 = new2 - scr_acc2[cc]
                    scr_acc2[cc] = new2
                    Px += dl1 * scr_t1[cc, 0] + dl2 * scr_t2[cc, 0]
                    Py += dl1 * scr_t1[cc, 1] + dl2 * scr_t2[cc, 1]
                    Pz += dl1 * scr_t1[cc, 2] + dl2 * scr_t2[cc, 2]
                rlx = 0.0
                rly = 0.0
                rlz = 0.0
                if b < 0:
                    # rolling resistance against the part's angular velocity
                    wax = angvel[a, 0]
                    way = angvel[a, 1]
                    waz = angvel[a, 2]
                    wmag = math.sqrt(wax * wax + way * way + waz * waz)
                    if wmag > 1e-12:
                        lneed = wmag / inv_inertia[a]
                        cap = MU_ROLL * c_imp[cc] * radius[a]
                        lmag = lneed if lneed < cap else cap
                        rlx = -lmag * wax / wmag
                        rly = -lmag * way / wmag
                        rlz = -lmag * waz / wmag
                nb = _acc(
                    bid, bdv, bdw, nb, a,
                    Px * inv_mass[a], Py * inv_mass[a], Pz * inv_mass[a],
                    inv_inertia[a] * (ray * Pz - raz * Py) + inv_inertia[a] * rlx,
                    inv_inertia[a] * (raz * Px - rax * Pz) + inv_inertia[a] * rly,
                    inv_inertia[a] * (rax * Py - ray * Px) + inv_inertia[a] * rlz,
                )
                if b >= 0:
                    nb = _acc(
                        bid, bdv, bdw, nb, b,
                        -Px * inv_mass[b], -Py * inv_mass[b], -Pz * inv_mass[b],
                        -inv_inertia[b] * (rby * Pz - rbz * Py),
                        -inv_inertia[b] * (rbz * Px - rbx * Pz),
                        -inv_inertia[b] * (rbx * Py - rby * Px),
                    )
            _flush_vel(bid, bdv, bdw, nb, vel, angvel)
            ci = gend

    # ---- stage 4b: positional projection for joints ----------------------------
    for _ in range(N_PROJ_PASSES):
        for g in range(joint_groups.shape[0]):
            nb = 0
            for k in range(joint_groups.shape[1]):
                j = joint_groups[g, k]
                if j < 0 or not jintact[j]:
                    continue
                p = jparent[j]
                c = jchild[j]
                wsum = inv_inertia[p] + inv_inertia[c]
                rvpx = 0.0
                rvpy = 0.0
                rvpz = 0.0
                rvcx = 0.0
                rvcy = 0.0
                rvcz = 0.0
                # axis alignment
                apx, apy, apz = _rotate(rot, p, jaxis[j, 0], jaxis[j, 1], jaxis[j, 2])
                acx, acy, acz = _rotate(rot, c, jaxis[j, 0], jaxis[j, 1], jaxis[j, 2])
                ex = apy * acz - apz * acy
                ey = apz * acx - apx * acz
                ez = apx * acy - apy * acx
                emag = math.sqrt(ex * ex + ey * ey + ez * ez)
                if emag > 1e-12:
                    adot = apx * acx + apy * acy + apz * acz
                    phi = math.atan2(emag, adot)
                    ux = ex / emag
                    uy = ey / emag
                    uz = ez / emag
                    phic = phi * (inv_inertia[c] / wsum)
                    phip = phi * (inv_inertia[p] / wsum)
                    rvcx -= phic * ux
                    rvcy -= phic * uy
                    rvcz -= phic * uz
                    rvpx += phip * ux
                    rvpy += phip * uy
                    rvpz += phip * uz
                # angle limit clamp
                th = joint_angle(
                    rot, p, c,
                    jaxis[j, 0], jaxis[j, 1], jaxis[j, 2],
                    juref[j, 0], juref[j, 1], juref[j, 2],
                )
                clamped = th
                if th < jlo[j]:
                    clamped = jlo[j]
                elif th > jhi[j]:
                    clamped = jhi[j]
                if clamped != th:
                    dth = clamped - th
                    awx, awy, awz = _rotate(rot, p, jaxis[j, 0], jaxis[j, 1], jaxis[j, 2])
                    nrm = math.sqrt(awx * awx + awy * awy + awz * awz)
                    awx /= nrm
                    awy /= nrm
                    awz /= nrm
                    dthc = dth * (inv_inertia[c] / wsum)
                    dthp = -dth * (inv_inertia[p] / wsum)
                    rvcx += dthc * awx
                    rvcy += dthc * awy
                    rvcz += dthc * awz
                    rvpx += dthp * awx
                    rvpy += dthp * awy
                    rvpz += dthp * awz
                # anchor snap
                rpx, rpy, rpz = _rotate(rot, p, janchor_p[j, 0], janchor_p[j, 1], janchor_p[j, 2])
                rcx, rcy, rcz = _rotate(rot, c, janchor_c[j, 0], janchor_c[j, 1], janchor_c[j, 2])
                cx = (pos[c, 0] + rcx) - (pos[p, 0] + rpx)
                cy = (pos[c, 1] + rcy) - (pos[p, 1] + rpy)
                cz = (pos[c, 2] + rcz) - (pos[p, 2] + rpz)
                msum = inv_mass[p] + inv_mass[c]
                fc = inv_mass[c] / msum
                fp = inv_mass[p] / msum
                nb = _acc(bid, bdv, bdw, nb, p, fp * cx, fp * cy, fp * cz, rvpx, rvpy, rvpz)
                nb = _acc(bid, bdv, bdw, nb, c, -fc * cx, -fc * cy, -fc * cz, rvcx, rvcy, rvcz)
            # flush: positions plus accumulated rotation vectors
            for q in range(nb):
                body = bid[q]
                pos[body, 0] += bdv[q, 0]
                pos[body, 1] += bdv[q, 1]
                pos[body, 2] += bdv[q, 2]
                rmag = math.sqrt(bdw[q, 0] * bdw[q, 0] + bdw[q, 1] * bdw[q, 1] + bdw[q, 2] * bdw[q, 2])
                if rmag > 1e-15:
                    _apply_axis_angle(rot, body, bdw[q, 0] / rmag, bdw[q, 1] / rmag, bdw[q, 2] / rmag, rmag)

    # ---- fault scan -------------------------------------------------------------
    fault = False
    for i in range(n):
        for k in range(3):
            if not (math.isfinite(pos[i, k]) and math.isfinite(vel[i, k]) and math.isfinite(angvel[i, k])):
                fault = True
            for kk in range(3):
                if not math.isfinite(rot[i, k, kk]):
                    fault = True
    return ncon, nground, fault
