"""Quaternion, axis-angle and matrix forms of 2D and 3D rotations.

Quaternions are stored scalar-first, q = (q0, q1, q2, q3), and 2D half-angle
pairs as p = (a, b) = (cos(theta/2), sin(theta/2)).  Functions accept stacks
with the component axis last.
"""

from __future__ import annotations

import numpy as np

from .errors import AxisNotUnit, NotUnit

UNIT_TOL = 1e-9
SIGN_TIE_TOL = 1e-10


def _check_unit(v, exc=NotUnit, tol=UNIT_TOL, what="quaternion"):
    v = np.asarray(v, dtype=float)
    if np.any(np.abs(np.sum(v * v, axis=-1) - 1.0) > tol):
        raise exc(f"{what} is not unit length")
    return v


def canonical_sign(q, tie_tol=SIGN_TIE_TOL) -> np.ndarray:
    """Choose the representative of +-q with q0 > 0.

    When |q0| < tie_tol the first component whose magnitude exceeds tie_tol
    is made positive instead.
    """
    q = np.asarray(q, dtype=float)
    big = np.abs(q) >= tie_tol
    first = np.argmax(big, axis=-1)
    lead = np.take_along_axis(q, first[..., None], axis=-1)[..., 0]
    return np.where((lead < 0)[..., None], -q, q)


def quat_mul(a, b) -> np.ndarray:
    """Hamilton product a * b; R(a * b) = R(a) R(b)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a0, a1, a2, a3 = np.moveaxis(a, -1, 0)
    b0, b1, b2, b3 = np.moveaxis(b, -1, 0)
    return np.stack([
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    ], axis=-1)


def quat_conj(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def rot3_from_quat_unchecked(q) -> np.ndarray:
    """R(q) from the quadratic forms, without the unit-norm check."""
    q = np.asarray(q, dtype=float)
    q0, q1, q2, q3 = np.moveaxis(q, -1, 0)
    r = np.empty(q.shape[:-1] + (3, 3))
    r[..., 0, 0] = q0 * q0 + q1 * q1 - q2 * q2 - q3 * q3
    r[..., 0, 1] = 2 * q1 * q2 - 2 * q0 * q3
    r[..., 0, 2] = 2 * q1 * q3 + 2 * q0 * q2
    r[..., 1, 0] = 2 * q1 * q2 + 2 * q0 * q3
    r[..., 1, 1] = q0 * q0 - q1 * q1 + q2 * q2 - q3 * q3
    r[..., 1, 2] = 2 * q2 * q3 - 2 * q0 * q1
    r[..., 2, 0] = 2 * q1 * q3 - 2 * q0 * q2
    r[..., 2, 1] = 2 * q2 * q3 + 2 * q0 * q1
    r[..., 2, 2] = q0 * q0 - q1 * q1 - q2 * q2 + q3 * q3
    return r


def rot3_from_quat(q) -> np.ndarray:
    """Proper rotation matrix of a unit quaternion; R(q) = R(-q)."""
    return rot3_from_quat_unchecked(_check_unit(q))


def quat_from_axis_angle(theta, axis) -> np.ndarray:
    """q = (cos(theta/2), sin(theta/2) n), covering theta in [0, 4pi)."""
    axis = _check_unit(axis, AxisNotUnit, what="axis")
    theta = np.asarray(theta, dtype=float)
    half = 0.5 * theta
    return np.concatenate([np.cos(half)[..., None], np.sin(half)[..., None] * axis], axis=-1)


def rot3_from_axis_angle(theta, axis) -> np.ndarray:
    """Axis-angle rotation matrix written with c = cos(theta), s = sin(theta)."""
    n = _check_unit(axis, AxisNotUnit, what="axis")
    theta = np.asarray(theta, dtype=float)
    c = np.cos(theta)[..., None, None]
    s = np.sin(theta)[..., None, None]
    nn = n[..., :, None] * n[..., None, :]
    cross = np.zeros(n.shape[:-1] + (3, 3))
    cross[..., 0, 1] = -n[..., 2]
    cross[..., 0, 2] = n[..., 1]
    cross[..., 1, 0] = n[..., 2]
    cross[..., 1, 2] = -n[..., 0]
    cross[..., 2, 0] = -n[..., 1]
    cross[..., 2, 1] = n[..., 0]
    return c * np.eye(3) + (1 - c) * nn + s * cross


def axis_angle_from_quat(q):
    """Return (theta, axis) with theta in [0, 4pi); axis is z for the identity."""
    q = _check_unit(q)
    v = q[..., 1:]
    sn = np.linalg.norm(v, axis=-1)
    theta = np.mod(2.0 * np.arctan2(sn, q[..., 0]), 4 * np.pi)
    with np.errstate(invalid="ignore", divide="ignore"):
        axis = np.where(sn[..., None] > 0, v / sn[..., None], np.array([0.0, 0.0, 1.0]))
    return theta, axis


def rot2_from_quat2(p) -> np.ndarray:
    """R(a, b) = [[a^2 - b^2, -2ab], [2ab, a^2 - b^2]]."""
    p = _check_unit(p, what="half-angle pair")
    a, b = p[..., 0], p[..., 1]
    c = a * a - b * b
    s = 2 * a * b
    return rot2_from_cs(c, s)


def rot2_from_cs(c, s) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    s = np.asarray(s, dtype=float)
    return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)


def rot2_from_angle(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    return rot2_from_cs(np.cos(theta), np.sin(theta))


def quat2_from_angle(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    return np.stack([np.cos(theta / 2), np.sin(theta / 2)], -1)


def is_rotation3(r, tol=1e-12) -> bool:
    r = np.asarray(r, dtype=float)
    ortho = np.abs(np.swapaxes(r, -1, -2) @ r - np.eye(3)).max() <= tol
    return bool(ortho and np.all(np.abs(np.linalg.det(r) - 1.0) <= tol))


def _shepperd_one(m):
    tr = m[0, 0] + m[1, 1] + m[2, 2]
    if tr > 0:
        s = np.sqrt(tr + 1)
        q0 = s / 2
        s = 1 / (2 * s)
        q1 = (m[2, 1] - m[1, 2]) * s
        q2 = (m[0, 2] - m[2, 0]) * s
        q3 = (m[1, 0] - m[0, 1]) * s
    elif m[0, 0] >= m[1, 1] and m[0, 0] >= m[2, 2]:
        s = np.sqrt(m[0, 0] - m[1, 1] - m[2, 2] + 1)
        q1 = s / 2
        s = 1 / (2 * s)
        q0 = (m[2, 1] - m[1, 2]) * s
        q2 = (m[1, 0] + m[0, 1]) * s
        q3 = (m[0, 2] + m[2, 0]) * s
    elif m[0, 0] < m[1, 1] and m[0, 0] >= m[2, 2]:
        s = np.sqrt(m[1, 1] - m[2, 2] - m[0, 0] + 1)
        q2 = s / 2
        s = 1 / (2 * s)
        q0 = (m[0, 2] - m[2, 0]) * s
        q3 = (m[2, 1] + m[1, 2]) * s
        q1 = (m[1, 0] + m[0, 1]) * s
    else:
        s = np.sqrt(m[2, 2] - m[0, 0] - m[1, 1] + 1)
        q3 = s / 2
        s = 1 / (2 * s)
        q0 = (m[1, 0] - m[0, 1]) * s
        q1 = (m[0, 2] + m[2, 0]) * s
        q2 = (m[2, 1] + m[1, 2]) * s
    q = np.array([q0, q1, q2, q3])
    return q / np.linalg.norm(q)


def shepperd_extract(r) -> np.ndarray:
    """Classic branchy trace/diagonal extraction of a quaternion from R.

    The branch order is: positive trace, then m11 largest, then m22 (tested
    as m11 < m22 and m11 >= m33), otherwise m33.  The result is normalized
    and sign-canonicalized.  Measured matrices are accepted, but the output
    is only meaningful for near-orthonormal input.
    """
    r = np.asarray(r, dtype=float)
    flat = r.reshape(-1, 3, 3)
    out = np.array([_shepperd_one(m) for m in flat]).reshape(r.shape[:-2] + (4,))
    return canonical_sign(out)
