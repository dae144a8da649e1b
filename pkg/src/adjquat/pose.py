"""Pose estimation: rotation of a reference cloud from its lower-dimensional image.

2D -> 1D and 3D -> 2D orthographic pose have closed forms in subdeterminants
of the cross-covariance array.  The raw least-squares projection is then
corrected to a true rotation through the adjugate of its profile matrix.
Perspective pose reuses the orthographic answer and fits the focal length
separately.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .errors import (
    AmbiguousPose,
    CameraInsideCloud,
    DegenerateReference,
    DepthDegenerate,
    NoRootInBracket,
    NotUnit,
    ShapeMismatch,
)
from .extract import extract_from_profile
from .linalg import det
from .match import as_cloud
from .rotations import UNIT_TOL, rot3_from_quat_unchecked

D1_REL_2D = 1e-14
D1_REL_3D = 1e-12
DEPTH_REL = 1e-9


@dataclass(frozen=True)
class Pose2DResult:
    alpha: float
    beta: float
    gamma: float
    r: np.ndarray
    loss: float
    p_tilde: np.ndarray


@dataclass(frozen=True)
class CovDet3:
    d1: float
    d2: float
    d3: float
    d4: float
    d5: float
    d6: float
    d7: float
    d8: float
    d9: float
    d10: float

    def as_array(self) -> np.ndarray:
        return np.array([self.d1, self.d2, self.d3, self.d4, self.d5,
                         self.d6, self.d7, self.d8, self.d9, self.d10])


@dataclass(frozen=True)
class CloudAtOrigin:
    """Cloud centred at the origin, pinhole at (0, 0, 1/fbar) looking down."""

    fbar: float = 0.0

    def __post_init__(self):
        if not self.fbar >= 0:
            raise ValueError("fbar must be >= 0")


@dataclass(frozen=True)
class CameraAtOrigin:
    """Pinhole at the origin, image plane z = f, cloud centre at (0, 0, depth).

    ``depth`` defaults to f, so the cloud centre sits on the unit
    magnification plane.
    """

    f: float = 1.0
    depth: float | None = None

    def __post_init__(self):
        if not self.f > 0:
            raise ValueError("f must be > 0")

    @property
    def distance(self) -> float:
        return self.f if self.depth is None else self.depth


@dataclass(frozen=True)
class PoseSolution:
    r_tilde: np.ndarray
    q_opt: np.ndarray
    r_bi: np.ndarray
    loss_raw: float
    loss_bi: float
    adjugate: np.ndarray
    lambda_opt: float
    clean_adjugate: np.ndarray | None = None
    focal: float | None = None
    camera: object | None = None


def _sums(a, b):
    return float(np.dot(a, b))


# --- 2D ------------------------------------------------------------------


def pose2d(x, u) -> Pose2DResult:
    """Rotation whose top row best maps a 2D cloud onto its 1D image.

    d1 = xx yy - xy^2, d2 = ux yy - uy xy, d3 = ux xy - uy xx.  The raw
    projection is [d2, -d3] / d1 and the rotation [[d2, -d3], [d3, d2]]
    normalized.
    """
    x = as_cloud(x, (2,))
    u = np.asarray(u, dtype=float).reshape(-1)
    if u.shape[0] != x.shape[1]:
        raise ShapeMismatch("image and cloud point counts differ")
    xs, ys = x
    xx, yy, xy = _sums(xs, xs), _sums(ys, ys), _sums(xs, ys)
    ux, uy = _sums(u, xs), _sums(u, ys)
    d1 = xx * yy - xy * xy
    if d1 <= D1_REL_2D * (xx + yy) ** 2:
        raise DegenerateReference("collinear reference cloud (d1 ~ 0)")
    d2 = ux * yy - uy * xy
    d3 = ux * xy - uy * xx
    nrm2 = d2 * d2 + d3 * d3
    if nrm2 <= 1e-28 * d1 * d1:
        raise AmbiguousPose("d2 and d3 both vanish")
    alpha = 0.5 * (1 + d2 / d1)
    beta = 0.5 * (1 - d2 / d1)
    gamma = 0.5 * d3 / d1
    r = np.array([[d2, -d3], [d3, d2]]) / np.sqrt(nrm2)
    loss = float(np.sum((r[0] @ x - u) ** 2))
    return Pose2DResult(alpha, beta, gamma, r, loss, np.array([d2, -d3]) / d1)


# --- 3D orthographic -------------------------------------------------------


def ortho_project(r, x) -> np.ndarray:
    """Image u_k = top two rows of r applied to x_k."""
    return np.asarray(r, dtype=float)[:2] @ as_cloud(x, (3,))


def ortho_pose_loss(r, x, u) -> float:
    """sum_k |P x_k - u_k|^2 with P the top two rows of r (any 3x3 matrix)."""
    return float(np.sum((ortho_project(r, x) - np.asarray(u, dtype=float)) ** 2))


_X, _Y, _Z, _U, _V = range(5)
_DET_COLS = (
    (_X, _Y, _Z),  # d1
    (_X, _Y, _U),  # d2
    (_X, _Y, _V),  # d3
    (_X, _Z, _U),  # d4
    (_X, _Z, _V),  # d5
    (_X, _U, _V),  # d6
    (_Y, _Z, _U),  # d7
    (_Y, _Z, _V),  # d8
    (_Y, _U, _V),  # d9
    (_Z, _U, _V),  # d10
)


def cross_cov5(x, u) -> np.ndarray:
    """5x5 array of all summed products over (x, y, z, u, v)."""
    x = as_cloud(x, (3,))
    u = as_cloud(u, (2,))
    if x.shape[1] != u.shape[1]:
        raise ShapeMismatch("image and cloud point counts differ")
    z = np.vstack([x, u])
    return z @ z.T


def cov_determinants3(x, u) -> CovDet3:
    """The ten 3x3 subdeterminants with rows (x, y, z) of the 5x5 covariance."""
    c = cross_cov5(x, u)
    rows = c[:3]
    return CovDet3(*(float(det(rows[:, list(cols)])) for cols in _DET_COLS))


def _check_d1(x, d):
    g = np.sum(np.asarray(x, dtype=float) ** 2)
    if d.d1 <= D1_REL_3D * g ** 3:
        raise DegenerateReference("reference cloud is planar or collinear (d1 ~ 0)")


def pose3d_ortho_raw(x, u):
    """Least-squares 3x3 matrix and clean adjugate variables from d1..d10.

    Returns (r_tilde, clean) with clean the symmetric 4x4 adjugate whose
    entries are the q_i q_j expressed through the determinants.
    """
    x = as_cloud(x, (3,))
    d = cov_determinants3(x, u)
    _check_d1(x, d)
    d1, d2, d3, d4, d5, d6, d7, d8, d9, d10 = d.as_array()
    r_tilde = np.array([[d7, -d4, d2], [d8, -d5, d3], [d6, d9, d10]]) / d1
    diag = np.array([d1 + d10 - d5 + d7, d1 - d10 + d5 + d7,
                     d1 - d10 - d5 - d7, d1 + d10 + d5 - d7])
    clean = np.diag(diag)
    clean[0, 1] = clean[1, 0] = d9 - d3
    clean[0, 2] = clean[2, 0] = d2 - d6
    clean[0, 3] = clean[3, 0] = d4 + d8
    clean[1, 2] = clean[2, 1] = d8 - d4
    clean[1, 3] = clean[3, 1] = d2 + d6
    clean[2, 3] = clean[3, 2] = d3 + d9
    return r_tilde, clean / (4 * d1)


def pose_profile_matrix(d: CovDet3) -> np.ndarray:
    """Profile matrix of the raw pose matrix, written in d1..d10.

    Equal to K0(r_tilde): its maximal eigenvector is the quaternion of the
    rotation closest to r_tilde in the Frobenius norm.
    """
    d1, d2, d3, d4, d5, d6, d7, d8, d9, d10 = d.as_array()
    m = np.diag([d7 - d5 + d10, d7 + d5 - d10, -d7 - d5 - d10, -d7 + d5 + d10])
    m[0, 1] = m[1, 0] = d9 - d3
    m[0, 2] = m[2, 0] = d2 - d6
    m[0, 3] = m[3, 0] = d8 + d4
    m[1, 2] = m[2, 1] = d8 - d4
    m[1, 3] = m[3, 1] = d6 + d2
    m[2, 3] = m[3, 2] = d3 + d9
    return m / d1


def pose3d_ortho(x, u) -> PoseSolution:
    """Orthographic 3D pose: raw least squares, then the closest rotation."""
    x = as_cloud(x, (3,))
    u = as_cloud(u, (2,))
    r_tilde, clean = pose3d_ortho_raw(x, u)
    m = pose_profile_matrix(cov_determinants3(x, u))
    adj, lam, _, q = extract_from_profile(m)
    r_bi = rot3_from_quat_unchecked(q)
    return PoseSolution(
        r_tilde=r_tilde,
        q_opt=q,
        r_bi=r_bi,
        loss_raw=ortho_pose_loss(r_tilde, x, u),
        loss_bi=ortho_pose_loss(r_bi, x, u),
        adjugate=adj,
        lambda_opt=float(lam),
        clean_adjugate=clean,
    )


# --- perspective -------------------------------------------------------------


def _denominators(r, cam, x):
    y = np.asarray(r, dtype=float) @ x
    if isinstance(cam, CloudAtOrigin):
        return y, 1.0 - cam.fbar * y[2], 1.0
    if isinstance(cam, CameraAtOrigin):
        return y, cam.distance + y[2], cam.f
    raise TypeError(f"unknown camera convention {cam!r}")


def _check_depth(den, x):
    bound = DEPTH_REL * max(np.linalg.norm(x), 1.0)
    if np.any(np.abs(den) <= bound) or np.any(np.sign(den) != np.sign(den[0])):
        raise CameraInsideCloud("depth denominator vanishes or changes sign")


def perspective_project(r, cam, x) -> np.ndarray:
    """Pinhole image of x under rotation r, using the third row of r for depth.

    CloudAtOrigin:  u = P x / (1 - fbar D x)
    CameraAtOrigin: u = f P x / (depth + D x)
    """
    x = as_cloud(x, (3,))
    y, den, scale = _denominators(r, cam, x)
    _check_depth(den, x)
    return scale * y[:2] / den


def perspective_loss(r, cam, x, u) -> float:
    return float(np.sum((perspective_project(r, cam, x) - np.asarray(u, dtype=float)) ** 2))


def _fbar_terms(y, u, fbar):
    den = 1.0 - fbar * y[2]
    img = y[:2] / den
    res = img - u
    d_img = y[:2] * y[2] / den ** 2
    dd_img = 2.0 * y[:2] * y[2] ** 2 / den ** 3
    s = np.sum(res ** 2)
    ds = 2.0 * np.sum(res * d_img)
    dds = 2.0 * np.sum(d_img ** 2 + res * dd_img)
    return s, ds, dds


def solve_focal_length(r, cam, x, u, bracket=None, scan=256, newton_steps=4) -> float:
    """Focal parameter minimizing the perspective loss for a fixed rotation.

    CameraAtOrigin returns f in closed form,
        f = sum((u x' + v y') / z') / sum((x'^2 + y'^2) / z'^2).
    CloudAtOrigin returns fbar: stationary points of S(fbar) are bracketed
    by a scan, refined with Brent's method and Newton steps, and the one with
    the least loss (then the smaller fbar) wins.
    """
    x = as_cloud(x, (3,))
    u = as_cloud(u, (2,))
    y = np.asarray(r, dtype=float) @ x
    if isinstance(cam, CameraAtOrigin):
        z = cam.distance + y[2]
        _check_depth(z, x)
        num = np.sum((u[0] * y[0] + u[1] * y[1]) / z)
        den = np.sum((y[0] ** 2 + y[1] ** 2) / z ** 2)
        if den <= 1e-300:
            raise DepthDegenerate("image-plane coordinates vanish")
        return float(num / den)
    if not isinstance(cam, CloudAtOrigin):
        raise TypeError(f"unknown camera convention {cam!r}")

    if bracket is None:
        zmax = y[2].max()
        hi = 0.999 / zmax if zmax > 0 else 1e3
        bracket = (0.0, hi)
    lo, hi = bracket
    if np.any(1.0 - np.array([lo, hi])[:, None] * y[2] <= 0):
        raise DepthDegenerate("bracket reaches a depth singularity")
    grid = np.linspace(lo, hi, scan)
    ds = np.array([_fbar_terms(y, u, g)[1] for g in grid])
    roots = []
    for a, b, da, db in zip(grid[:-1], grid[1:], ds[:-1], ds[1:]):
        if da == 0.0:
            roots.append(a)
        elif da < 0 < db:
            roots.append(brentq(lambda t: _fbar_terms(y, u, t)[1], a, b, xtol=1e-15, rtol=1e-15))
    if ds[-1] == 0.0:
        roots.append(hi)
    if not roots:
        raise NoRootInBracket(f"no minimum of S(fbar) in [{lo}, {hi}]")
    polished = []
    for t in roots:
        for _ in range(newton_steps):
            _, d1, d2 = _fbar_terms(y, u, t)
            if d2 <= 0:
                break
            nt = t - d1 / d2
            if not lo <= nt <= hi:
                break
            t = nt
        polished.append((_fbar_terms(y, u, t)[0], t))
    return float(min(polished)[1])


def with_focal(cam, value):
    if isinstance(cam, CameraAtOrigin):
        return replace(cam, f=value, depth=cam.distance)
    return replace(cam, fbar=value)


def _safe_persp_loss(r, cam, x, u) -> float:
    y, den, scale = _denominators(r, cam, x)
    if np.any(den <= 0):
        return float("nan")
    return float(np.sum((scale * y[:2] / den - u) ** 2))


def pose3d_perspective(x, u, cam, refine: int = 0) -> PoseSolution:
    """Three-step perspective pose.

    1. raw orthographic least squares on the image,
    2. closest rotation to it,
    3. focal length (or fbar) for that rotation held fixed.

    With ``refine`` > 0 the image is de-perspectivized using the current
    rotation and focal estimate and the three steps are repeated.  The
    camera's focal value is only used as the starting guess; for
    CameraAtOrigin its depth is treated as known.
    """
    x = as_cloud(x, (3,))
    u = as_cloud(u, (2,))
    work = u
    cam_fit = cam
    sol = None
    for _ in range(refine + 1):
        sol = pose3d_ortho(x, work)
        focal = solve_focal_length(sol.r_bi, cam_fit, x, u)
        cam_fit = with_focal(cam_fit, focal)
        y, den, scale = _denominators(sol.r_bi, cam_fit, x)
        work = u * den / scale
    return replace(
        sol,
        loss_raw=_safe_persp_loss(sol.r_tilde, cam_fit, x, u),
        loss_bi=perspective_loss(sol.r_bi, cam_fit, x, u),
        focal=focal,
        camera=cam_fit,
    )


# --- error metric -------------------------------------------------------------


def _unit(q):
    q = np.asarray(q, dtype=float)
    if abs(q @ q - 1.0) > UNIT_TOL:
        raise NotUnit("quaternion is not unit length")
    return q


def rotation_error(q_a, q_b) -> float:
    """Angle 2 arccos|q_a . q_b| between two rotations, in [0, pi]."""
    dot = abs(float(_unit(q_a) @ _unit(q_b)))
    return float(2.0 * np.arccos(min(dot, 1.0)))


def rotation_error_signed(q_a, q_b) -> float:
    """2 arccos(q_a . q_b) without folding the double cover, in [0, 2 pi]."""
    dot = float(_unit(q_a) @ _unit(q_b))
    return float(2.0 * np.arccos(np.clip(dot, -1.0, 1.0)))
