"""Fixed-size linear algebra for the rotation solvers.

Adjugates and determinants for N <= 4, plus an analytic eigenvalue solver for
symmetric 4x4 matrices.  All routines broadcast over leading batch axes, so a
stack of shape (..., N, N) is handled in one call.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import NonConvergence

EIG_RTOL = 1e-9
NEWTON_STEPS = 3
CLUSTER_REL = 1e-4

# upper-triangle storage order for symmetric 4x4 matrices
SYM4_INDEX = tuple((i, j) for i in range(4) for j in range(i, 4))


def as_mat(m, sizes=(2, 3, 4, 5)) -> np.ndarray:
    """Validate a (stack of) square matrices with finite entries."""
    a = np.asarray(m, dtype=float)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2] or a.shape[-1] not in sizes:
        raise ValueError(f"expected square matrices of size {sizes}, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def sym4(upper) -> np.ndarray:
    """Build symmetric 4x4 matrices from their 10 upper-triangle entries.

    Entries are ordered (00, 01, 02, 03, 11, 12, 13, 22, 23, 33).
    """
    u = np.asarray(upper, dtype=float)
    if u.shape[-1] != 10:
        raise ValueError("need 10 upper-triangle entries")
    out = np.empty(u.shape[:-1] + (4, 4))
    for k, (i, j) in enumerate(SYM4_INDEX):
        out[..., i, j] = u[..., k]
        out[..., j, i] = u[..., k]
    return out


def sym4_upper(m) -> np.ndarray:
    """Inverse of :func:`sym4`; reads the upper triangle."""
    m = np.asarray(m, dtype=float)
    return np.stack([m[..., i, j] for i, j in SYM4_INDEX], axis=-1)


def det(m) -> np.ndarray:
    """Determinant by explicit cofactor expansion (N <= 4)."""
    m = np.asarray(m, dtype=float)
    n = m.shape[-1]
    if n == 1:
        return m[..., 0, 0]
    if n == 2:
        return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    if n == 3:
        return (m[..., 0, 0] * (m[..., 1, 1] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 1])
                - m[..., 0, 1] * (m[..., 1, 0] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 0])
                + m[..., 0, 2] * (m[..., 1, 0] * m[..., 2, 1] - m[..., 1, 1] * m[..., 2, 0]))
    if n == 4:
        # Laplace expansion along the top two rows via 2x2 minors
        total = 0.0
        for cols in combinations(range(4), 2):
            rest = tuple(c for c in range(4) if c not in cols)
            sign = (-1) ** (sum(cols) + 1)  # rows (0, 1) contribute 0 + 1
            top = m[..., 0:2, :][..., :, list(cols)]
            bot = m[..., 2:4, :][..., :, list(rest)]
            total = total + sign * det(top) * det(bot)
        return total
    raise ValueError("det supports N <= 4")


def _minor_index(n):
    keep = [[k for k in range(n) if k != i] for i in range(n)]
    rows = np.array(keep)[:, None, :, None]
    cols = np.array(keep)[None, :, None, :]
    return rows, cols


def adjugate(m) -> np.ndarray:
    """Transposed cofactor matrix, defined for singular input as well.

    Satisfies m @ adjugate(m) = det(m) I.
    """
    m = as_mat(m, sizes=(1, 2, 3, 4))
    n = m.shape[-1]
    if n == 1:
        return np.ones_like(m)
    if n == 2:
        out = np.empty_like(m)
        out[..., 0, 0] = m[..., 1, 1]
        out[..., 1, 1] = m[..., 0, 0]
        out[..., 0, 1] = -m[..., 0, 1]
        out[..., 1, 0] = -m[..., 1, 0]
        return out
    rows, cols = _minor_index(n)
    minors = m[..., rows, cols]  # (..., n, n, n-1, n-1), minors[i, j] drops row i, col j
    cof = det(minors)
    sign = (-1.0) ** np.add.outer(np.arange(n), np.arange(n))
    return np.swapaxes(cof * sign, -1, -2)


def char_matrix(m, lam) -> np.ndarray:
    """Characteristic matrix m - lam I."""
    m = np.asarray(m, dtype=float)
    lam = np.asarray(lam, dtype=float)
    return m - lam[..., None, None] * np.eye(m.shape[-1])


@dataclass(frozen=True)
class QuarticRoots:
    """Eigenvalues of a symmetric 4x4 matrix, sorted descending.

    ``residuals`` holds |det(m - r I)| for each root after polishing.
    """

    roots: np.ndarray
    residuals: np.ndarray


def _cubic_real_roots(b, c, d):
    """Roots of z^3 + b z^2 + c z + d known to be all real (trigonometric form)."""
    shift = b / 3.0
    p = c - b * shift
    q = 2.0 * shift ** 3 - shift * c + d
    # z = w - shift, w^3 + p w + q = 0 with p <= 0
    p = np.minimum(p, 0.0)
    r = np.sqrt(-p / 3.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        arg = np.where(r > 0, -q / (2.0 * r ** 3), 0.0)
    phi = np.arccos(np.clip(arg, -1.0, 1.0)) / 3.0
    k = np.arange(3) * (2.0 * np.pi / 3.0)
    w = 2.0 * r[..., None] * np.cos(phi[..., None] - k)
    return w - shift[..., None]


def _analytic_roots(m):
    """Ferrari roots of the characteristic quartic of symmetric m, descending."""
    tr = np.trace(m, axis1=-2, axis2=-1)
    shift = tr / 4.0
    b = char_matrix(m, shift)
    b2 = b @ b
    p = -0.5 * np.trace(b2, axis1=-2, axis2=-1)
    q = -np.einsum("...ij,...ji->...", b2, b) / 3.0
    r = det(b)
    # resolvent cubic roots are the squared pair sums (y_i + y_j)^2
    z = np.maximum(_cubic_real_roots(2.0 * p, p * p - 4.0 * r, -q * q), 0.0)
    s = np.sqrt(z)
    s1, s2, s3 = s[..., 0], s[..., 1], s[..., 2]
    # pick the sign of s3 so that s1 s2 s3 = -q
    s3 = np.where(q > 0, -s3, s3)
    y = 0.5 * np.stack([s1 + s2 + s3, s1 - s2 - s3, -s1 + s2 - s3, -s1 - s2 + s3], axis=-1)
    y = -np.sort(-y, axis=-1)
    return y + shift[..., None]


def _residuals(m, roots):
    mats = m[..., None, :, :] - roots[..., :, None, None] * np.eye(4)
    return np.abs(det(mats))


def _newton_polish(m, roots, steps):
    """Newton on det(m - e I), using d/de det = -tr adj(m - e I)."""
    eye = np.eye(4)
    for _ in range(steps):
        mats = m[..., None, :, :] - roots[..., :, None, None] * eye
        p = det(mats)
        dp = -np.trace(adjugate(mats), axis1=-2, axis2=-1)
        gaps = np.abs(np.diff(roots, axis=-1))
        big = np.full(roots.shape[:-1] + (1,), np.inf)
        near = np.minimum(np.concatenate([big, gaps], -1), np.concatenate([gaps, big], -1))
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(dp != 0.0, p / dp, 0.0)
        # never let a step jump across to a neighbouring root
        ok = np.isfinite(step) & (np.abs(step) < 0.5 * near)
        roots = roots - np.where(ok, step, 0.0)
    return -np.sort(-roots, axis=-1)


def jacobi_eigenvalues(m, tol=1e-15, max_sweeps=50) -> np.ndarray:
    """Cyclic Jacobi eigenvalues of symmetric matrices, sorted descending.

    Vectorized over leading batch axes.
    """
    a = np.array(m, dtype=float)
    n = a.shape[-1]
    scale = np.sqrt(np.sum(a * a, axis=(-2, -1)))
    lower = np.tril_indices(n, -1)
    eye = np.eye(n)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(a[..., lower[0], lower[1]] ** 2, axis=-1))
        if np.all(off <= tol * scale):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[..., p, q]
                live = apq != 0.0
                safe = np.where(live, apq, 1.0)
                with np.errstate(over="ignore"):
                    # theta -> inf gives t = 0, the correct limit
                    theta = (a[..., q, q] - a[..., p, p]) / (2.0 * safe)
                t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.hypot(theta, 1.0))
                c = np.where(live, 1.0 / np.sqrt(t * t + 1.0), 1.0)
                s = np.where(live, t * c, 0.0)
                rot = np.broadcast_to(eye, a.shape).copy()
                rot[..., p, p] = c
                rot[..., q, q] = c
                rot[..., p, q] = s
                rot[..., q, p] = -s
                a = np.swapaxes(rot, -1, -2) @ a @ rot
    return -np.sort(-np.diagonal(a, axis1=-2, axis2=-1), axis=-1)


def eigenvalues_sym4(m) -> QuarticRoots:
    """All four eigenvalues of symmetric 4x4 matrices.

    Analytic quartic roots, a few Newton steps on the characteristic
    polynomial, and a cyclic-Jacobi fallback.  The fallback handles matrices
    whose roots miss the residual bound ``EIG_RTOL * |m|_F^4`` and those with
    clustered roots, where the closed form only reaches sqrt(eps) accuracy.
    """
    m = as_mat(m, sizes=(4,))
    norm = np.sqrt(np.sum(m * m, axis=(-2, -1)))
    # work on the unit-norm matrix to keep the quartic coefficients in range
    unit = np.where(norm > 0, norm, 1.0)
    mu = m / unit[..., None, None]
    roots = _newton_polish(mu, _analytic_roots(mu), NEWTON_STEPS)
    res = _residuals(mu, roots)
    gap = np.min(-np.diff(roots, axis=-1), axis=-1)
    redo = ~np.all(res <= EIG_RTOL, axis=-1) | ((gap < CLUSTER_REL) & (norm > 0))
    if np.any(redo):
        roots = roots.copy()
        roots[redo] = jacobi_eigenvalues(mu[redo])
        res = _residuals(mu, roots)
        if not np.all(res <= EIG_RTOL):
            raise NonConvergence("eigenvalue residual above tolerance after Jacobi fallback")
    # |det(m - r I)| scales as norm^4 with the matrix
    return QuarticRoots(roots=roots * unit[..., None], residuals=res * unit[..., None] ** 4)


def max_eigenvalue_sym4(m) -> np.ndarray:
    """Largest eigenvalue of symmetric 4x4 matrices."""
    return eigenvalues_sym4(m).roots[..., 0]
