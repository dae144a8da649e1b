"""Quaternion extraction through adjugates of characteristic matrices.

For a symmetric profile matrix K with maximal eigenvalue lam, every column
of adj(K - lam I) is proportional to the maximal eigenvector.  For rotation
profiles that eigenvector is q, and the adjugate is a multiple of q q^T, so
normalizing the row with the largest diagonal recovers q without ever
dividing by a small component.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DegenerateAdjugate, DegenerateInput, NotOnCircle
from .linalg import adjugate, char_matrix, max_eigenvalue_sym4
from .rotations import (
    _check_unit,
    canonical_sign,
    rot2_from_quat2,
    rot3_from_quat_unchecked,
)

SECTOR_TOL = 1e-7
CLAMP_REL = 1e-12
TIE_REL = 1e-12
DEGENERATE_REL = 1e-14

# zero patterns of the 14 unnormalizable quaternion submanifolds
SECTOR_PATTERNS = tuple(
    frozenset(c) for k in (1, 2, 3) for c in combinations(range(4), k)
)
_CLASS = {0: "generic", 1: "one-zero", 2: "two-zero", 3: "three-zero"}


@dataclass(frozen=True)
class SectorId:
    zeros: frozenset
    kind: str

    @classmethod
    def from_zeros(cls, zeros) -> "SectorId":
        zeros = frozenset(int(z) for z in zeros)
        return cls(zeros, _CLASS[len(zeros)])


@dataclass(frozen=True)
class ExtractionResult:
    adjugate: np.ndarray
    lambda_opt: np.ndarray
    chosen_row: np.ndarray
    q_opt: np.ndarray
    r_opt: np.ndarray
    frobenius_residual: np.ndarray


@dataclass(frozen=True)
class Adjugate2:
    """Symmetric [[alpha, gamma], [gamma, beta]] standing for [[a^2, ab], [ab, b^2]]."""

    alpha: float
    beta: float
    gamma: float
    scale: float = 1.0

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.alpha, self.gamma], [self.gamma, self.beta]])

    def columns(self):
        """Normalized columns, None where a column cannot be normalized."""
        out = []
        for diag, col in ((self.alpha, (self.alpha, self.gamma)),
                          (self.beta, (self.gamma, self.beta))):
            if diag <= CLAMP_REL * (self.alpha + self.beta):
                out.append(None)
            else:
                out.append(np.array(col) / np.sqrt(diag * (self.alpha + self.beta)))
        return out

    def quat2(self) -> np.ndarray:
        """(a, b) from the column with the larger diagonal, sign fixed by a >= 0."""
        cols = self.columns()
        p = cols[0] if self.alpha >= self.beta else cols[1]
        return canonical_sign(p)


def quadratic_form_matrix(q) -> np.ndarray:
    """The ten quadratic forms q_i q_j arranged as q q^T."""
    q = _check_unit(q)
    return q[..., :, None] * q[..., None, :]


def classify_singular_sector(q, tol=SECTOR_TOL) -> SectorId:
    q = np.asarray(q, dtype=float)
    return SectorId.from_zeros(np.flatnonzero(np.abs(q) < tol))


def _row_select(adj):
    """Row index of the maximal diagonal, ties resolved to the lowest index."""
    diag = np.diagonal(adj, axis1=-2, axis2=-1)
    top = diag.max(axis=-1, keepdims=True)
    near = diag >= top - TIE_REL * np.abs(top)
    return np.argmax(near, axis=-1)


def _normalize_rows(adj):
    """Trace-normalize, pick the row, and return (q, k) for stacks of adjugates."""
    tr = np.trace(adj, axis1=-2, axis2=-1)
    a = adj / tr[..., None, None]
    k = _row_select(a)
    row = np.take_along_axis(a, k[..., None, None], axis=-2)[..., 0, :]
    akk = np.take_along_axis(row, k[..., None], axis=-1)[..., 0]
    akk = np.maximum(akk, CLAMP_REL)
    q = row / np.sqrt(akk)[..., None]
    q = q / np.linalg.norm(q, axis=-1, keepdims=True)
    return canonical_sign(q), k


def normalize_adjugate_row(adj, tol=SECTOR_TOL):
    """Quaternion from the row of an adjugate with the largest diagonal.

    Returns (q, sector).  The adjugate may carry any nonzero scale; its sign
    is fixed so the trace is positive.
    """
    adj = np.asarray(adj, dtype=float)
    tr = np.trace(adj)
    if tr == 0 or not np.isfinite(tr):
        raise DegenerateAdjugate("adjugate has zero trace")
    a = adj / tr
    diag = np.diagonal(a)
    if np.all(diag <= tol):
        raise DegenerateAdjugate("all adjugate diagonals vanish")
    q, _ = _normalize_rows(a)
    return q, classify_singular_sector(q, tol)


def extract_quat3_exact(theta, axis) -> np.ndarray:
    """Quadratic-form matrix written in (c, s, n) for an exact axis-angle rotation.

    Rows read ((1 + c), s n) / 2 and (s n, (1 - c) n n^T) / 2.
    """
    n = _check_unit(axis, what="axis")
    theta = np.asarray(theta, dtype=float)
    c = np.cos(theta)
    s = np.sin(theta)
    out = np.empty(theta.shape + (4, 4))
    out[..., 0, 0] = 1 + c
    out[..., 0, 1:] = s[..., None] * n
    out[..., 1:, 0] = s[..., None] * n
    out[..., 1:, 1:] = (1 - c)[..., None, None] * n[..., :, None] * n[..., None, :]
    return 0.5 * out


def profile_from_rot3_measured(m) -> np.ndarray:
    """Traceless profile matrix K0(m) whose maximal eigenvector best fits m."""
    m = np.asarray(m, dtype=float)
    m11, m12, m13 = m[..., 0, 0], m[..., 0, 1], m[..., 0, 2]
    m21, m22, m23 = m[..., 1, 0], m[..., 1, 1], m[..., 1, 2]
    m31, m32, m33 = m[..., 2, 0], m[..., 2, 1], m[..., 2, 2]
    k = np.empty(m.shape[:-2] + (4, 4))
    k[..., 0, 0] = m11 + m22 + m33
    k[..., 1, 1] = m11 - m22 - m33
    k[..., 2, 2] = -m11 + m22 - m33
    k[..., 3, 3] = -m11 - m22 + m33
    k[..., 0, 1] = k[..., 1, 0] = m32 - m23
    k[..., 0, 2] = k[..., 2, 0] = m13 - m31
    k[..., 0, 3] = k[..., 3, 0] = m21 - m12
    k[..., 1, 2] = k[..., 2, 1] = m12 + m21
    k[..., 1, 3] = k[..., 3, 1] = m13 + m31
    k[..., 2, 3] = k[..., 3, 2] = m23 + m32
    return k


def extract_from_profile(k):
    """Maximal eigenvector of symmetric profile matrices via the adjugate.

    Returns (adjugate, lambda_opt, row, q), the adjugate trace-normalized.
    Raises DegenerateAdjugate when the maximal eigenvalue is repeated.
    """
    k = np.asarray(k, dtype=float)
    lam = max_eigenvalue_sym4(k)
    chi = char_matrix(k, lam)
    adj = adjugate(chi)
    tr = np.trace(adj, axis1=-2, axis2=-1)
    chi_norm = np.sqrt(np.sum(chi * chi, axis=(-2, -1)))
    if np.any(np.abs(tr) <= DEGENERATE_REL * chi_norm ** 3) or np.any(~np.isfinite(tr)):
        raise DegenerateAdjugate("adjugate vanishes: maximal eigenvalue is repeated")
    adj = adj / tr[..., None, None]
    q, row = _normalize_rows(adj)
    return adj, lam, row, q


def extract_quat3_noisy(m) -> ExtractionResult:
    """Best-fit rotation quaternion for a measured 3x3 matrix (stacks allowed)."""
    m = np.asarray(m, dtype=float)
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    adj, lam, row, q = extract_from_profile(profile_from_rot3_measured(m))
    r = rot3_from_quat_unchecked(q)
    resid = np.sqrt(np.sum((r - m) ** 2, axis=(-2, -1)))
    return ExtractionResult(adj, lam, row, q, r, resid)


def extract_quat2_exact(c, s, tol=1e-9) -> Adjugate2:
    """Adjugate of the exact 2D characteristic matrix for R(c, s)."""
    if abs(c * c + s * s - 1.0) > tol:
        raise NotOnCircle("c^2 + s^2 != 1")
    return Adjugate2(alpha=(1 + c) / 2, beta=(1 - c) / 2, gamma=s / 2)


def profile_from_rot2_measured(m) -> np.ndarray:
    """Half-scaled 2D profile [[d, t], [t, -d]]; eigenvalues +-sqrt(d^2 + t^2).

    (a, b) K (a, b)^T equals tr(R(a, b) m^T) / 2.
    """
    m = np.asarray(m, dtype=float)
    d = 0.5 * (m[..., 0, 0] + m[..., 1, 1])
    t = 0.5 * (m[..., 1, 0] - m[..., 0, 1])
    return np.stack([np.stack([d, t], -1), np.stack([t, -d], -1)], -2)


def extract_quat2_noisy(m):
    """Best-fit half-angle pair for a measured 2x2 matrix.

    With d = (m11 + m22)/2, t = (m21 - m12)/2 and lam = sqrt(d^2 + t^2) the
    adjugate columns are [lam + d, t] and [t, lam - d].  Returns
    (Adjugate2, lam, (a, b)); the adjugate is scaled to unit trace.
    """
    m = np.asarray(m, dtype=float)
    d = 0.5 * (m[0, 0] + m[1, 1])
    t = 0.5 * (m[1, 0] - m[0, 1])
    lam = float(np.hypot(d, t))
    if lam <= 1e-14:
        raise DegenerateInput("no rotational content (d = t = 0)")
    scale = 2.0 * lam
    adj = Adjugate2(alpha=(lam + d) / scale, beta=(lam - d) / scale, gamma=t / scale, scale=scale)
    return adj, lam, adj.quat2()


def rot2_from_adjugate2(adj: Adjugate2) -> np.ndarray:
    return rot2_from_quat2(adj.quat2())


def sample_sector_quaternion(rng, zeros) -> np.ndarray:
    """Random unit quaternion with exact zeros at the given component indices."""
    zeros = sorted(zeros)
    if len(zeros) >= 4:
        raise ValueError("at most three components may vanish")
    q = rng.standard_normal(4)
    q[zeros] = 0.0
    return q / np.linalg.norm(q)


__all__ = [
    "Adjugate2",
    "ExtractionResult",
    "SECTOR_PATTERNS",
    "SectorId",
    "classify_singular_sector",
    "extract_from_profile",
    "extract_quat2_exact",
    "extract_quat2_noisy",
    "extract_quat3_exact",
    "extract_quat3_noisy",
    "normalize_adjugate_row",
    "profile_from_rot2_measured",
    "profile_from_rot3_measured",
    "quadratic_form_matrix",
    "rot2_from_adjugate2",
    "sample_sector_quaternion",
]
