"""Closed-form rotational alignment of matched point clouds.

Clouds are D x K arrays, one point per column.  No centroid is removed: the
loss sum_k |R x_k - u_k|^2 has no translation term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateData, ShapeMismatch
from .extract import extract_from_profile, profile_from_rot3_measured
from .rotations import rot3_from_quat_unchecked

_PAIRS = {(2, 2), (3, 3), (3, 2), (2, 1)}


@dataclass(frozen=True)
class MatchResult:
    q_opt: np.ndarray
    r_opt: np.ndarray
    lambda_opt: float
    loss: float
    adjugate: np.ndarray | None = None


def as_cloud(x, dims=(1, 2, 3)) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] not in dims or x.shape[1] < 1:
        raise ShapeMismatch(f"expected a D x K cloud with D in {dims}, got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("cloud coordinates must be finite")
    return x


def cross_covariance(x, u) -> np.ndarray:
    """E = X U^T, the summed outer products x_k u_k^T."""
    x = as_cloud(x)
    u = as_cloud(u)
    if x.shape[1] != u.shape[1] or (x.shape[0], u.shape[0]) not in _PAIRS:
        raise ShapeMismatch(f"incompatible clouds {x.shape} and {u.shape}")
    return x @ u.T


def match_loss(r, x, u) -> float:
    return float(np.sum((np.asarray(r) @ x - u) ** 2))


def match2d(x, u) -> MatchResult:
    """Optimal 2D rotation taking x onto u.

    With c = x.u + y.v and s = x.v - y.u summed over points, the adjugate
    variables are alpha = (1 + c/lam)/2, beta = (1 - c/lam)/2,
    gamma = (s/lam)/2 and R = [[c, -s], [s, c]] / lam.
    """
    x = as_cloud(x, (2,))
    u = as_cloud(u, (2,))
    e = cross_covariance(x, u)
    c = e[0, 0] + e[1, 1]
    s = e[0, 1] - e[1, 0]
    lam = float(np.hypot(c, s))
    if lam <= 1e-14 * np.linalg.norm(x) * np.linalg.norm(u):
        raise DegenerateData("rotation undetermined (lambda ~ 0)")
    alpha = 0.5 * (1 + c / lam)
    beta = 0.5 * (1 - c / lam)
    gamma = 0.5 * s / lam
    r = np.array([[c, -s], [s, c]]) / lam
    adj = np.array([[alpha, gamma], [gamma, beta]])
    # half-angle pair from the better-conditioned column of the adjugate
    if alpha >= beta:
        p = np.array([alpha, gamma]) / np.sqrt(alpha)
    else:
        p = np.array([gamma, beta]) / np.sqrt(beta)
        if p[0] < 0 or (p[0] == 0 and p[1] < 0):
            p = -p
    return MatchResult(p, r, lam, match_loss(r, x, u), adj)


def profile_matrix_3d(e) -> np.ndarray:
    """Traceless M(E) with q.M(E).q = tr(R(q) E)."""
    # M(E) is the measured-matrix profile of E^T
    return profile_from_rot3_measured(np.swapaxes(np.asarray(e, dtype=float), -1, -2))


def match3d(x, u) -> MatchResult:
    """Rotation minimizing sum |R x_k - u_k|^2, via the maximal eigenvector of M(X U^T)."""
    x = as_cloud(x, (3,))
    u = as_cloud(u, (3,))
    m = profile_matrix_3d(cross_covariance(x, u))
    adj, lam, _, q = extract_from_profile(m)
    r = rot3_from_quat_unchecked(q)
    return MatchResult(q, r, float(lam), match_loss(r, x, u), adj)


def exact_data_eigenvalue(x) -> float:
    """tr(X X^T), the maximal eigenvalue of M(X U^T) for noise-free u = R x."""
    x = as_cloud(x, (3,))
    return float(np.sum(x * x))
