"""Polygonal equalities at the supremal negative-type exponent."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .errors import IndexOverlap, NoKernelVector, WeightSumInvalid
from .metric_core import FiniteMetricSpace, classify
from .negtype import generalized_roundness, gram_matrix, p_distance_matrix

KERNEL_RTOL = 1e-6
ZERO_WEIGHT_RTOL = 1e-12


@dataclass(frozen=True)
class PolygonalEquality:
    p: float
    a_side: tuple[tuple[int, float], ...]
    b_side: tuple[tuple[int, float], ...]
    residual: float


def _sides(dp: np.ndarray, a_side, b_side):
    ai = [i for i, _ in a_side]
    am = np.array([w for _, w in a_side], dtype=float)
    bi = [i for i, _ in b_side]
    bn = np.array([w for _, w in b_side], dtype=float)
    lhs = 0.5 * am @ dp[np.ix_(ai, ai)] @ am + 0.5 * bn @ dp[np.ix_(bi, bi)] @ bn
    rhs = am @ dp[np.ix_(ai, bi)] @ bn
    return float(lhs), float(rhs)


def polygonal_sides(X: FiniteMetricSpace, p: float, a_side, b_side) -> tuple[float, float]:
    """Both sides of the weighted inequality (within-side pairs | cross pairs) at exponent ``p``."""
    return _sides(p_distance_matrix(X, p).entries, a_side, b_side)


def verify_polygonal_equality(
    X: FiniteMetricSpace, eq: PolygonalEquality, p: Optional[float] = None
) -> float:
    """``|LHS - RHS|`` of the polygonal equality, recomputed at ``eq.p`` (or ``p`` if given).

    Raises
    ------
    WeightSumInvalid
        If a side's weights are not positive or do not sum to 1 (within 1e-12).
    IndexOverlap
        If the sides share a point, repeat a point, or reference a missing one.
    """
    for name, side in (("a", eq.a_side), ("b", eq.b_side)):
        w = [m for _, m in side]
        if not w or any(m <= 0 for m in w) or abs(sum(w) - 1.0) > 1e-12:
            raise WeightSumInvalid(f"{name}-side weights must be positive and sum to 1: {w}")
    ai = [i for i, _ in eq.a_side]
    bi = [i for i, _ in eq.b_side]
    if any(not 0 <= i < X.n_points for i in ai + bi):
        raise IndexOverlap("point index out of range")
    if len(set(ai)) != len(ai) or len(set(bi)) != len(bi) or set(ai) & set(bi):
        raise IndexOverlap(f"sides must consist of distinct points: {ai} | {bi}")
    lhs, rhs = polygonal_sides(X, eq.p if p is None else p, eq.a_side, eq.b_side)
    return abs(lhs - rhs)


def _min_eig(X: FiniteMetricSpace, p: float) -> float:
    return float(gram_matrix(X, p).eigenvalues[0])


def find_polygonal_equality(
    X: FiniteMetricSpace, tol: Optional[float] = None, **gr_opts
) -> Optional[PolygonalEquality]:
    """Polygonal equality at the generalized roundness of ``X``, or ``None`` for ultrametrics.

    The exponent is pinned by a root-find on the smallest eigenvalue of
    ``A_p`` inside the bisection bracket. Its eigenvector, extended by the
    base weight ``-sum``, splits into positive (``a``) and negative (``b``)
    parts; each part is normalized to total weight 1.

    Raises
    ------
    NoKernelVector
        If the smallest eigenvalue at the exponent is not within
        ``tol`` (default ``1e-6 * max|eigenvalue|``) of zero.
    """
    if classify(X).is_ultrametric:
        return None
    Y = X.normalized()
    gr = generalized_roundness(X, **gr_opts)
    lo, hi = gr.bracket
    # lo is only PSD up to the spectral tolerance; step down until the
    # smallest eigenvalue is genuinely nonnegative
    a, step = lo, hi - lo
    while _min_eig(Y, a) < 0 and a > 0:
        a, step = max(0.0, a - step), 2 * step
    if _min_eig(Y, a) >= 0 > _min_eig(Y, hi):
        p_star = brentq(lambda q: _min_eig(Y, q), a, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    else:
        p_star = lo
    g = gram_matrix(Y, p_star)
    lam = g.eigenvalues
    t = KERNEL_RTOL * float(np.max(np.abs(lam))) if tol is None else float(tol)
    if abs(lam[0]) > t:
        raise NoKernelVector(p_star, float(lam[0]))
    eta = g.augment(g.eigenvectors[:, 0])
    cut = ZERO_WEIGHT_RTOL * float(np.linalg.norm(eta))
    eta[np.abs(eta) < cut] = 0.0
    if eta[np.nonzero(eta)[0][0]] < 0:
        eta = -eta
    pos, neg = np.nonzero(eta > 0)[0], np.nonzero(eta < 0)[0]
    a_w = eta[pos] / eta[pos].sum()
    b_w = -eta[neg] / (-eta[neg]).sum()
    a_side = tuple((int(i), float(w)) for i, w in zip(pos, a_w))
    b_side = tuple((int(i), float(w)) for i, w in zip(neg, b_w))
    lhs, rhs = polygonal_sides(X, p_star, a_side, b_side)
    return PolygonalEquality(float(p_star), a_side, b_side, abs(lhs - rhs))


def polygonal_tolerance(X: FiniteMetricSpace, p: float) -> float:
    """Residual tolerance ``n^2 * max(d^p) * eps * 1e4``."""
    return X.n_points**2 * float(X.dist.max() ** p) * np.finfo(float).eps * 1e4
