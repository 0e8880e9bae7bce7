"""Enflo roundness of finite metric spaces.

A quadruple is written as the 4-cycle ``(x00, x01, x11, x10)``; exponent ``p``
is a roundness exponent when, for every quadruple,

    d(x00,x11)^p + d(x01,x10)^p <= d(x00,x01)^p + d(x01,x11)^p + d(x11,x10)^p + d(x10,x00)^p

The diagonals sit on the left, the cycle edges on the right.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ParamOutOfRange
from .metric_core import FiniteMetricSpace, classify

Quadruple = tuple[int, int, int, int]

_ROUNDNESS_RTOL = 1e-9


@dataclass(frozen=True)
class RoundnessCheck:
    p: float
    holds: bool
    witness: Optional[Quadruple] = None
    margin: Optional[float] = None


@dataclass(frozen=True)
class QuadrupleRecord:
    quadruple: Quadruple
    sup_contiguous: float


@dataclass(frozen=True)
class RoundnessProfile:
    records: tuple[QuadrupleRecord, ...]
    global_lower: float
    witness: Optional[Quadruple]
    grid: np.ndarray


def _margins(d: np.ndarray, p: float) -> np.ndarray:
    """LHS - RHS for every ordered quadruple, indexed [x00, x01, x11, x10]."""
    e = d**p
    lhs = e[:, None, :, None] + e[None, :, None, :]
    rhs = (
        e[:, :, None, None]          # x00-x01
        + e[None, :, :, None]        # x01-x11
        + e[None, None, :, :]        # x11-x10
        + e.T[:, None, None, :]      # x10-x00
    )
    return lhs - rhs


def roundness_exponent_check(
    X: FiniteMetricSpace, p: float, tol: Optional[float] = None
) -> RoundnessCheck:
    """Evaluate the roundness inequality at ``p`` over all ordered quadruples.

    Repeated points are allowed. ``tol`` defaults to ``1e-9 * max(d)**p``.
    The reported witness is the quadruple of largest excess (first in
    lexicographic order among ties).
    """
    if p < 1:
        raise ParamOutOfRange(f"roundness exponents start at 1, got {p!r}")
    d = X.dist / X.max_distance
    # scale tolerance back to the caller's units
    scale = X.max_distance**p
    tol_n = _ROUNDNESS_RTOL if tol is None else tol / scale
    m = d.shape[0]
    if m <= 40:
        marg = _margins(d, p)
        flat = int(np.argmax(marg))
        worst = float(marg.flat[flat])
        idx = np.unravel_index(flat, marg.shape)
    else:
        worst, idx = -np.inf, None
        e = d**p
        for a in range(m):
            lhs = e[a][None, :, None] + e[:, None, :]
            rhs = e[a][:, None, None] + e[:, :, None] + e[None, :, :] + e[a][None, None, :]
            marg = lhs - rhs
            flat = int(np.argmax(marg))
            if marg.flat[flat] > worst:
                worst = float(marg.flat[flat])
                idx = (a, *np.unravel_index(flat, marg.shape))
    if worst > tol_n:
        return RoundnessCheck(float(p), False, tuple(int(i) for i in idx), worst * scale)
    return RoundnessCheck(float(p), True)


def _dihedral_images(q: Quadruple) -> list[Quadruple]:
    c = list(q)
    out = []
    for seq in (c, c[::-1]):
        for r in range(4):
            out.append(tuple(seq[r:] + seq[:r]))
    return out


def canonical_quadruples(m: int) -> list[Quadruple]:
    """One representative per orbit of ordered quadruples under the symmetries of the inequality.

    The symmetry group is the dihedral group of the 4-cycle (it swaps
    ``x00 <-> x11``, ``x01 <-> x10`` and exchanges the two diagonals); the
    lexicographically smallest orbit element is kept.
    """
    reps = []
    for q in itertools.product(range(m), repeat=4):
        if q == min(_dihedral_images(q)):
            reps.append(q)
    return reps


def _holds(diag: np.ndarray, side: np.ndarray, p: np.ndarray, rtol: float) -> np.ndarray:
    """Relative form of the inequality for rows of (diag, side) on exponents ``p``.

    Terms are divided by the largest distance in the row before raising to
    ``p`` so that large exponents neither under- nor overflow.
    """
    top = np.maximum(diag.max(axis=1), side.max(axis=1))
    top[top == 0] = 1.0
    dn = diag / top[:, None]
    sn = side / top[:, None]
    pp = np.asarray(p, dtype=float)
    f = (sn[:, :, None] ** pp[None, None, :]).sum(axis=1) - (
        dn[:, :, None] ** pp[None, None, :]
    ).sum(axis=1)
    return f >= -rtol


def roundness_profile(
    X: FiniteMetricSpace,
    p_grid_max: float = 32.0,
    grid_step: float = 0.01,
    refine_tol: float = 1e-9,
) -> RoundnessProfile:
    """Largest ``p`` such that every quadruple satisfies the inequality on all of ``[1, p]``.

    Each distinct quadruple shape is scanned on a grid from 1 to
    ``p_grid_max``; the first failing grid point is refined by bisection.
    ``global_lower`` is the minimum over quadruples and certifies that
    ``[1, global_lower]`` consists of roundness exponents. Nothing is claimed
    above it, since roundness exponents need not form an interval; a dip
    narrower than ``grid_step`` can also be missed.
    """
    d = X.dist
    quads = np.array(canonical_quadruples(X.n_points), dtype=int)
    c0, c1, c2, c3 = quads.T
    diag = np.stack([d[c0, c2], d[c1, c3]], axis=1)
    side = np.stack([d[c0, c1], d[c1, c2], d[c2, c3], d[c3, c0]], axis=1)
    # the inequality only depends on the two multisets of distances
    key = np.concatenate([np.sort(diag, axis=1), np.sort(side, axis=1)], axis=1)
    key = np.round(key / X.max_distance, 12)
    _, first, inverse = np.unique(key, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.ravel()
    u_diag, u_side = diag[first], side[first]

    n_steps = int(round((p_grid_max - 1.0) / grid_step))
    grid = np.linspace(1.0, 1.0 + n_steps * grid_step, n_steps + 1)
    sup = np.full(len(first), float(grid[-1]))
    chunk = max(1, 2_000_000 // grid.size)
    for s in range(0, len(first), chunk):
        ok = _holds(u_diag[s : s + chunk], u_side[s : s + chunk], grid, _ROUNDNESS_RTOL)
        failing = ~ok
        for r in np.nonzero(failing.any(axis=1))[0]:
            j = int(np.argmax(failing[r]))
            row = s + r
            if j == 0:
                sup[row] = 1.0
                continue
            lo, hi = float(grid[j - 1]), float(grid[j])
            dg, sd = u_diag[row : row + 1], u_side[row : row + 1]
            while hi - lo > refine_tol:
                mid = 0.5 * (lo + hi)
                if _holds(dg, sd, np.array([mid]), _ROUNDNESS_RTOL)[0, 0]:
                    lo = mid
                else:
                    hi = mid
            sup[row] = lo

    per_quad = sup[inverse]
    records = tuple(
        QuadrupleRecord(tuple(int(v) for v in q), float(s)) for q, s in zip(quads, per_quad)
    )
    k = int(np.argmin(per_quad))
    lower = float(per_quad[k])
    witness = tuple(int(v) for v in quads[k]) if lower < grid[-1] else None
    return RoundnessProfile(records, lower, witness, grid)


def is_infinite_roundness(X: FiniteMetricSpace) -> bool:
    """Infinite roundness is equivalent to the space being ultrametric."""
    return classify(X).is_ultrametric
