"""Finite metric spaces: validation, ultrametric/additive classification, transforms."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    AsymmetricEntry,
    NonpositiveOffDiagonal,
    NonzeroDiagonal,
    NotSquare,
    ParamOutOfRange,
    TransformNotMetric,
    TriangleViolation,
)

RELATIVE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """A labelled point set together with its (validated) distance matrix.

    Instances are produced by :func:`validate_metric`; the matrix is stored
    read-only so that spaces can be shared freely.
    """

    labels: tuple[str, ...]
    dist: np.ndarray = field(repr=False)

    @property
    def n_points(self) -> int:
        return self.dist.shape[0]

    @property
    def n(self) -> int:
        """Index of the last point when points are numbered ``0..n``."""
        return self.dist.shape[0] - 1

    @property
    def max_distance(self) -> float:
        return float(self.dist.max())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FiniteMetricSpace):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.dist, other.dist)

    def __hash__(self) -> int:
        return hash((self.labels, self.dist.tobytes()))

    def subspace(self, indices: Sequence[int]) -> "FiniteMetricSpace":
        idx = list(indices)
        return _trusted(self.dist[np.ix_(idx, idx)], [self.labels[i] for i in idx])

    def permuted(self, perm: Sequence[int]) -> "FiniteMetricSpace":
        """Relabel so that new point ``i`` is old point ``perm[i]``."""
        if sorted(perm) != list(range(self.n_points)):
            raise ValueError("perm must be a permutation of the point indices")
        return self.subspace(perm)

    def normalized(self) -> "FiniteMetricSpace":
        """Same space rescaled so the largest distance is 1."""
        return _trusted(self.dist / self.max_distance, self.labels)


@dataclass(frozen=True)
class ClassificationReport:
    is_ultrametric: bool
    is_additive: bool
    ultra_witness: Optional[tuple[int, int, int]]
    additive_witness: Optional[tuple[int, int, int, int]]
    tol: float


def _trusted(dist: np.ndarray, labels: Sequence[str]) -> FiniteMetricSpace:
    arr = np.array(dist, dtype=float, copy=True)
    arr.setflags(write=False)
    return FiniteMetricSpace(tuple(str(x) for x in labels), arr)


def default_tol(dist: np.ndarray) -> float:
    return RELATIVE_TOL * float(np.max(dist))


def _first_triangle_violation(d: np.ndarray, tol: float):
    """Lexicographically smallest (i, j, k) with d[i,k] > d[i,j] + d[j,k] + tol."""
    n = d.shape[0]
    for i in range(n):
        # excess[j, k] = d[i,k] - d[i,j] - d[j,k]
        excess = d[i][None, :] - d[i][:, None] - d
        hits = np.argwhere(excess > tol)
        if hits.size:
            j, k = (int(v) for v in hits[0])
            return (i, j, k), float(excess[j, k])
    return None


def validate_metric(
    matrix,
    labels: Optional[Sequence] = None,
    tol_metric: Optional[float] = None,
) -> FiniteMetricSpace:
    """Check that ``matrix`` is a metric and wrap it as a :class:`FiniteMetricSpace`.

    Parameters
    ----------
    matrix : array_like, shape (m, m)
        Candidate distance matrix, ``m >= 2``.
    labels : sequence, optional
        Point identifiers; defaults to ``"0", ..., str(m - 1)``.
    tol_metric : float, optional
        Absolute slack for the symmetry and triangle checks. Defaults to
        ``1e-9 * max(matrix)``.

    Raises
    ------
    NotSquare, AsymmetricEntry, NonzeroDiagonal, NonpositiveOffDiagonal, TriangleViolation
    """
    try:
        d = np.array(matrix, dtype=float)
    except (TypeError, ValueError) as exc:
        raise NotSquare(f"matrix is not a rectangular numeric array: {exc}") from None
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise NotSquare(f"expected a square matrix, got shape {d.shape}")
    m = d.shape[0]
    if m < 2:
        raise NotSquare("a metric space needs at least 2 points")
    if not np.all(np.isfinite(d)):
        bad = tuple(int(v) for v in np.argwhere(~np.isfinite(d))[0])
        raise NonpositiveOffDiagonal(bad[0], bad[1], float(d[bad]))
    if labels is None:
        labels = [str(i) for i in range(m)]
    elif len(labels) != m:
        raise NotSquare(f"{len(labels)} labels for a {m}x{m} matrix")
    tol = default_tol(np.abs(d)) if tol_metric is None else float(tol_metric)

    for i in range(m):
        if abs(d[i, i]) > 0.0:
            raise NonzeroDiagonal(i, float(d[i, i]))
    asym = np.abs(d - d.T)
    hits = np.argwhere(np.triu(asym > tol))
    if hits.size:
        i, j = (int(v) for v in hits[0])
        raise AsymmetricEntry(i, j, float(asym[i, j]))
    off = ~np.eye(m, dtype=bool)
    hits = np.argwhere(off & (d <= 0.0))
    if hits.size:
        i, j = (int(v) for v in hits[0])
        raise NonpositiveOffDiagonal(i, j, float(d[i, j]))
    # symmetrize away sub-tolerance noise so downstream matrices are exactly symmetric
    d = 0.5 * (d + d.T)
    hit = _first_triangle_violation(d, tol)
    if hit is not None:
        (i, j, k), slack = hit
        raise TriangleViolation(i, j, k, slack)
    return _trusted(d, labels)


def _first_ultra_violation(d: np.ndarray, tol: float):
    n = d.shape[0]
    for x in range(n):
        # excess[y, z] = d[x,y] - max(d[x,z], d[y,z])
        excess = d[x][:, None] - np.maximum(d[x][None, :], d)
        excess[x, :] = -np.inf
        excess[:, x] = -np.inf
        np.fill_diagonal(excess, -np.inf)
        hits = np.argwhere(excess > tol)
        if hits.size:
            y, z = (int(v) for v in hits[0])
            return (x, y, z)
    return None


def _first_additive_violation(d: np.ndarray, tol: float):
    n = d.shape[0]
    idx = np.arange(n)
    for x in range(n):
        for y in range(n):
            if y == x:
                continue
            # excess[z, w] = d[x,y] + d[z,w] - max(d[x,z] + d[y,w], d[x,w] + d[y,z])
            alt1 = d[x][:, None] + d[y][None, :]
            alt2 = d[x][None, :] + d[y][:, None]
            excess = d[x, y] + d - np.maximum(alt1, alt2)
            mask = (idx[:, None] == idx[None, :]) | np.isin(idx, (x, y))[:, None]
            mask |= np.isin(idx, (x, y))[None, :]
            excess[mask] = -np.inf
            hits = np.argwhere(excess > tol)
            if hits.size:
                z, w = (int(v) for v in hits[0])
                return (x, y, z, w)
    return None


def classify(X: FiniteMetricSpace, tol: Optional[float] = None) -> ClassificationReport:
    """Test the ultrametric (three-point) and additive (four-point) inequalities.

    Only the max-forms are evaluated, each with absolute slack ``tol``
    (default ``1e-9 * max distance``). On failure the lexicographically
    smallest violating ordered tuple is returned: ``(x, y, z)`` with
    ``d(x,y) > max(d(x,z), d(y,z))`` or ``(x, y, z, w)`` with
    ``d(x,y) + d(z,w) > max(d(x,z) + d(y,w), d(x,w) + d(y,z))``.
    """
    d = X.dist
    tol = default_tol(d) if tol is None else float(tol)
    uw = _first_ultra_violation(d, tol)
    aw = _first_additive_violation(d, tol)
    return ClassificationReport(
        is_ultrametric=uw is None,
        is_additive=aw is None,
        ultra_witness=uw,
        additive_witness=aw,
        tol=tol,
    )


def metric_transform(X: FiniteMetricSpace, p: float) -> FiniteMetricSpace:
    """Return the space ``(X, d**p)``.

    For ``p <= 1`` the result is always a metric. For ``p > 1`` the triangle
    inequality is re-checked and :class:`TransformNotMetric` raised on failure.
    """
    if not p > 0:
        raise ParamOutOfRange(f"transform exponent must be positive, got {p!r}")
    if p == 1:
        return X
    d = X.dist**p
    if p > 1:
        hit = _first_triangle_violation(d, default_tol(d))
        if hit is not None:
            triple, slack = hit
            raise TransformNotMetric(p, triple, slack)
    return _trusted(d, X.labels)
