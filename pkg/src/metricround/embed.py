"""Minimal-dimension Euclidean embeddings of ``(X, d**(p/2))``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, NotNegativeType, ParamOutOfRange
from .metric_core import FiniteMetricSpace
from .negtype import gram_matrix, spectral_tolerance

RANK_RTOL = 1e-10


@dataclass(frozen=True)
class EuclideanEmbedding:
    p: float
    base: int
    coords: np.ndarray
    rank: int
    residual: float
    eigenvalues: np.ndarray

    def truncated(self, r: int) -> "EuclideanEmbedding":
        """Keep only the ``r`` leading coordinate axes (largest eigenvalues first)."""
        coords = self.coords[:, :r]
        return EuclideanEmbedding(self.p, self.base, coords, coords.shape[1], np.nan, self.eigenvalues)


@dataclass(frozen=True)
class IsometryReport:
    max_error: float
    pair: Optional[tuple[int, int]]


def _pairwise(coords: np.ndarray) -> np.ndarray:
    diff = coords[:, None, :] - coords[None, :, :]
    return np.sqrt((diff**2).sum(axis=-1))


def _errors(coords: np.ndarray, X: FiniteMetricSpace, p: float):
    target = X.dist ** (p / 2.0) if p > 0 else (X.dist > 0).astype(float)
    err = np.abs(_pairwise(coords) - target)
    k = int(np.argmax(err))
    i, j = np.unravel_index(k, err.shape)
    return float(err[i, j]), (int(min(i, j)), int(max(i, j)))


def embed_euclidean(
    X: FiniteMetricSpace,
    p: float = 2.0,
    base: int = 0,
    rank_tol: float = RANK_RTOL,
    tau: Optional[float] = None,
) -> EuclideanEmbedding:
    """Isometrically embed ``(X, d**(p/2))`` in ``R^r`` with ``r`` as small as possible.

    Uses the eigendecomposition ``A_p = U diag(lam) U^T``. Eigenvalues at or
    below ``rank_tol * max(lam)`` are dropped; the base point sits at the
    origin and point ``j`` gets ``U_j * sqrt(lam)`` on the kept axes, ordered
    by decreasing eigenvalue. Coordinates are determined only up to an
    orthogonal transformation.

    Raises
    ------
    NotNegativeType
        If ``A_p`` has an eigenvalue below ``-tau``.
    """
    if not 0 <= p <= 2:
        raise ParamOutOfRange(
            f"p must lie in [0, 2]; transform the space first for larger exponents (got {p!r})"
        )
    g = gram_matrix(X, p, base)
    lam, vec = g.eigenvalues, g.eigenvectors
    t = spectral_tolerance(lam) if tau is None else float(tau)
    if lam[0] < -t:
        raise NotNegativeType(p, float(lam[0]))
    cutoff = rank_tol * float(lam[-1])
    keep = np.nonzero(lam > cutoff)[0][::-1]
    coords = np.zeros((X.n_points, keep.size))
    coords[g.reduced_indices] = vec[:, keep] * np.sqrt(lam[keep])[None, :]
    residual, _ = _errors(coords, X, p)
    return EuclideanEmbedding(float(p), base, coords, int(keep.size), residual, lam.copy())


def verify_isometry(E: EuclideanEmbedding, X: FiniteMetricSpace) -> IsometryReport:
    """Largest deviation between coordinate distances and ``d**(p/2)`` and the pair attaining it."""
    if E.coords.shape[0] != X.n_points:
        raise DimensionMismatch(
            f"embedding has {E.coords.shape[0]} rows but the space has {X.n_points} points"
        )
    err, pair = _errors(E.coords, X, E.p)
    return IsometryReport(err, pair)
