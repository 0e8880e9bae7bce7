"""Negative type, the Sánchez invariant and generalized roundness.

Conventions: the points of an ``(n+1)``-point space are ``x_0, ..., x_n``;
``D_p`` is the matrix of ``d(x_j, x_k)**p`` and ``A_p`` the ``n x n`` matrix

    a_jk = (d^p(x_b, x_j) + d^p(x_b, x_k) - d^p(x_j, x_k)) / 2

built around a base point ``x_b`` (``b = 0`` unless chosen otherwise).
For any reduced weight vector ``eta`` and its augmentation ``eta_*``
(base entry ``-sum(eta)``), ``2 eta^T A_p eta == -eta_*^T D_p eta_*``, so the
space has (strict) ``p``-negative type exactly when ``A_p`` is positive
(semi-)definite.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg
from scipy.optimize import brentq

from .errors import CapReachedNonUltrametric, ParamOutOfRange
from .metric_core import FiniteMetricSpace, classify

SPECTRAL_RTOL = 1e-9
SANCHEZ_RCOND = 1e-12


class Status(str, enum.Enum):
    STRICT = "Strict"
    BOUNDARY = "Boundary"
    FAILS = "Fails"


@dataclass(frozen=True)
class PDistanceMatrix:
    p: float
    entries: np.ndarray


@dataclass(frozen=True)
class GramMatrix:
    p: float
    base: int
    entries: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def reduced_indices(self) -> list[int]:
        """Point indices labelling the rows of ``entries`` (all but the base)."""
        m = self.entries.shape[0] + 1
        return [i for i in range(m) if i != self.base]

    def quadratic_form(self, eta) -> float:
        eta = np.asarray(eta, dtype=float)
        return float(eta @ self.entries @ eta)

    def augment(self, eta) -> np.ndarray:
        """Full-length weight vector: ``eta`` on the reduced points, ``-sum(eta)`` at the base."""
        eta = np.asarray(eta, dtype=float)
        full = np.empty(eta.size + 1)
        full[self.reduced_indices] = eta
        full[self.base] = -eta.sum()
        return full


@dataclass(frozen=True)
class NegTypeResult:
    p: float
    status: Status
    min_eigenvalue: float
    tau: float
    certificate: Optional[np.ndarray] = None

    @property
    def has_negative_type(self) -> bool:
        return self.status is not Status.FAILS


@dataclass(frozen=True)
class SanchezResult:
    value: Optional[float]
    rcond: float

    @property
    def singular(self) -> bool:
        return self.value is None

    @property
    def condition_number(self) -> float:
        return math.inf if self.rcond == 0 else 1.0 / self.rcond


@dataclass(frozen=True)
class GeneralizedRoundnessResult:
    value: float
    bracket: Optional[tuple[float, float]]
    methods: tuple[str, ...]

    @property
    def infinite(self) -> bool:
        return math.isinf(self.value)


@dataclass(frozen=True)
class Violation:
    """A configuration on which the weighted roundness inequality fails.

    ``a_list`` / ``b_list`` hold ``(point, weight)`` pairs; weights are
    multiplicities for enumerated configurations and probabilities for random
    ones. ``margin`` is LHS - RHS in those weights; ``normalized_margin``
    divides by ``sum(a weights) * sum(b weights)``.
    """

    p: float
    a_list: tuple[tuple[int, float], ...]
    b_list: tuple[tuple[int, float], ...]
    margin: float
    normalized_margin: float


def p_distance_matrix(X: FiniteMetricSpace, p: float) -> PDistanceMatrix:
    """Entrywise ``d**p`` with a zero diagonal (also for ``p == 0``)."""
    if p < 0:
        raise ParamOutOfRange(f"p must be nonnegative, got {p!r}")
    d = X.dist
    dp = np.ones_like(d) if p == 0 else d**p
    np.fill_diagonal(dp, 0.0)
    return PDistanceMatrix(float(p), dp)


def _gram_from_dp(dp: np.ndarray, base: int) -> np.ndarray:
    keep = [i for i in range(dp.shape[0]) if i != base]
    r = dp[base, keep]
    a = 0.5 * (r[:, None] + r[None, :] - dp[np.ix_(keep, keep)])
    return 0.5 * (a + a.T)


def gram_matrix(X: FiniteMetricSpace, p: float, base: int = 0) -> GramMatrix:
    if not 0 <= base < X.n_points:
        raise ParamOutOfRange(f"base index {base} out of range")
    dp = p_distance_matrix(X, p).entries
    a = _gram_from_dp(dp, base)
    w, v = np.linalg.eigh(a)
    return GramMatrix(float(p), base, a, w, v)


def spectral_tolerance(eigenvalues: np.ndarray, rtol: float = SPECTRAL_RTOL) -> float:
    return rtol * float(np.max(np.abs(eigenvalues)))


def negative_type_status(
    X: FiniteMetricSpace,
    p: float,
    tau: Optional[float] = None,
    base: int = 0,
) -> NegTypeResult:
    """Classify ``A_p`` as positive definite (Strict), singular PSD (Boundary) or indefinite.

    ``tau`` is the absolute spectral tolerance, default ``1e-9 * max|eigenvalue|``.
    The certificate is a unit eigenvector for the smallest eigenvalue and is
    returned for Boundary and Fails.
    """
    g = gram_matrix(X, p, base)
    lam = float(g.eigenvalues[0])
    t = spectral_tolerance(g.eigenvalues) if tau is None else float(tau)
    if lam > t:
        return NegTypeResult(float(p), Status.STRICT, lam, t)
    status = Status.BOUNDARY if lam >= -t else Status.FAILS
    vec = g.eigenvectors[:, 0].copy()
    return NegTypeResult(float(p), status, lam, t, vec)


def sanchez_invariant(X: FiniteMetricSpace, p: float) -> SanchezResult:
    """``<D_p^{-1} 1, 1>`` via a symmetric indefinite (Bunch-Kaufman) solve.

    Returns a result with ``value=None`` when the reciprocal condition number
    of ``D_p`` falls below ``1e-12``.
    """
    dp = p_distance_matrix(X, p).entries
    m = dp.shape[0]
    anorm = np.linalg.norm(dp, 1)
    sytrf, sytrs, sycon = scipy.linalg.get_lapack_funcs(("sytrf", "sytrs", "sycon"), (dp,))
    fact, ipiv, info = sytrf(dp, lower=1)
    if info > 0:
        return SanchezResult(None, 0.0)
    rcond, _ = sycon(fact, ipiv, anorm, lower=1)
    if rcond < SANCHEZ_RCOND:
        return SanchezResult(None, float(rcond))
    sol, _ = sytrs(fact, ipiv, np.ones(m), lower=1)
    return SanchezResult(float(sol.sum()), float(rcond))


def deza_maehara_floor(n: int) -> float:
    """Exponent ``log2(1 + 1/n)`` below which every ``(n+1)``-point space has negative type."""
    if int(n) != n or n < 2:
        raise ParamOutOfRange(f"n must be an integer >= 2, got {n!r}")
    return math.log2(1.0 + 1.0 / n)


def _psd(X: FiniteMetricSpace, p: float, tau: Optional[float]) -> bool:
    return negative_type_status(X, p, tau).status is not Status.FAILS


def generalized_roundness(
    X: FiniteMetricSpace,
    p_max: float = 64.0,
    bis_tol: float = 1e-9,
    tau: Optional[float] = None,
) -> GeneralizedRoundnessResult:
    """Supremal ``p`` for which ``X`` has ``p``-negative type.

    Ultrametric spaces short-circuit to infinity. Otherwise ``p`` is doubled
    from 1 until ``A_p`` stops being positive semi-definite and the crossover
    is bisected to width ``bis_tol``. Distances are rescaled to a maximum of 1
    first; this changes no status.

    Raises
    ------
    CapReachedNonUltrametric
        If ``A_p`` is still PSD at ``p_max`` for a non-ultrametric space.
    """
    rep = classify(X)
    if rep.is_ultrametric:
        return GeneralizedRoundnessResult(math.inf, None, ("ultrametric-shortcut",))
    Y = X.normalized()

    if not _psd(Y, 1.0, tau):
        lo, hi = 0.0, 1.0
    else:
        lo, hi = 1.0, 2.0
        while _psd(Y, hi, tau):
            if hi >= p_max:
                lam = negative_type_status(Y, p_max, tau).min_eigenvalue
                raise CapReachedNonUltrametric(
                    p_max, rep.ultra_witness, rep.additive_witness, lam
                )
            lo, hi = hi, min(2.0 * hi, p_max)
    while hi - lo > bis_tol:
        mid = 0.5 * (lo + hi)
        if _psd(Y, mid, tau):
            lo = mid
        else:
            hi = mid
    value = 0.5 * (lo + hi)
    methods = ["spectral-bisection"]
    root = sanchez_root(Y, lo - 10 * bis_tol, hi + 10 * bis_tol)
    if root is not None and abs(root - value) <= 10 * bis_tol:
        methods.append("sanchez-root")
    return GeneralizedRoundnessResult(value, (lo, hi), tuple(methods))


def sanchez_root(X: FiniteMetricSpace, a: float, b: float) -> Optional[float]:
    """Root of the Sánchez invariant in ``[a, b]`` if ``D_p`` is regular there and it changes sign."""
    a = max(a, 0.0)
    fa, fb = sanchez_invariant(X, a), sanchez_invariant(X, b)
    if fa.singular or fb.singular or fa.value * fb.value > 0:
        return None

    def f(p):
        r = sanchez_invariant(X, p)
        if r.singular:
            raise _Singular
        return r.value

    try:
        return brentq(f, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    except (_Singular, ValueError):
        return None


class _Singular(Exception):
    pass


def _wgr_margin(dp: np.ndarray, a_idx, a_w, b_idx, b_w) -> float:
    """LHS - RHS of the weighted roundness inequality for the given sides."""
    a_idx, b_idx = np.asarray(a_idx), np.asarray(b_idx)
    a_w, b_w = np.asarray(a_w, float), np.asarray(b_w, float)
    within_a = 0.5 * a_w @ dp[np.ix_(a_idx, a_idx)] @ a_w
    within_b = 0.5 * b_w @ dp[np.ix_(b_idx, b_idx)] @ b_w
    cross = a_w @ dp[np.ix_(a_idx, b_idx)] @ b_w
    return float(within_a + within_b - cross)


def _project_simplex(v: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Row-wise Euclidean projection onto the probability simplex over the ``mask`` entries."""
    u = np.where(mask, v, -np.inf)
    srt = -np.sort(-u, axis=1)
    finite = np.isfinite(srt)
    css = np.cumsum(np.where(finite, srt, 0.0), axis=1)
    k = np.arange(1, v.shape[1] + 1)[None, :]
    cond = finite & (srt - (css - 1.0) / k > 0)
    rho = cond.shape[1] - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = (css[np.arange(v.shape[0]), rho] - 1.0) / (rho + 1)
    return np.where(mask, np.maximum(v - theta[:, None], 0.0), 0.0)


def _polish(dp: np.ndarray, a_mask, b_mask, a_w, b_w, steps: int):
    """Projected gradient ascent of the weighted margin, batched over rows.

    With ``eta = a_w - b_w`` the margin is ``eta^T D_p eta / 2``; each side
    stays on its own simplex and support.
    """
    lr = 1.0 / max(np.linalg.norm(dp), 1e-300)
    for _ in range(steps):
        grad = (a_w - b_w) @ dp
        a_w = _project_simplex(a_w + lr * grad, a_mask)
        b_w = _project_simplex(b_w - lr * grad, b_mask)
    return a_w, b_w


def gr_violation_search(
    X: FiniteMetricSpace,
    p: float,
    max_size: int = 3,
    trials: int = 200,
    seed=0,
    tol: Optional[float] = None,
    polish_steps: int = 300,
    exhaustive_supports: int = 7,
) -> Optional[Violation]:
    """Search for a configuration that violates the generalized roundness inequality.

    Purely combinatorial (no eigen-decomposition), so it can serve as an
    independent check on the spectral route. Three phases:

    1. every pair of disjoint multisets ``a``, ``b`` of equal size
       ``<= max_size``, multiplicities used as integer weights;
    2. for spaces with at most ``exhaustive_supports`` points, every split
       into two disjoint nonempty supports, starting from uniform weights;
    3. ``trials`` random supports with Dirichlet weights.

    Weighted starts in phases 2-3 are improved by projected gradient ascent
    on the two weight simplices. The worst violation (by normalized margin)
    is returned; ``None`` means nothing beyond ``tol`` was found, which
    proves nothing. ``tol`` bounds the normalized margin and defaults to
    ``1e-9 * n_points * max(d^p)``.
    """
    dp = p_distance_matrix(X, p).entries
    m = X.n_points
    if tol is None:
        # same relative level as the spectral tolerance: m * max(d^p) bounds trace(A_p)
        tol = SPECTRAL_RTOL * m * float(dp.max())
    best: Optional[Violation] = None

    def consider(a_idx, a_w, b_idx, b_w):
        nonlocal best
        margin = _wgr_margin(dp, a_idx, a_w, b_idx, b_w)
        norm = margin / (float(np.sum(a_w)) * float(np.sum(b_w)))
        if norm > tol and (best is None or norm > best.normalized_margin * (1 + 1e-9)):
            best = Violation(
                float(p),
                tuple((int(i), float(w)) for i, w in zip(a_idx, a_w)),
                tuple((int(i), float(w)) for i, w in zip(b_idx, b_w)),
                margin,
                norm,
            )

    for size in range(1, max_size + 1):
        counted = []
        for ms in itertools.combinations_with_replacement(range(m), size):
            pts, cnt = np.unique(ms, return_counts=True)
            counted.append((frozenset(pts.tolist()), pts, cnt))
        for (sa, pa, ca), (sb, pb, cb) in itertools.combinations(counted, 2):
            if sa & sb:
                continue
            consider(pa, ca, pb, cb)

    a_masks, b_masks, a_init, b_init = [], [], [], []
    if m <= exhaustive_supports:
        for labels in itertools.product((0, 1, 2), repeat=m):
            lab = np.array(labels)
            a, b = lab == 1, lab == 2
            # (a, b) and (b, a) give the same margin
            if not a.any() or not b.any() or np.argmax(lab == 1) > np.argmax(lab == 2):
                continue
            a_masks.append(a)
            b_masks.append(b)
            a_init.append(a / a.sum())
            b_init.append(b / b.sum())
    rng = np.random.default_rng(seed)
    for _ in range(trials if m >= 2 else 0):
        k = int(rng.integers(2, m + 1))
        pts = rng.permutation(m)[:k]
        cut = int(rng.integers(1, k))
        a, b = np.zeros(m, bool), np.zeros(m, bool)
        a[pts[:cut]] = True
        b[pts[cut:]] = True
        wa, wb = np.zeros(m), np.zeros(m)
        wa[a] = rng.dirichlet(np.ones(cut))
        wb[b] = rng.dirichlet(np.ones(k - cut))
        a_masks.append(a)
        b_masks.append(b)
        a_init.append(wa)
        b_init.append(wb)
    if a_masks:
        a_w, b_w = _polish(
            dp, np.array(a_masks), np.array(b_masks), np.array(a_init), np.array(b_init),
            polish_steps,
        )
        for wa, wb in zip(a_w, b_w):
            ai, bi = np.nonzero(wa > 0)[0], np.nonzero(wb > 0)[0]
            if ai.size and bi.size:
                consider(ai, wa[ai], bi, wb[bi])
    return best
