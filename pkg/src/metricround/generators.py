"""Metric families with known answers.

* the two-distance leaf metric on the leaves of a weighted star (``make_lbk``)
  and the parameter choice hitting a prescribed generalized roundness;
* random dendrogram ultrametrics;
* path metrics of weighted trees, plus a few fixed test spaces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .errors import CycleDetected, DisconnectedTree, ParamOutOfRange, TargetOutOfRange
from .metric_core import FiniteMetricSpace, validate_metric

K_CAP = 10**6


@dataclass(frozen=True)
class LbkParams:
    b: float
    k: int

    @property
    def z(self) -> float:
        return 2.0 * self.b / (self.b + 1.0)

    @property
    def closed_form_gr(self) -> float:
        return math.log(2.0 * self.k / (self.k - 1)) / math.log(self.z)


@dataclass(frozen=True)
class WeightedTree:
    n_vertices: int
    edges: tuple[tuple[int, int, float], ...]
    subset: Optional[tuple[int, ...]] = None

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_vertices, dtype=int)
        for u, v, _ in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def leaves(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.nonzero(self.degrees() == 1)[0])


@dataclass(frozen=True)
class Dendrogram:
    """Binary merge history over leaves ``0..n_leaves-1``.

    Merge ``i`` joins clusters ``left`` and ``right`` (ids below ``n_leaves``
    are leaves, id ``n_leaves + i`` is the cluster created by merge ``i``) at
    ``height``. Heights must be positive and strictly increasing.
    """

    n_leaves: int
    merges: tuple[tuple[int, int, float], ...] = field(default=())

    def __post_init__(self):
        if len(self.merges) != self.n_leaves - 1:
            raise ParamOutOfRange(
                f"{self.n_leaves} leaves need {self.n_leaves - 1} merges, got {len(self.merges)}"
            )
        heights = [h for _, _, h in self.merges]
        if any(h <= 0 for h in heights):
            raise ParamOutOfRange("merge heights must be positive")
        if any(b <= a for a, b in zip(heights, heights[1:])):
            raise ParamOutOfRange("merge heights must be strictly increasing")
        used: set[int] = set()
        for i, (a, b, _) in enumerate(self.merges):
            live = self.n_leaves + i
            if a == b or a >= live or b >= live or a in used or b in used:
                raise ParamOutOfRange(f"merge {i} joins invalid clusters ({a}, {b})")
            used.update((a, b))

    def cophenetic(self) -> np.ndarray:
        """Matrix of lowest-common-merge heights."""
        n = self.n_leaves
        members: dict[int, list[int]] = {i: [i] for i in range(n)}
        d = np.zeros((n, n))
        for i, (a, b, h) in enumerate(self.merges):
            left, right = members.pop(a), members.pop(b)
            d[np.ix_(left, right)] = h
            d[np.ix_(right, left)] = h
            members[n + i] = left + right
        return d


def make_lbk(b: float, k: int) -> FiniteMetricSpace:
    """Leaves of a star with one edge ``1/(b+1)`` and ``k`` edges ``b/(b+1)``.

    Point 0 is the short leaf; it is at distance 1 from the others, which are
    mutually at distance ``z = 2b/(b+1)``.
    """
    if not (b > 1 and math.isfinite(b)):
        raise ParamOutOfRange(f"b must be a finite real > 1, got {b!r}")
    if int(k) != k or k < 2:
        raise ParamOutOfRange(f"k must be an integer >= 2, got {k!r}")
    k = int(k)
    z = 2.0 * b / (b + 1.0)
    d = np.full((k + 1, k + 1), z)
    d[0, :] = d[:, 0] = 1.0
    np.fill_diagonal(d, 0.0)
    return validate_metric(d)


def lbk_for_target(target: float, k_cap: int = K_CAP) -> LbkParams:
    """Parameters ``(b, k)`` whose star leaf metric has generalized roundness ``target``.

    Takes the smallest ``k >= 2`` with ``log2(2k/(k-1)) < target``, then
    ``z = (2k/(k-1))**(1/target)`` and ``b = z/(2 - z)``.
    """
    if not (math.isfinite(target) and target > 1):
        raise TargetOutOfRange(f"target must be a finite real > 1, got {target!r}")
    # log2(2k/(k-1)) < t  <=>  k > 2^t / (2^t - 2)   (for t > 1)
    two_t = 2.0**target
    k = max(2, math.floor(two_t / (two_t - 2.0)) + 1)
    while k > 2 and math.log2(2.0 * (k - 1) / (k - 2)) < target:
        k -= 1
    while math.log2(2.0 * k / (k - 1)) >= target:
        k += 1
    if k > k_cap:
        raise TargetOutOfRange(f"target {target!r} needs k = {k} > cap {k_cap}")
    z = (2.0 * k / (k - 1)) ** (1.0 / target)
    b = z / (2.0 - z)
    return LbkParams(b, k)


def random_dendrogram(
    n: int, seed=None, height_range: tuple[float, float] = (1.0, 2.0)
) -> Dendrogram:
    if int(n) != n or n < 2:
        raise ParamOutOfRange(f"n must be an integer >= 2, got {n!r}")
    lo, hi = height_range
    if not 0 < lo < hi:
        raise ParamOutOfRange(f"height_range must satisfy 0 < lo < hi, got {height_range!r}")
    rng = np.random.default_rng(seed)
    sep = 1e-6 * (hi - lo)
    while True:
        heights = np.sort(rng.uniform(lo, hi, size=n - 1))
        if n == 2 or np.min(np.diff(heights)) >= sep:
            break
    live = list(range(n))
    merges = []
    for i, h in enumerate(heights):
        a, b = sorted(rng.choice(len(live), size=2, replace=False))
        ca, cb = live[a], live[b]
        del live[b], live[a]
        live.append(n + i)
        merges.append((int(ca), int(cb), float(h)))
    return Dendrogram(n, tuple(merges))


def random_ultrametric(
    n: int, seed=None, height_range: tuple[float, float] = (1.0, 2.0)
) -> FiniteMetricSpace:
    """Cophenetic distances of a random binary dendrogram on ``n`` points."""
    return validate_metric(random_dendrogram(n, seed, height_range).cophenetic())


def _check_tree(T: WeightedTree) -> None:
    V = T.n_vertices
    if V < 1:
        raise DisconnectedTree("tree has no vertices")
    for u, v, w in T.edges:
        if not (0 <= u < V and 0 <= v < V):
            raise ParamOutOfRange(f"edge ({u}, {v}) references a missing vertex")
        if u == v:
            raise CycleDetected(f"self-loop at vertex {u}")
        if not w > 0:
            raise ParamOutOfRange(f"edge ({u}, {v}) has nonpositive length {w!r}")
    if V > 1:
        rows = [u for u, _, _ in T.edges]
        cols = [v for _, v, _ in T.edges]
        g = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(V, V))
        n_comp, _ = connected_components(g, directed=False)
        if n_comp > 1:
            raise DisconnectedTree(f"tree has {n_comp} connected components")
    if len(T.edges) != V - 1:
        raise CycleDetected(f"connected graph with {V} vertices and {len(T.edges)} edges has a cycle")


def tree_path_metric(T: WeightedTree) -> FiniteMetricSpace:
    """Path-length distances between the vertices in ``T.subset`` (leaves by default)."""
    _check_tree(T)
    V = T.n_vertices
    rows = [u for u, _, _ in T.edges]
    cols = [v for _, v, _ in T.edges]
    w = [float(x) for _, _, x in T.edges]
    g = coo_matrix((w, (rows, cols)), shape=(V, V)).tocsr()
    subset = list(T.subset) if T.subset is not None else list(T.leaves())
    if len(subset) < 2:
        raise ParamOutOfRange("tree metric needs at least two selected vertices")
    d = shortest_path(g, method="D", directed=False, indices=subset)[:, subset]
    return validate_metric(d, labels=[str(v) for v in subset])


def random_tree(
    n_vertices: int,
    seed=None,
    length_range: tuple[float, float] = (0.5, 1.5),
    subset: Optional[Sequence[int]] = None,
) -> WeightedTree:
    """Uniform-attachment tree: vertex ``i`` hangs off a uniformly chosen earlier vertex."""
    if n_vertices < 2:
        raise ParamOutOfRange("a random tree needs at least 2 vertices")
    rng = np.random.default_rng(seed)
    edges = []
    for i in range(1, n_vertices):
        parent = int(rng.integers(0, i))
        edges.append((parent, i, float(rng.uniform(*length_range))))
    return WeightedTree(n_vertices, tuple(edges), None if subset is None else tuple(subset))


def star_tree(b: float, k: int) -> WeightedTree:
    """Star with centre 0, one leaf edge of length ``1/(b+1)`` and ``k`` of length ``b/(b+1)``."""
    edges = [(0, 1, 1.0 / (b + 1.0))]
    edges += [(0, i + 2, b / (b + 1.0)) for i in range(k)]
    return WeightedTree(k + 2, tuple(edges))


def complete_binary_tree(depth: int, subset: Optional[Sequence[int]] = None) -> WeightedTree:
    """Unit-length complete binary tree with ``2**(depth+1) - 1`` vertices; all vertices kept by default."""
    V = 2 ** (depth + 1) - 1
    edges = tuple(((i - 1) // 2, i, 1.0) for i in range(1, V))
    return WeightedTree(V, edges, tuple(range(V)) if subset is None else tuple(subset))


def cycle_metric(m: int) -> FiniteMetricSpace:
    """Shortest-path metric of the unit-length cycle on ``m`` vertices."""
    if m < 3:
        raise ParamOutOfRange("a cycle needs at least 3 vertices")
    i = np.arange(m)
    gap = np.abs(i[:, None] - i[None, :])
    return validate_metric(np.minimum(gap, m - gap).astype(float))


def random_graph_metric(
    n_points: int, seed=None, weight_range: tuple[float, float] = (0.1, 1.0)
) -> FiniteMetricSpace:
    """Shortest-path closure of a complete graph with random edge weights.

    Unlike :func:`random_metric` this produces triangle equalities and widely
    spread distances.
    """
    rng = np.random.default_rng(seed)
    w = np.triu(rng.uniform(*weight_range, size=(n_points, n_points)), 1)
    d = shortest_path(w + w.T, method="FW", directed=False)
    return validate_metric(d)


def random_metric(n_points: int, seed=None, low: float = 1.0, high: float = 2.0) -> FiniteMetricSpace:
    """Symmetric matrix with off-diagonal entries uniform in ``[low, high]``, ``high <= 2 low``.

    Any such matrix satisfies the triangle inequality.
    """
    if not 0 < low <= high <= 2 * low:
        raise ParamOutOfRange("need 0 < low <= high <= 2*low")
    rng = np.random.default_rng(seed)
    d = rng.uniform(low, high, size=(n_points, n_points))
    d = np.triu(d, 1)
    return validate_metric(d + d.T)
