import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from metricround import (
    classify,
    metric_transform,
    random_metric,
    random_tree,
    random_ultrametric,
    tree_path_metric,
    validate_metric,
)
from metricround.errors import (
    AsymmetricEntry,
    NonpositiveOffDiagonal,
    NonzeroDiagonal,
    NotSquare,
    TransformNotMetric,
    TriangleViolation,
)


def test_two_point_space():
    X = validate_metric([[0, 1], [1, 0]])
    assert X.n_points == 2 and X.labels == ("0", "1")


def test_triangle_violation_reports_triple():
    with pytest.raises(TriangleViolation) as exc:
        validate_metric([[0, 1, 3], [1, 0, 1], [3, 1, 0]])
    assert (exc.value.i, exc.value.j, exc.value.k) == (0, 1, 2)
    assert exc.value.slack == pytest.approx(1.0)


def test_lbk_matrix_is_valid():
    X = validate_metric([[0, 1, 1], [1, 0, 1.5], [1, 1.5, 0]])
    assert X.max_distance == 1.5


@pytest.mark.parametrize(
    "matrix, err",
    [
        ([[0, 1, 2], [1, 0, 1]], NotSquare),
        ([[0]], NotSquare),
        ([[0, 1], [2, 0]], AsymmetricEntry),
        ([[1, 1], [1, 0]], NonzeroDiagonal),
        ([[0, 0], [0, 0]], NonpositiveOffDiagonal),
        ([[0, -1], [-1, 0]], NonpositiveOffDiagonal),
    ],
)
def test_validation_errors(matrix, err):
    with pytest.raises(err):
        validate_metric(matrix)


def test_labels_kept():
    X = validate_metric([[0, 2], [2, 0]], labels=["a", "b"])
    assert X.labels == ("a", "b")


def test_dist_is_read_only(l32):
    with pytest.raises(ValueError):
        l32.dist[0, 1] = 5


def test_classify_equilateral(equilateral):
    r = classify(equilateral)
    assert r.is_ultrametric and r.is_additive
    assert r.ultra_witness is None and r.additive_witness is None


def test_classify_lbk(l32):
    r = classify(l32)
    assert not r.is_ultrametric
    assert r.ultra_witness == (1, 2, 0)
    assert r.is_additive


def test_classify_c4(c4):
    r = classify(c4)
    assert not r.is_additive
    x, y, z, w = r.additive_witness
    d = c4.dist
    assert d[x, y] + d[z, w] > max(d[x, z] + d[y, w], d[x, w] + d[y, z])
    assert (d[x, y], d[z, w]) == (2, 2)


def test_witness_reproduces_violation():
    X = random_metric(7, seed=3)
    r = classify(X)
    d = X.dist
    x, y, z = r.ultra_witness
    assert d[x, y] > max(d[x, z], d[y, z]) + r.tol


def test_ultrametric_implies_additive():
    for s in range(10):
        r = classify(random_ultrametric(8, seed=s))
        assert r.is_ultrametric and r.is_additive


def _brute_additive(d, tol):
    n = d.shape[0]
    for quad in itertools.combinations(range(n), 4):
        for x, y, z, w in itertools.permutations(quad):
            if d[x, y] + d[z, w] > max(d[x, z] + d[y, w], d[x, w] + d[y, z]) + tol:
                return False
    return True


@pytest.mark.parametrize("seed", range(6))
def test_additive_matches_brute_force(seed):
    spaces = [
        random_metric(6, seed=seed),
        tree_path_metric(random_tree(9, seed=seed)),
        random_ultrametric(7, seed=seed),
    ]
    for X in spaces:
        r = classify(X)
        assert r.is_additive == _brute_additive(X.dist, r.tol)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(3, 7), kind=st.sampled_from(["rand", "tree", "ultra"]))
def test_classify_permutation_invariant(seed, n, kind):
    if kind == "rand":
        X = random_metric(n, seed=seed)
    elif kind == "tree":
        X = tree_path_metric(random_tree(n + 2, seed=seed))
    else:
        X = random_ultrametric(n, seed=seed)
    perm = np.random.default_rng(seed).permutation(X.n_points)
    a, b = classify(X), classify(X.permuted(perm))
    assert (a.is_ultrametric, a.is_additive) == (b.is_ultrametric, b.is_additive)


def test_transform_identity(l32):
    assert metric_transform(l32, 1) == l32


def test_transform_collinear_squared_fails(collinear):
    with pytest.raises(TransformNotMetric) as exc:
        metric_transform(collinear, 2)
    assert exc.value.slack == pytest.approx(2.0)


def test_transform_small_p_always_metric():
    X = random_metric(6, seed=1)
    Y = metric_transform(X, 0.3)
    np.testing.assert_allclose(Y.dist, X.dist**0.3)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), p=st.floats(0.05, 4.0))
def test_transform_keeps_ultrametric(seed, p):
    X = random_ultrametric(7, seed=seed)
    assert classify(metric_transform(X, p)).is_ultrametric
