"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import io
import json
import math
import time

import numpy as np
import pytest

from metricround import (
    Status,
    cycle_metric,
    embed_euclidean,
    find_polygonal_equality,
    generalized_roundness,
    gr_violation_search,
    gram_matrix,
    lbk_for_target,
    make_lbk,
    negative_type_status,
    p_distance_matrix,
    random_metric,
    random_graph_metric,
    random_tree,
    random_ultrametric,
    roundness_exponent_check,
    sanchez_invariant,
    tree_path_metric,
    validate_metric,
    verify_isometry,
)
from metricround.cli import run_cli

LBK = [(3, 2), (2, 3), (1.5, 5), (9, 2)]


def report(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\n[acceptance {number:2d}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def _z(b):
    return 2 * b / (b + 1)


def test_01_lbk_closed_form(capsys):
    worst_err, worst_time = 0.0, 0.0
    for b, k in LBK:
        doc = json.dumps({"matrix": make_lbk(b, k).dist.tolist()})
        out = io.StringIO()
        t0 = time.perf_counter()
        code = run_cli(["genround", "-"], stdin=io.StringIO(doc), stdout=out, stderr=io.StringIO())
        worst_time = max(worst_time, time.perf_counter() - t0)
        assert code == 0
        value = json.loads(out.getvalue())["results"]["value"]
        expected = math.log(2 * k / (k - 1)) / math.log(_z(b))
        worst_err = max(worst_err, abs(value - expected))
    report(capsys, 1, worst_err <= 1e-6 and worst_time < 1.0,
           f"max error {worst_err:.2e}, slowest {worst_time:.3f} s")


def test_02_sanchez_identity(capsys):
    worst = 0.0
    for b, k in LBK:
        X = make_lbk(b, k)
        for p in (0, 1, 2, 3):
            r = sanchez_invariant(X, p)
            assert not r.singular
            worst = max(worst, abs(r.value - (2 - (k - 1) / k * _z(b) ** p)))
    report(capsys, 2, worst <= 1e-9, f"max error {worst:.2e}")


def _ultrametrics():
    return [random_ultrametric(3 + seed % 10, seed=seed) for seed in range(25)]


def test_03_ultrametric_equivalences(capsys):
    t0 = time.perf_counter()
    problems = []
    for seed, X in enumerate(_ultrametrics()):
        for p in (0.5, 1, 2, 4, 8, 16):
            if negative_type_status(X, p).status is not Status.STRICT:
                problems.append((seed, "status", p))
        if not generalized_roundness(X).infinite:
            problems.append((seed, "genround"))
        if find_polygonal_equality(X) is not None:
            problems.append((seed, "polygonal"))
        for p in (1, 5, 10, 20):
            if not roundness_exponent_check(X, p).holds:
                problems.append((seed, "roundness", p))
    elapsed = time.perf_counter() - t0
    report(capsys, 3, not problems and elapsed < 10,
           f"{len(problems)} problems {problems[:3]}, {elapsed:.2f} s")


def test_04_lemin_rank(capsys):
    problems = []
    for seed, X in enumerate(_ultrametrics()):
        n = X.n_points - 1
        E = embed_euclidean(X, 2)
        if E.rank != n or E.residual >= 1e-8:
            problems.append((seed, E.rank, E.residual))
        err = verify_isometry(E.truncated(n - 1), X).max_error
        if err <= 1e-4:
            problems.append((seed, "truncated", err))
    report(capsys, 4, not problems, f"{len(problems)} problems {problems[:3]}")


def _mixed_spaces():
    rng = np.random.default_rng(5)
    spaces = []
    for i in range(100):
        kind = i % 4
        if kind == 0:
            spaces.append(random_ultrametric(int(rng.integers(3, 10)), seed=i))
        elif kind == 1:
            spaces.append(tree_path_metric(random_tree(int(rng.integers(4, 12)), seed=i)))
        elif kind == 2:
            X = random_ultrametric(int(rng.integers(3, 10)), seed=i)
            d = X.dist * (1 + rng.uniform(-0.05, 0.05, X.dist.shape))
            d = np.triu(d, 1)
            spaces.append(validate_metric(d + d.T))
        else:
            spaces.append(random_graph_metric(int(rng.integers(3, 9)), seed=i))
    return spaces


def test_05_strict_rank_duality(capsys):
    bad = []
    for i, X in enumerate(_mixed_spaces()):
        lam = gram_matrix(X, 2).eigenvalues
        rank = int(np.sum(lam > 1e-10 * lam[-1]))
        strict = negative_type_status(X, 2).status is Status.STRICT
        if (rank == X.n_points - 1) != strict:
            bad.append(i)
    report(capsys, 5, not bad, f"{len(bad)} counterexamples out of 100")


def test_06_target_attainment(capsys):
    worst = 0.0
    for target in (1.1, 1.5, 2, math.e, 5, 10):
        prm = lbk_for_target(target)
        worst = max(worst, abs(generalized_roundness(make_lbk(prm.b, prm.k)).value - target))
    report(capsys, 6, worst <= 1e-6, f"max error {worst:.2e}")


def test_07_c4_suite(capsys):
    X = cycle_metric(4)
    value = generalized_roundness(X).value
    eq = find_polygonal_equality(X)
    diag = {((0, 0.5), (2, 0.5)), ((1, 0.5), (3, 0.5))}
    sides = {tuple((i, round(w, 9)) for i, w in s) for s in (eq.a_side, eq.b_side)}
    checks = {
        "genround": abs(value - 1.0) <= 1e-6,
        "diagonals": sides == diag,
        "residual": eq.residual < 1e-9,
        "boundary@1": negative_type_status(X, 1).status is Status.BOUNDARY,
        "fails@1.1": negative_type_status(X, 1.1).status is Status.FAILS,
        "violation@1.05": gr_violation_search(X, 1.05, max_size=4) is not None,
        "none@0.95": gr_violation_search(X, 0.95, max_size=4) is None,
    }
    failed = [k for k, ok in checks.items() if not ok]
    report(capsys, 7, not failed, f"value {value:.10f}, residual {eq.residual:.1e}, failed {failed}")


def test_08_oracle_agreement(capsys):
    found, false_alarms, misses = 0, [], []
    for seed in range(20):
        X = random_metric(4 + seed % 3, seed=100 + seed)
        v = generalized_roundness(X).value
        if gr_violation_search(X, v - 1e-5, max_size=3, seed=seed) is not None:
            false_alarms.append(seed)
        if gr_violation_search(X, v + 0.05, max_size=3, seed=seed) is not None:
            found += 1
        else:
            misses.append(seed)
    report(capsys, 8, not false_alarms and found >= 18,
           f"found {found}/20 above, misses {misses}, false alarms {false_alarms}")


def test_09_floors(capsys):
    p = math.log2(1.25)
    fails = [s for s in range(200)
             if negative_type_status(random_graph_metric(5, seed=s), p).status is Status.FAILS]
    low_gr, round_fail = [], []
    for s in range(50):
        X = tree_path_metric(random_tree(8, seed=1000 + s))
        if not generalized_roundness(X).value > 1 + 1e-9:
            low_gr.append(s)
        if not roundness_exponent_check(X, 2).holds:
            round_fail.append(s)
    ok = not fails and not low_gr and not round_fail
    report(capsys, 9, ok, f"floor fails {len(fails)}/200, tree gr<=1 {low_gr}, roundness(2) fails {round_fail}")


def test_10_identity_audit(capsys):
    rng = np.random.default_rng(2024)
    worst = 0.0
    for trial in range(1000):
        m = int(rng.integers(2, 10))
        gen = trial % 3
        if gen == 0:
            X = random_graph_metric(m, seed=trial)
        elif gen == 1:
            X = random_ultrametric(m, seed=trial)
        else:
            X = random_metric(m, seed=trial)
        p = float(rng.uniform(0, 4))
        g = gram_matrix(X, p, base=int(rng.integers(0, m)))
        eta = rng.normal(size=m - 1)
        full = g.augment(eta)
        dp = p_distance_matrix(X, p).entries
        scale = max(1.0, float(dp.max())) * float(np.abs(full).sum()) ** 2
        err = abs(2 * g.quadratic_form(eta) + full @ dp @ full) / scale
        worst = max(worst, err)
    report(capsys, 10, worst <= 1e-10, f"max scaled error {worst:.2e}")
