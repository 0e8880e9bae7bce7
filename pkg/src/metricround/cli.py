"""Command-line interface.

Usage::

    metricround validate  FILE
    metricround classify  FILE
    metricround negtype   FILE --p P
    metricround genround  FILE [--pmax 64] [--tol 1e-9]
    metricround roundness FILE (--p P | --profile)
    metricround embed     FILE [--p 2] [--out coords.json]
    metricround polygonal FILE
    metricround generate  (lbk --b B --k K | lbk-target --gr G
                           | ultrametric --n N --seed S | tree --spec FILE) [--out matrix.json]

``FILE`` is a JSON document ``{"labels": [...], "matrix": [[...], ...]}`` or a
CSV grid with an optional header row of labels; ``-`` reads standard input.
Reports are JSON on standard output. Exit codes: 0 success, 2 invalid input
metric, 3 analysis error, 4 usage error; errors are also written to standard
error as a JSON object.

Setting ``METRICROUND_TOL`` changes the default bisection width used by
``genround`` and ``polygonal``.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from typing import Any, Optional, Sequence

import numpy as np

from . import __version__
from .embed import embed_euclidean
from .errors import AnalysisError, InvalidMetricError, MetricRoundError, ParamOutOfRange
from .generators import (
    WeightedTree,
    lbk_for_target,
    make_lbk,
    random_ultrametric,
    tree_path_metric,
)
from .metric_core import FiniteMetricSpace, classify, validate_metric
from .negtype import generalized_roundness, negative_type_status, sanchez_invariant
from .polygonal import find_polygonal_equality
from .roundness import is_infinite_roundness, roundness_exponent_check, roundness_profile

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_ANALYSIS = 3
EXIT_USAGE = 4

TOL_ENV = "METRICROUND_TOL"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# --------------------------------------------------------------------- output


def _encode(obj: Any) -> str:
    """Deterministic JSON: sorted keys, floats with 17 significant digits."""
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "null"
        if math.isinf(x):
            return json.dumps("infinite" if x > 0 else "-infinite")
        text = format(x, ".17g")
        return text if any(c in text for c in ".en") else text + ".0"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        items = sorted(obj.items())
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in items) + "}"
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    if hasattr(obj, "value") and isinstance(obj.value, str):  # enums
        return json.dumps(obj.value)
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj: Any) -> str:
    return _encode(obj) + "\n"


def input_digest(X: FiniteMetricSpace) -> str:
    canon = _encode({"labels": list(X.labels), "matrix": X.dist})
    return "sha256:" + hashlib.sha256(canon.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------- input


def _read_text(path: str, stdin) -> str:
    if path == "-":
        return stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def parse_input(text: str):
    """Return ``(matrix, labels)`` from JSON or CSV text."""
    stripped = text.lstrip()
    if stripped.startswith("{") or stripped.startswith("["):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidMetricError(f"malformed JSON input: {exc}") from None
        if isinstance(doc, list):
            return doc, None
        if not isinstance(doc, dict) or "matrix" not in doc:
            raise InvalidMetricError('JSON input needs a "matrix" field')
        return doc["matrix"], doc.get("labels")
    rows = [r for r in csv.reader(io.StringIO(text)) if any(c.strip() for c in r)]
    if not rows:
        raise InvalidMetricError("empty input")
    labels = None

    def numeric(row):
        try:
            [float(c) for c in row]
            return True
        except ValueError:
            return False

    if not numeric(rows[0]):
        labels = [c.strip() for c in rows[0]]
        rows = rows[1:]
    try:
        matrix = [[float(c) for c in r] for r in rows]
    except ValueError as exc:
        raise InvalidMetricError(f"non-numeric CSV entry: {exc}") from None
    return matrix, labels


def load_space(path: str, stdin=None) -> FiniteMetricSpace:
    try:
        text = _read_text(path, stdin if stdin is not None else sys.stdin)
    except OSError as exc:
        raise InvalidMetricError(f"cannot read {path}: {exc}") from None
    matrix, labels = parse_input(text)
    return validate_metric(matrix, labels)


def _write_json(path: str, obj: Any) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))


def _matrix_doc(X: FiniteMetricSpace) -> dict:
    return {"labels": list(X.labels), "matrix": X.dist}


# ------------------------------------------------------------------- commands


def _default_tol() -> float:
    env = os.environ.get(TOL_ENV)
    if env is None:
        return 1e-9
    try:
        return float(env)
    except ValueError:
        raise UsageError(f"{TOL_ENV} must be a number, got {env!r}") from None


def cmd_validate(args, X):
    return {"valid": True, "n_points": X.n_points, "labels": list(X.labels),
            "max_distance": X.max_distance}


def cmd_classify(args, X):
    r = classify(X)
    return {
        "is_ultrametric": r.is_ultrametric,
        "is_additive": r.is_additive,
        "ultra_witness": r.ultra_witness,
        "additive_witness": r.additive_witness,
        "tol": r.tol,
    }


def cmd_negtype(args, X):
    r = negative_type_status(X, args.p)
    s = sanchez_invariant(X, args.p)
    return {
        "p": args.p,
        "status": r.status,
        "min_eigenvalue": r.min_eigenvalue,
        "tau": r.tau,
        "certificate": r.certificate,
        "sanchez_invariant": "singular" if s.singular else s.value,
        "sanchez_condition": s.condition_number,
    }


def cmd_genround(args, X):
    tol = args.tol if args.tol is not None else _default_tol()
    g = generalized_roundness(X, p_max=args.pmax, bis_tol=tol)
    return {
        "value": g.value,
        "bracket": g.bracket,
        "bracket_width": None if g.bracket is None else g.bracket[1] - g.bracket[0],
        "method": g.methods[0],
        "methods": list(g.methods),
    }


def cmd_roundness(args, X):
    if args.profile:
        if is_infinite_roundness(X):
            return {"mode": "profile", "infinite": True, "global_lower": math.inf}
        pr = roundness_profile(X)
        return {
            "mode": "profile",
            "infinite": False,
            "global_lower": pr.global_lower,
            "witness": pr.witness,
            "grid_min": float(pr.grid[0]),
            "grid_max": float(pr.grid[-1]),
            "grid_points": int(pr.grid.size),
            "quadruples": len(pr.records),
        }
    c = roundness_exponent_check(X, args.p)
    return {"mode": "check", "p": c.p, "holds": c.holds, "witness": c.witness, "margin": c.margin}


def cmd_embed(args, X):
    E = embed_euclidean(X, p=args.p)
    if args.out:
        _write_json(args.out, {"labels": list(X.labels), "p": E.p, "rank": E.rank,
                               "coords": E.coords})
    return {"p": E.p, "rank": E.rank, "residual": E.residual, "coords": E.coords,
            "eigenvalues": E.eigenvalues}


def cmd_polygonal(args, X):
    tol = _default_tol()
    eq = find_polygonal_equality(X, bis_tol=tol)
    if eq is None:
        return {"equality": None, "reason": "ultrametric"}
    return {
        "equality": {
            "p": eq.p,
            "a_side": [[i, w] for i, w in eq.a_side],
            "b_side": [[i, w] for i, w in eq.b_side],
            "residual": eq.residual,
        }
    }


def _load_tree(path: str) -> WeightedTree:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        edges = tuple((int(u), int(v), float(w)) for u, v, w in doc["edges"])
        subset = doc.get("subset")
        return WeightedTree(int(doc["vertices"]), edges,
                            None if subset is None else tuple(int(s) for s in subset))
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise InvalidMetricError(f"bad tree spec {path}: {exc}") from None


def cmd_generate(args):
    extra: dict = {}
    if args.family == "lbk":
        X = make_lbk(args.b, args.k)
        extra["params"] = {"b": args.b, "k": args.k}
    elif args.family == "lbk-target":
        P = lbk_for_target(args.gr)
        X = make_lbk(P.b, P.k)
        extra["params"] = {"b": P.b, "k": P.k, "z": P.z, "closed_form_gr": P.closed_form_gr}
    elif args.family == "ultrametric":
        X = random_ultrametric(args.n, seed=args.seed)
        extra["params"] = {"n": args.n}
        extra["seed"] = args.seed
    else:
        X = tree_path_metric(_load_tree(args.spec))
    return X, extra


# ----------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="metricround", description="Roundness and negative type of finite metric spaces")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def with_file(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("file", help="JSON or CSV distance matrix, '-' for stdin")
        return p

    with_file("validate", "check the metric axioms")
    with_file("classify", "ultrametric and four-point tests")
    p = with_file("negtype", "negative type status at exponent p")
    p.add_argument("--p", type=float, required=True)
    p = with_file("genround", "generalized roundness")
    p.add_argument("--pmax", type=float, default=64.0)
    p.add_argument("--tol", type=float, default=None)
    p = with_file("roundness", "roundness check or profile")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--p", type=float)
    g.add_argument("--profile", action="store_true")
    p = with_file("embed", "minimal Euclidean embedding of d^(p/2)")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--out")
    with_file("polygonal", "polygonal equality at the generalized roundness")

    gen = sub.add_parser("generate", help="emit a metric with known properties")
    fam = gen.add_subparsers(dest="family", required=True, parser_class=_Parser)
    f = fam.add_parser("lbk")
    f.add_argument("--b", type=float, required=True)
    f.add_argument("--k", type=int, required=True)
    f = fam.add_parser("lbk-target")
    f.add_argument("--gr", type=float, required=True)
    f = fam.add_parser("ultrametric")
    f.add_argument("--n", type=int, required=True)
    f.add_argument("--seed", type=int, required=True)
    f = fam.add_parser("tree")
    f.add_argument("--spec", required=True)
    for f in fam.choices.values():
        f.add_argument("--out")
    return ap


_COMMANDS = {
    "validate": cmd_validate,
    "classify": cmd_classify,
    "negtype": cmd_negtype,
    "genround": cmd_genround,
    "roundness": cmd_roundness,
    "embed": cmd_embed,
    "polygonal": cmd_polygonal,
}


def run_cli(argv: Optional[Sequence[str]] = None, stdin=None, stdout=None, stderr=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        base = {"command": argv, "tool_version": __version__}
        if args.command == "generate":
            X, extra = cmd_generate(args)
            doc = {**base, **extra, **_matrix_doc(X), "input_digest": input_digest(X)}
            if args.out:
                _write_json(args.out, _matrix_doc(X))
                doc = {**base, **extra, "input_digest": input_digest(X), "written": args.out}
            stdout.write(dumps(doc))
            return EXIT_OK
        X = load_space(args.file, stdin)
        results = _COMMANDS[args.command](args, X)
        stdout.write(dumps({**base, "input_digest": input_digest(X), "results": results}))
        return EXIT_OK
    except SystemExit as exc:  # --help / --version
        return EXIT_OK if not exc.code else EXIT_USAGE
    except UsageError as exc:
        stderr.write(dumps({"error": "UsageError", "message": str(exc)}))
        return EXIT_USAGE
    except ParamOutOfRange as exc:
        stderr.write(dumps(exc.to_dict()))
        return EXIT_USAGE
    except InvalidMetricError as exc:
        stderr.write(dumps(exc.to_dict()))
        return EXIT_INVALID
    except (AnalysisError, MetricRoundError) as exc:
        stderr.write(dumps(exc.to_dict()))
        return EXIT_ANALYSIS


def main() -> None:
    sys.exit(run_cli())
