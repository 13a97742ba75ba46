"""Command-line entry point: ``cliquelab <command> [options]``.

Exit codes: 0 success, 1 validation error, 2 budget exhaustion in a
non-Monte-Carlo command, 3 verification failure.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import densities as dn
from . import optimization as op
from .errors import BudgetExceeded
from .graphon import (FunctionGraphon, GraphonError, StepBigraphon, StepGraphon,
                      discretize, load_model, restrict)
from .lab import ExperimentSpec, records_csv, result_json, run_experiment, run_verify, to_json
from .sampler import format_edgelist, sample_bipartite, sample_graph, sample_weighted
from .solvers import DEFAULT_BUDGET

EXIT_OK, EXIT_INVALID, EXIT_BUDGET, EXIT_VERIFY = 0, 1, 2, 3


def _int_list(text: str):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _budget(text: str) -> int:
    return int(float(text))


def _common(p: argparse.ArgumentParser, model=True):
    if model:
        p.add_argument("--model", required=True, help="JSON model document")
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="json")


def _mc(p: argparse.ArgumentParser, n_default=None):
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--n", type=_int_list, default=n_default, required=n_default is None)
    p.add_argument("--budget", type=_budget, default=DEFAULT_BUDGET)
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--timings", action="store_true", help="record wall time (output no longer reproducible)")


class _Parser(argparse.ArgumentParser):
    # usage errors are validation errors (exit 1); 2 is reserved for budgets
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cliquelab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kappa", help="clique rate kappa of a step graphon")
    _common(p)
    p.add_argument("--grid", type=int, default=32, help="grid size for function graphons")

    p = sub.add_parser("xi", help="second-moment functional xi")
    _common(p)
    p.add_argument("--grid", type=int, default=32)

    p = sub.add_parser("zoom", help="subset whose restriction has 1/xi close to kappa")
    _common(p)
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--grid", type=int, default=32)

    p = sub.add_parser("sample", help="sample G(n,W), H(n,W) or B(n,U) as an edge list")
    _common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--weighted", action="store_true", help="export H(n,W) weights")

    for name, kind in (("clique-mc", "clique_scaling"), ("biclique-mc", "biclique_scaling")):
        p = sub.add_parser(name, help=f"Monte Carlo {kind.replace('_', ' ')}")
        _common(p)
        _mc(p)
        p.set_defaults(kind=kind, format="csv")

    p = sub.add_parser("concentration", help="distribution of the clique number at one n")
    _common(p)
    _mc(p)
    p.set_defaults(kind="concentration", format="csv")

    p = sub.add_parser("oscillation", help="distance-threshold clique numbers at two scale lists")
    _common(p)
    _mc(p, n_default=[])
    p.add_argument("--small", type=_int_list, required=True, help="small-scale sizes")
    p.add_argument("--large", type=_int_list, required=True, help="large-scale sizes")
    p.add_argument("--small-below", type=int, required=True, help="omega must be below this at small scales")
    p.add_argument("--large-above", type=int, required=True, help="omega must exceed this at large scales")
    p.set_defaults(kind="oscillation", format="csv")

    p = sub.add_parser("densities", help="expected counts, moments and the bounded clique limit")
    _common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--ell", type=int, default=None, help="biclique side (bigraphon models)")

    p = sub.add_parser("verify", help="run the oracle and property suite")
    _common(p, model=False)
    p.add_argument("--model", help="optional model to validate and include")
    p.add_argument("--n", type=_int_list, default=[16, 64])
    return parser


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _step(model, grid: int) -> StepGraphon:
    if isinstance(model, StepGraphon):
        return model
    if isinstance(model, FunctionGraphon):
        return discretize(model, grid)
    raise GraphonError("this command needs a graphon model")


def _vec(a):
    return None if a is None else [float(x) for x in a]


def _kv(doc: dict) -> str:
    lines = []
    for k, v in doc.items():
        lines.append(f"{k},{v if not isinstance(v, list) else ' '.join(map(str, v))}")
    return "\n".join(lines) + "\n"


def _render(doc: dict, fmt: str) -> str:
    return to_json(doc) if fmt == "json" else _kv(doc)


def cmd_kappa(args) -> int:
    W = _step(load_model(args.model), args.grid)
    res = op.kappa(W)
    doc = {"kappa": res.value, "minimizer": _vec(res.minimizer),
           "optimal_mass": _vec(res.optimal_mass), "approximate": res.approximate}
    _emit(_render(doc, args.format), args.out)
    return EXIT_OK


def cmd_xi(args) -> int:
    W = _step(load_model(args.model), args.grid)
    val, t = op.xi_subset(W)
    doc = {"xi": val, "inverse_xi": 1.0 / val if val > 0 else math.inf, "subset": _vec(t),
           "kappa": op.kappa(W).value}
    _emit(_render(doc, args.format), args.out)
    return EXIT_OK


def cmd_zoom(args) -> int:
    W = _step(load_model(args.model), args.grid)
    try:
        t = op.zoom(W, args.eps)
    except op.ZoomError as exc:
        sys.stderr.write(f"zoom: {exc}\n")
        return EXIT_BUDGET
    U = restrict(W, t)
    doc = {"subset": _vec(t.t), "inverse_xi": 1.0 / op.xi(U), "kappa": op.kappa(W).value,
           "eps": args.eps}
    _emit(_render(doc, args.format), args.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    model = load_model(args.model)
    if isinstance(model, StepBigraphon):
        B = sample_bipartite(model, args.n, args.seed)
        lines = [f"n={B.nL} seed={B.seed}"] + [f"{i} {j}" for i, j in np.argwhere(B.biadjacency)]
        _emit("\n".join(lines) + "\n", args.out)
        return EXIT_OK
    G = sample_weighted(model, args.n, args.seed) if args.weighted else sample_graph(model, args.n, args.seed)
    _emit(format_edgelist(G), args.out)
    return EXIT_OK


def cmd_mc(args) -> int:
    model = load_model(args.model)
    params = {}
    n_grid = args.n
    if args.kind == "oscillation":
        params = {"small_n": args.small, "large_n": args.large,
                  "small_below": args.small_below, "large_above": args.large_above}
        n_grid = sorted(set(args.small) | set(args.large))
    spec = ExperimentSpec(model, args.kind, tuple(n_grid), args.trials, args.seed, args.budget,
                          args.out, args.workers, params)
    result = run_experiment(spec)
    if args.format == "csv":
        _emit(records_csv(result.records, args.timings), args.out)
        sys.stderr.write(to_json(result.summary))
    else:
        _emit(result_json(result, args.timings), args.out)
    return EXIT_OK


def cmd_densities(args) -> int:
    model = load_model(args.model)
    if isinstance(model, StepBigraphon):
        ell = args.ell if args.ell is not None else dn.first_moment_predictor("biclique", model, args.n)
        doc = dn.second_moment_report(model, args.n, ell).to_dict()
        doc["predictor"] = dn.first_moment_predictor("biclique", model, args.n)
    else:
        W = _step(model, 32)
        pred = dn.first_moment_predictor("clique", W, args.n)
        doc = {
            "n": args.n,
            "bounded_clique_limit": dn.bounded_clique_limit(W),
            "predictor": pred,
            "expected_clique_counts": [{"k": k, "value": dn.expected_clique_count(W, args.n, k)}
                                       for k in range(1, min(args.n, pred + 2) + 1)],
        }
    if args.format == "csv" and "table" in doc:
        rows = ["p,q,value"] + [f"{r['p']},{r['q']},{r['value']:.17g}" for r in doc["table"]]
        _emit("\n".join(rows) + "\n", args.out)
    else:
        _emit(to_json(doc), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    model = load_model(args.model) if args.model else None
    checks = run_verify(args.seed, tuple(args.n), model)
    text = "\n".join(c.line() for c in checks) + "\n"
    _emit(text, args.out)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VERIFY


COMMANDS = {
    "kappa": cmd_kappa, "xi": cmd_xi, "zoom": cmd_zoom, "sample": cmd_sample,
    "clique-mc": cmd_mc, "biclique-mc": cmd_mc, "concentration": cmd_mc, "oscillation": cmd_mc,
    "densities": cmd_densities, "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except BudgetExceeded as exc:
        sys.stderr.write(f"budget exhausted: {exc}\n")
        return EXIT_BUDGET
    except (GraphonError, ValueError, TypeError, KeyError, OSError) as exc:
        sys.stderr.write(f"invalid input: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
