"""Command-line interface: ``regdepth {depth,median,bounds,attack,simulate}``.

Every command prints one JSON document on stdout; diagnostics go to stderr.
Exit codes: 0 ok, 2 input error, 3 budget exceeded, 4 attack construction
failure. ``REGDEPTH_BUDGET`` overrides the enumeration budgets.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .breakdown import (ADDITION, REPLACEMENT, AttackConstructionFailed, attack_addition,
                        attack_nullspace_pair, attack_replacement, bounds_from_k)
from .core import BudgetExceeded, Dataset, dataset_to_csv, read_csv
from .depth import (DEFAULT_DEPTH_BUDGET, rdepth_approx, rdepth_exact, rdepth_sweep_p2)
from .median import budget_from_env, k_star_approx, k_star_exact
from .sim import (CONTAMINATED, STD_NORMAL, SimulationSpec, replicates_csv,
                  run_table_experiment, table_csv)

EXIT_OK, EXIT_INPUT, EXIT_BUDGET, EXIT_ATTACK = 0, 2, 3, 4

log = logging.getLogger("regdepth")


class InputError(ValueError):
    pass


def _load(path) -> Dataset:
    try:
        return read_csv(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def _floats(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",")], dtype=float)
    except ValueError:
        raise InputError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _deepest(d, args, witnesses):
    """Exact search, the sampled search, or exact with a fallback (``auto``)."""
    if args.mode != "approx":
        try:
            return k_star_exact(d, witnesses=witnesses, workers=args.workers,
                                max_ops=budget_from_env())
        except BudgetExceeded:
            if args.mode == "exact":
                raise
            log.info("exact search over budget; using the sampled search")
    return k_star_approx(d, n_subsets=args.n_subsets, n_dirs=args.n_dirs, seed=args.seed,
                         witnesses=witnesses, workers=args.workers)


# --- commands ------------------------------------------------------------------------


def cmd_depth(args) -> int:
    d = _load(args.input)
    beta = _floats(args.beta)
    if beta.size != d.p:
        raise InputError(f"--beta needs {d.p} values, got {beta.size}")
    if args.method == "exact":
        w = rdepth_exact(d, beta, budget=budget_from_env(DEFAULT_DEPTH_BUDGET))
    elif args.method == "sweep":
        w = rdepth_sweep_p2(d, beta)
    else:
        w = rdepth_approx(d, beta, n_dirs=args.n_dirs, seed=args.seed)
    _emit({"method": args.method, "beta": [float(b) for b in beta], **w.to_dict()})
    return EXIT_OK


def cmd_median(args) -> int:
    d = _load(args.input)
    res = _deepest(d, args, witnesses=not args.no_witnesses)
    _emit(res.to_dict())
    return EXIT_OK


def cmd_bounds(args) -> int:
    d = _load(args.input)
    res = _deepest(d, args, witnesses=False)
    b = bounds_from_k(d.n, d.p, res.k_star, approximate=res.mode != "exact")
    _emit({"mode": res.mode, **b.to_dict()})
    return EXIT_OK


def _write(path, d):
    Path(path).write_text(dataset_to_csv(d), encoding="utf-8")


def cmd_attack(args) -> int:
    d = _load(args.input)
    if args.mode == "nullspace":
        plan, (first, second) = attack_nullspace_pair(d, args.y_mag)
        out = {"plan": plan.to_dict(),
               "datasets_identical": bool(np.array_equal(first.points(), second.points())),
               "n_contaminated": first.n}
        if args.output:
            _write(f"{args.output}_first.csv", first)
            _write(f"{args.output}_second.csv", second)
        _emit(out)
        return EXIT_OK
    attack = attack_addition if args.mode == ADDITION else attack_replacement
    plan, c = attack(d, args.y_mag, args.seed, max_tries=args.max_tries)
    if args.output:
        _write(f"{args.output}.csv", c)
    _emit({"plan": plan.to_dict(), "n_contaminated": c.n})
    return EXIT_OK


def cmd_simulate(args) -> int:
    which = f"table{args.table}"
    generator = CONTAMINATED if args.table == 2 else STD_NORMAL
    summaries = []
    for p in args.p:
        for n in args.n:
            spec = SimulationSpec(p, n, args.reps, generator, args.mode, args.seed,
                                  n_subsets=args.n_subsets, n_dirs=args.n_dirs,
                                  time_budget=args.time_budget)
            summaries.append(run_table_experiment(spec, which, args.workers))
    if args.csv:
        Path(args.csv).write_text(table_csv(summaries), encoding="utf-8")
    if args.replicates_csv:
        Path(args.replicates_csv).write_text(replicates_csv(summaries), encoding="utf-8")
    _emit([s.to_dict() for s in summaries])
    return EXIT_OK if all(s.complete for s in summaries) else EXIT_BUDGET


# --- parser --------------------------------------------------------------------------


def _add_search(sp):
    sp.add_argument("--mode", choices=("exact", "approx", "auto"), default="exact")
    sp.add_argument("--n-subsets", type=int, default=2000)
    sp.add_argument("--n-dirs", type=int, default=200)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="regdepth", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true", help="log to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("depth", help="regression depth of one fit")
    sp.add_argument("--input", required=True, help="CSV with columns x1..x(p-1),y")
    sp.add_argument("--beta", required=True, help="intercept,slope1,... comma list")
    sp.add_argument("--method", choices=("exact", "sweep", "approx"), default="exact")
    sp.add_argument("--n-dirs", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_depth)

    sp = sub.add_parser("median", help="maximum depth and deepest-fit median")
    sp.add_argument("--input", required=True)
    sp.add_argument("--no-witnesses", action="store_true")
    _add_search(sp)
    sp.set_defaults(func=cmd_median)

    sp = sub.add_parser("bounds", help="breakdown-point bounds")
    sp.add_argument("--input", required=True)
    _add_search(sp)
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("attack", help="constructive contamination")
    sp.add_argument("--input", required=True)
    sp.add_argument("--mode", choices=(ADDITION, REPLACEMENT, "nullspace"), required=True)
    sp.add_argument("--y-mag", type=float, required=True,
                    help="response magnitude (the shift scale for nullspace)")
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--max-tries", type=int, default=100)
    sp.add_argument("--output", help="prefix for the contaminated CSV file(s)")
    sp.set_defaults(func=cmd_attack)

    sp = sub.add_parser("simulate", help="Monte Carlo table cells")
    sp.add_argument("--table", type=int, choices=(1, 2, 3), required=True)
    sp.add_argument("--p", type=int, nargs="+", required=True)
    sp.add_argument("--n", type=int, nargs="+", required=True)
    sp.add_argument("--reps", type=int, default=1000)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--mode", choices=("exact", "approx", "auto"), default="auto")
    sp.add_argument("--n-subsets", type=int, default=2000)
    sp.add_argument("--n-dirs", type=int, default=200)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--time-budget", type=float, help="seconds; partial results past it")
    sp.add_argument("--csv", help="write the aggregate table here")
    sp.add_argument("--replicates-csv", help="write one row per replicate here")
    sp.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="regdepth: %(message)s")
    if not args.verbose:
        warnings.simplefilter("ignore")
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"regdepth: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except AttackConstructionFailed as exc:
        print(f"regdepth: attack failed: {exc}", file=sys.stderr)
        print(json.dumps({"diagnostics": exc.diagnostics[-10:]}), file=sys.stderr)
        return EXIT_ATTACK
    except (ValueError, np.linalg.LinAlgError) as exc:
        print(f"regdepth: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
