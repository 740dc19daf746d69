"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 budget exceeded, 4 internal
consistency failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import linsub, projspace
from .errors import BudgetError, ConsistencyError, InputError
from .stats import (
    DEFAULT_SEED,
    conjecture_probe,
    convergence_report,
    limit_json,
    limit_vector,
    plot_data,
    report_csv,
)
from .tangency import curve_has_simple_tangency, variety_has_simple_tangency
from .variety import degree_sanity, load_spec, slice_irreducibility_counts


def _diag(msg: str):
    print(f"ffslice: {msg}", file=sys.stderr)


def _int_list(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("levels must be positive integers")
    return values


def _seed(text: str) -> int:
    return int(text, 0)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="-", help="output path (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    common.add_argument("--max-points", type=int, default=projspace.POINT_BUDGET,
                        help="cap on enumerated candidate points of P^n")
    common.add_argument("--max-subspaces", type=int, default=linsub.SUBSPACE_BUDGET,
                        help="cap on enumerated subspaces")

    parser = argparse.ArgumentParser(prog="ffslice", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("formula", parents=[common], help="closed-form limit probabilities")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--e", type=int, default=1)

    p = sub.add_parser("exact", parents=[common], help="exact distribution at one level")
    p.add_argument("--spec", required=True)
    p.add_argument("--N", type=int, default=1)

    p = sub.add_parser("mc", parents=[common], help="Monte Carlo distribution at one level")
    p.add_argument("--spec", required=True)
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--samples", type=int, required=True)

    p = sub.add_parser("converge", parents=[common], help="distributions over several levels")
    p.add_argument("--spec", required=True)
    p.add_argument("--N-list", dest="levels", type=_int_list, required=True)
    p.add_argument("--mc-above", type=int, default=None, help="use Monte Carlo for levels above this N")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--plot", default=None, help="two-column (q^N, deviation) file; default <out>.plot.tsv")
    p.add_argument("--tangency", action="store_true", help="include a simple_tangency section")

    p = sub.add_parser("tangency", parents=[common], help="search for a simple-tangency witness")
    p.add_argument("--spec", required=True)
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--levels", type=int, default=1)

    p = sub.add_parser("mu", parents=[common], help="density of planes with irreducible sections")
    p.add_argument("--spec", required=True)
    p.add_argument("--N", type=int, default=1)

    p = sub.add_parser("probe-conjecture", parents=[common], help="irreducible conics against a plane curve")
    p.add_argument("--spec", required=True)
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--e", type=int, default=2)

    p = sub.add_parser("sanity", parents=[common], help="compare intersection counts with the declared degree")
    p.add_argument("--spec", required=True)
    p.add_argument("--N", type=int, default=1)
    return parser


def _tangency(spec, trials: int, levels: int, seed: int):
    if spec.m == 1:
        if spec.n != 2 or len(spec.forms) != 1:
            raise InputError("simple tangency search for curves needs a plane curve given by one form")
        (f,) = spec.polys(1)
        return curve_has_simple_tangency(f, spec.d, levels)
    return variety_has_simple_tangency(spec, trials, levels, seed)


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _rational(x: Fraction) -> dict:
    return {"num": str(x.numerator), "den": str(x.denominator), "approx": float(x)}


def run_command(args) -> tuple[dict, str | None, str | None]:
    """Returns (json payload, csv text, plot text)."""
    if args.command == "formula":
        if args.d < 1 or args.e < 1:
            raise InputError("--d and --e must be >= 1")
        values = limit_vector(args.d, args.e)
        total = sum(values, Fraction(0))
        mean = sum((k * v for k, v in enumerate(values)), Fraction(0))
        payload = {"d": args.d, "e": args.e, "limit": limit_json(args.d, args.e),
                   "sum": _rational(total), "mean": _rational(mean)}
        text = _rows_csv(["k", "num", "den", "approx"],
                         [[k, v.numerator, v.denominator, repr(float(v))] for k, v in enumerate(values)])
        return payload, text, None

    spec = load_spec(args.spec)

    if args.command in ("exact", "mc", "converge"):
        if args.command == "converge":
            levels = args.levels
            modes = None
            samples = args.samples
            mc_above = args.mc_above
        else:
            levels = [args.N]
            modes = {args.N: args.command}
            samples = getattr(args, "samples", 1)
            mc_above = None
        report = convergence_report(spec, levels, mc_above=mc_above, samples=samples,
                                    seed=args.seed, threads=args.threads, modes=modes)
        if args.command == "converge" and args.tangency:
            report["simple_tangency"] = _tangency(spec, 5, 1, args.seed).to_json()
        plot = plot_data(report) if args.command == "converge" else None
        return report, report_csv(report), plot

    if args.command == "tangency":
        rep = _tangency(spec, args.trials, args.levels, args.seed).to_json()
        payload = {"variety": spec.to_dict(), "simple_tangency": rep}
        text = _rows_csv(["key", "value"], [[k, json.dumps(v)] for k, v in rep.items()])
        return payload, text, None

    if args.command == "mu":
        good, total = slice_irreducibility_counts(spec, args.N)
        mu = Fraction(good, total)
        payload = {"variety": spec.to_dict(), "N": args.N, "q_N": spec.q ** args.N,
                   "irreducible_slices": str(good), "planes": str(total), "mu": _rational(mu),
                   "deficit": _rational(1 - mu)}
        text = _rows_csv(["N", "q_N", "irreducible", "planes", "mu_num", "mu_den", "mu_approx"],
                         [[args.N, spec.q ** args.N, good, total, mu.numerator, mu.denominator, repr(float(mu))]])
        return payload, text, None

    if args.command == "probe-conjecture":
        rep = conjecture_probe(spec, args.N, args.samples, seed=args.seed, e=args.e, threads=args.threads)
        rows = [[k, rep["counts"][k], repr(rep["frequency"][k]), repr(rep["stderr"][k]),
                 rep["prediction"][k]["num"], rep["prediction"][k]["den"]] for k in rep["counts"]]
        return rep, _rows_csv(["k", "count", "frequency", "stderr", "pred_num", "pred_den"], rows), None

    if args.command == "sanity":
        rep = degree_sanity(spec, args.N, threads=args.threads)
        return {"variety": spec.to_dict(), "degree_sanity": rep}, _rows_csv(
            ["key", "value"], [[k, json.dumps(v)] for k, v in rep.items()]), None

    raise InputError(f"unknown command {args.command!r}")


def _write(path: str, text: str):
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        Path(path).write_text(text, encoding="utf-8")


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    if args.threads < 1 or args.max_points < 1 or args.max_subspaces < 1:
        _diag("--threads and budgets must be positive")
        return 2
    projspace.POINT_BUDGET = args.max_points
    linsub.SUBSPACE_BUDGET = args.max_subspaces
    try:
        payload, text, plot = run_command(args)
    except (InputError, ZeroDivisionError) as exc:
        _diag(f"input error: {exc}")
        return 2
    except BudgetError as exc:
        _diag(f"budget exceeded: {exc}")
        return 3
    except ConsistencyError as exc:
        _diag(f"internal consistency error: {exc}")
        return 4
    if args.format == "json":
        _write(args.out, json.dumps(payload, indent=2) + "\n")
    else:
        _write(args.out, text)
    if plot is not None:
        plot_path = getattr(args, "plot", None) or (args.out + ".plot.tsv" if args.out != "-" else None)
        if plot_path:
            _write(plot_path, plot)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
