"""Command-line front end.

Subcommands compute intervals and bounds, exact or expanded expected
lengths, coverage reports, sample sizes, cost-of-exactness comparisons,
nominal-level calibration, and figure-reproduction CSV tables.  Results go
to standard output (or the CSV file), diagnostics to standard error.
Exit codes: 0 success, 2 usage error, 1 computation error.
"""
from __future__ import annotations

import argparse
import csv
import os
import sys

from . import exact_eval, expansions, sample_size
from .errors import BinomciError
from .methods import (
    ApproxFamily,
    ConfidenceLevel,
    MethodSpec,
    Observation,
    Side,
    interval,
)
from .sample_size import FormulaMode, SampleSizeQuery
from .special import BetaParams


class UsageError(Exception):
    """Invalid flag combination detected after parsing."""


def _fmt(v: float) -> str:
    return f"{v:.10g}"


def _parse_method(text: str, side: Side) -> MethodSpec:
    name = text.strip().lower()
    if name == "cp":
        return MethodSpec.clopper_pearson(side)
    if name == "wald":
        return MethodSpec.wald(side)
    if name == "wilson":
        return MethodSpec.wilson() if side is Side.TWO_SIDED else _unsupported(name)
    if name == "ac":
        return MethodSpec.agresti_coull() if side is Side.TWO_SIDED else _unsupported(name)
    if name == "jeffreys":
        return MethodSpec.jeffreys(side)
    if name.startswith("beta:"):
        try:
            a_txt, b_txt = name[5:].split(",")
            prior = BetaParams(float(a_txt), float(b_txt))
        except (ValueError, IndexError) as exc:
            raise UsageError(f"--method beta:a,b needs two numbers, got {text!r}") from exc
        return MethodSpec.beta_prior(prior, side)
    raise UsageError(
        f"unknown --method {text!r}; expected cp|wald|wilson|ac|beta:a,b|jeffreys"
    )


def _unsupported(name: str) -> MethodSpec:
    raise UsageError(f"--method {name} defines no one-sided bound; drop --side")


def _parse_side(text: str) -> Side:
    try:
        return Side(text)
    except ValueError:
        raise UsageError(f"--side must be two-sided|upper|lower, got {text!r}")


def _workers_from_env() -> int:
    raw = os.environ.get("BINOMCI_THREADS", "")
    if not raw:
        return 1
    try:
        w = int(raw)
    except ValueError:
        raise UsageError(f"BINOMCI_THREADS must be an integer, got {raw!r}")
    if w < 0:
        raise UsageError(f"BINOMCI_THREADS must be >= 0, got {w}")
    return w


def _add_common(p: argparse.ArgumentParser, *names: str) -> None:
    if "alpha" in names:
        p.add_argument("--alpha", type=float, required=True, help="nominal error rate in (0,1)")
    if "side" in names:
        p.add_argument(
            "--side",
            default="two-sided",
            choices=["two-sided", "upper", "lower"],
            help="interval sidedness (default two-sided)",
        )
    if "grid" in names:
        p.add_argument("--lo", type=float, default=0.01, help="grid lower end (default 0.01)")
        p.add_argument("--hi", type=float, default=0.99, help="grid upper end (default 0.99)")
        p.add_argument(
            "--points", type=int, default=20001, help="grid points (default 20001)"
        )


def _build_parser() -> argparse.ArgumentParser:
    root = argparse.ArgumentParser(
        prog="binomci",
        description="Exact and approximate binomial confidence methods",
    )
    sub = root.add_subparsers(dest="command", required=True)

    p = sub.add_parser("interval", help="compute a confidence interval or bound")
    p.add_argument("--method", required=True)
    p.add_argument("--x", type=int, required=True, help="success count")
    p.add_argument("--n", type=int, required=True, help="trial count")
    _add_common(p, "alpha", "side")

    p = sub.add_parser("expected-length", help="expected width or bound distance")
    p.add_argument("--method", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True, help="true proportion")
    _add_common(p, "alpha", "side")
    p.add_argument("--mode", default="exact", choices=["exact", "expansion"])

    p = sub.add_parser("coverage", help="coverage report over a probability grid")
    p.add_argument("--method", required=True)
    p.add_argument("--n", type=int, required=True)
    _add_common(p, "alpha", "grid")
    p.add_argument("--criterion", default="min", choices=["min", "mean"])
    p.add_argument("--dump", action="store_true", help="also dump per-point coverage CSV")

    p = sub.add_parser("sample-size", help="required n for a target expected length")
    p.add_argument("--method", default="cp", help="only cp is supported")
    p.add_argument("--d", type=float, required=True, help="target expected length/distance")
    _add_common(p, "alpha", "side")
    p.add_argument("--p0", type=float, help="point guess for p")
    p.add_argument("--prior", help="Beta prior as a,b")
    p.add_argument("--mode", default="formula", choices=["formula", "exact"])
    p.add_argument("--formula", default="derived", choices=["derived", "paper"])

    p = sub.add_parser("cost", help="extra observations required by the exact method")
    p.add_argument(
        "--vs",
        required=True,
        help="jeffreys|wilson|ac|one-sided|adjusted:gamma",
    )
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--p0", type=float, required=True)
    _add_common(p, "alpha")
    p.add_argument("--formula", default="derived", choices=["derived", "paper"])

    p = sub.add_parser("calibrate", help="nominal level hitting a coverage criterion")
    p.add_argument("--method", required=True)
    p.add_argument("--n", type=int, required=True)
    _add_common(p, "alpha", "grid")
    p.add_argument("--criterion", required=True, choices=["min", "mean"])

    p = sub.add_parser("figure", help="write a figure-reproduction CSV table")
    p.add_argument(
        "--id", required=True, choices=["1", "2", "3", "4", "5", "6", "coverage"]
    )
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--force", action="store_true", help="overwrite an existing file")
    _add_common(p, "grid")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--d", type=float, default=0.05, help="target length (figure 2)")
    p.add_argument(
        "--n-list", default="20,50,100", help="comma-separated n values (figures 1/4)"
    )
    p.add_argument(
        "--coverage-n-list",
        default="50,100,250,500,1000,2000",
        help="comma-separated n values for the coverage figure",
    )
    p.add_argument(
        "--full-grid",
        action="store_true",
        help="use the full 200000-point coverage grid instead of --points",
    )
    p.add_argument("--formula", default="paper", choices=["derived", "paper"])
    return root


def _cmd_interval(args) -> int:
    spec = _parse_method(args.method, _parse_side(args.side))
    est = interval(spec, Observation(args.x, args.n), ConfidenceLevel(args.alpha))
    print(f"lower {_fmt(est.lower)}")
    print(f"upper {_fmt(est.upper)}")
    return 0


def _cmd_expected_length(args) -> int:
    side = _parse_side(args.side)
    level = ConfidenceLevel(args.alpha)
    if args.mode == "exact":
        spec = _parse_method(args.method, side)
        value = exact_eval.expected_width_exact(spec, args.n, args.p, level)
    else:
        if args.method.strip().lower() != "cp":
            raise UsageError("--mode expansion is defined for --method cp only")
        if side is Side.TWO_SIDED:
            value = expansions.expected_length_expansion(args.n, args.p, level).value
        elif side is Side.UPPER:
            value = expansions.expected_distance_expansion(args.n, args.p, level).value
        else:
            raise UsageError("--mode expansion supports --side two-sided or upper")
    print(_fmt(value))
    return 0


def _cmd_coverage(args) -> int:
    spec = _parse_method(args.method, Side.TWO_SIDED)
    level = ConfidenceLevel(args.alpha)
    if args.criterion == "mean":
        print(f"mean_coverage {_fmt(exact_eval.mean_coverage(spec, args.n, level))}")
        return 0
    grid = exact_eval.PGrid(args.lo, args.hi, args.points)
    report = exact_eval.min_coverage(
        spec, args.n, level, grid, keep_per_point=args.dump, workers=_workers_from_env()
    )
    print(f"min_coverage {_fmt(report.min_coverage)}")
    print(f"argmin_p {_fmt(report.argmin_p)}")
    print(f"grid_min_coverage {_fmt(report.grid_min_coverage)}")
    print(f"mean_coverage {_fmt(report.mean_coverage)}")
    if args.dump:
        print("p,coverage")
        for p, cov in report.per_point:
            print(f"{_fmt(p)},{_fmt(cov)}")
    return 0


def _cmd_sample_size(args) -> int:
    if args.method.strip().lower() != "cp":
        raise UsageError("sample-size supports --method cp only")
    side = _parse_side(args.side)
    level = ConfidenceLevel(args.alpha)
    mode = FormulaMode.DERIVED_ALGEBRA if args.formula == "derived" else FormulaMode.PAPER_VERBATIM
    if (args.p0 is None) == (args.prior is None):
        raise UsageError("give exactly one of --p0 and --prior")
    prior = None
    if args.prior is not None:
        try:
            a_txt, b_txt = args.prior.split(",")
            prior = BetaParams(float(a_txt), float(b_txt))
        except (ValueError, IndexError) as exc:
            raise UsageError(f"--prior needs a,b, got {args.prior!r}") from exc
    query = SampleSizeQuery(args.d, level, side, args.p0, prior)
    if args.mode == "exact":
        if args.p0 is None:
            raise UsageError("--mode exact needs a point guess --p0")
        result = sample_size.exact_n(
            MethodSpec.clopper_pearson(side), args.d, args.p0, level
        )
        print(f"n {result.n}")
        print(f"achieved {_fmt(result.achieved)}")
        return 0
    if side is Side.TWO_SIDED:
        result = (
            sample_size.cp_n_two_sided(query)
            if prior is None
            else sample_size.cp_n_two_sided_prior(query)
        )
    else:
        result = (
            sample_size.cp_n_one_sided(query, mode)
            if prior is None
            else sample_size.cp_n_one_sided_prior(query)
        )
    print(f"n {result.n}")
    print(f"n_unrounded {_fmt(result.n_unrounded)}")
    return 0


def _cmd_cost(args) -> int:
    level = ConfidenceLevel(args.alpha)
    mode = FormulaMode.DERIVED_ALGEBRA if args.formula == "derived" else FormulaMode.PAPER_VERBATIM
    vs = args.vs.strip().lower()
    if vs == "one-sided":
        value = sample_size.n_plus_one_sided(args.d, args.p0, level, mode)
    elif vs.startswith("adjusted:"):
        try:
            gamma = float(vs.split(":", 1)[1])
        except ValueError as exc:
            raise UsageError(f"--vs adjusted:gamma needs a number, got {args.vs!r}") from exc
        value = sample_size.n_plus_adjusted(args.d, args.p0, level, gamma)
    else:
        fam = {
            "jeffreys": ApproxFamily.JEFFREYS,
            "wilson": ApproxFamily.WILSON,
            "ac": ApproxFamily.AGRESTI_COULL,
        }.get(vs)
        if fam is None:
            raise UsageError(
                f"unknown --vs {args.vs!r}; expected jeffreys|wilson|ac|one-sided|adjusted:gamma"
            )
        value = sample_size.n_plus_two_sided(fam, args.d, args.p0, level, mode)
    print(_fmt(value))
    return 0


def _cmd_calibrate(args) -> int:
    spec = _parse_method(args.method, Side.TWO_SIDED)
    level = ConfidenceLevel(args.alpha)
    if args.criterion == "min":
        criterion = exact_eval.MinCoverage(exact_eval.PGrid(args.lo, args.hi, args.points))
    else:
        criterion = exact_eval.MeanCoverage()
    calibrated = exact_eval.calibrate_alpha(
        spec, args.n, level, criterion, workers=_workers_from_env()
    )
    print(f"gamma {_fmt(calibrated.alpha)}")
    return 0


def _parse_n_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad n list {text!r}") from exc
    if not values:
        raise UsageError(f"bad n list {text!r}")
    return values


def _figure_rows(args):
    level = ConfidenceLevel(args.alpha)
    mode = FormulaMode.DERIVED_ALGEBRA if args.formula == "derived" else FormulaMode.PAPER_VERBATIM
    fid = args.id
    if fid in ("1", "4"):
        side = Side.TWO_SIDED if fid == "1" else Side.UPPER
        spec = MethodSpec.clopper_pearson(side)
        header = ["n", "p", "exact", "expansion"]
        rows = []
        for n in _parse_n_list(args.n_list):
            for p in exact_eval.PGrid(0.002, 0.998, 499).values():
                p = float(p)
                exact = exact_eval.expected_width_exact(spec, n, p, level)
                if fid == "1":
                    approx = expansions.expected_length_expansion(n, p, level).value
                else:
                    approx = expansions.expected_distance_expansion(n, p, level).value
                rows.append([n, p, exact, approx])
        return header, rows
    if fid == "2":
        header = ["alpha", "p0", "n"]
        rows = []
        for alpha in (0.01, 0.05, 0.1):
            lvl = ConfidenceLevel(alpha)
            for p0 in exact_eval.PGrid(0.002, 0.998, 499).values():
                q = SampleSizeQuery(args.d, lvl, Side.TWO_SIDED, float(p0))
                rows.append([alpha, float(p0), sample_size.cp_n_two_sided(q).n])
        return header, rows
    if fid == "3":
        header = ["vs", "p0", "d", "n_plus"]
        rows = []
        for fam in (ApproxFamily.JEFFREYS, ApproxFamily.WILSON, ApproxFamily.AGRESTI_COULL):
            for p0 in (0.1, 0.3, 0.5):
                for d in exact_eval.PGrid(0.01, 0.15, 141).values():
                    rows.append(
                        [
                            fam.value,
                            p0,
                            float(d),
                            sample_size.n_plus_two_sided(fam, float(d), p0, level, mode),
                        ]
                    )
        return header, rows
    if fid == "5":
        header = ["series", "d", "n"]
        rows = []
        for alpha in (0.01, 0.05, 0.1):
            lvl = ConfidenceLevel(alpha)
            for d in exact_eval.PGrid(0.005, 0.1, 96).values():
                q = SampleSizeQuery(float(d), lvl, Side.UPPER, 0.5)
                rows.append([f"p0=0.5,alpha={alpha}", float(d), sample_size.cp_n_one_sided(q).n])
        for label, prior in (
            ("jeffreys-prior", BetaParams(0.5, 0.5)),
            ("uniform-prior", BetaParams(1.0, 1.0)),
            ("beta(0.5,1)-prior", BetaParams(0.5, 1.0)),
        ):
            for d in exact_eval.PGrid(0.005, 0.1, 96).values():
                q = SampleSizeQuery(float(d), level, Side.UPPER, prior=prior)
                rows.append([label, float(d), sample_size.cp_n_one_sided_prior(q).n])
        return header, rows
    if fid == "6":
        header = ["p0", "d", "n_plus"]
        rows = []
        for p0 in (0.3, 0.4, 0.5):
            for d in exact_eval.PGrid(0.01, 0.15, 141).values():
                rows.append(
                    [p0, float(d), sample_size.n_plus_one_sided(float(d), p0, level, mode)]
                )
        return header, rows
    # coverage figure
    header = ["method", "lo", "hi", "n", "min_coverage", "argmin_p"]
    points = 200000 if args.full_grid else args.points
    workers = _workers_from_env()
    rows = []
    for name, spec in (
        ("jeffreys", MethodSpec.jeffreys()),
        ("wilson", MethodSpec.wilson()),
        ("ac", MethodSpec.agresti_coull()),
        ("cp", MethodSpec.clopper_pearson()),
    ):
        for lo, hi in ((args.lo, args.hi), (0.1, 0.9)):
            for n in _parse_n_list(args.coverage_n_list):
                report = exact_eval.min_coverage(
                    spec, n, level, exact_eval.PGrid(lo, hi, points), workers=workers
                )
                rows.append([name, lo, hi, n, report.min_coverage, report.argmin_p])
    return header, rows


def _cmd_figure(args) -> int:
    header, rows = _figure_rows(args)
    mode = "w" if args.force else "x"
    try:
        handle = open(args.out, mode, newline="")
    except FileExistsError:
        raise UsageError(f"refusing to overwrite {args.out}; pass --force")
    with handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, float) else v for v in row])
    print(f"wrote {args.out} ({len(rows)} rows)", file=sys.stderr)
    return 0


_COMMANDS = {
    "interval": _cmd_interval,
    "expected-length": _cmd_expected_length,
    "coverage": _cmd_coverage,
    "sample-size": _cmd_sample_size,
    "cost": _cmd_cost,
    "calibrate": _cmd_calibrate,
    "figure": _cmd_figure,
}


def run(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BinomciError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
