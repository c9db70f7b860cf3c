"""Command-line front end.

Exit codes: 0 success, 1 usage, 2 input domain error, 3 budget, 4 search
exhausted, 5 verification failure. Big integers leave as decimal strings.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from .cache import ProfileCache
from .circle import DEFAULT_EVAL_CAP, DEFAULT_GRID_MULT, DEFAULT_SCAN_BUDGET, DEFAULT_TOL, circle_profile
from .construct import DEFAULT_LEVEL_BUDGET, HFunction, next_level, scan_ratios, start_tower
from .cyclo_poly import DEFAULT_DEGREE_CAP, METHODS, apply_transform, height_of, m_bound, phi_coefficients, reduce_radical
from .errors import CycloError, SearchExhausted
from .numtheory import parse_squarefree_odd
from .verify import SUITES, run_suite

EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 1, 5


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _epsilon(text: str) -> float:
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError("epsilon must lie in (0, 1)")
    return v


def _h(text: str) -> HFunction:
    try:
        return HFunction.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _seeds(text: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("seeds are comma-separated reals") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cyclo-extremal", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("coeffs", help="coefficients and height of Phi_n")
    p.add_argument("n", type=int)
    p.add_argument("--emit-coeffs", action="store_true")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--method", choices=METHODS, default=METHODS[0])
    p.add_argument("--reduce", action="store_true", help="accept any n >= 1 via its odd radical")
    p.add_argument("--degree-cap", type=_positive_int, default=DEFAULT_DEGREE_CAP)

    p = sub.add_parser("circle", help="L_n, x_M, D_n and t0 for squarefree odd n")
    p.add_argument("n", type=int)
    p.add_argument("--grid-mult", type=int, default=DEFAULT_GRID_MULT)
    p.add_argument("--seeds", type=_seeds, default=None)
    p.add_argument("--no-cache", action="store_true")
    p.add_argument("--threads", type=_positive_int, default=1)
    p.add_argument("--eval-cap", type=_positive_int, default=DEFAULT_EVAL_CAP)
    p.add_argument("--scan-budget", type=_positive_int, default=DEFAULT_SCAN_BUDGET)

    p = sub.add_parser("construct", help="build a prime tower with large L_n")
    p.add_argument("--omega", type=int, required=True)
    p.add_argument("--epsilon", type=_epsilon, required=True)
    p.add_argument("--h", type=_h, default=HFunction("constant", (Fraction(1),)))
    p.add_argument("--budget", type=_positive_int, default=DEFAULT_LEVEL_BUDGET)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--threads", type=_positive_int, default=1)
    p.add_argument("--grid-mult", type=int, default=DEFAULT_GRID_MULT)
    p.add_argument("--eval-cap", type=_positive_int, default=DEFAULT_EVAL_CAP)

    p = sub.add_parser("scan", help="A_n / M_n over all n of a given omega")
    p.add_argument("--omega", type=int, required=True)
    p.add_argument("--max-n", type=_positive_int, required=True)
    p.add_argument("--top", type=_positive_int, default=None)

    p = sub.add_parser("verify", help="run a property suite")
    p.add_argument("--suite", choices=SUITES, default="all")
    p.add_argument("--report", type=Path, default=None)
    p.add_argument("--threads", type=_positive_int, default=1)
    return parser


# ---------------------------------------------------------------- commands


def cmd_coeffs(args, out) -> int:
    if args.reduce:
        m, transform = reduce_radical(args.n)
        poly = apply_transform(phi_coefficients(m, args.method, args.degree_cap), transform, args.n)
        radical = m
    else:
        radical = parse_squarefree_odd(args.n)
        poly = phi_coefficients(radical, args.method, args.degree_cap)
    rep = height_of(poly)
    M = m_bound(radical)
    report = {
        "n": str(args.n),
        "A": str(rep.A),
        "S": str(rep.S),
        "degree": rep.degree,
        "M": str(M),
        "ratio": rep.A / M,
    }
    if args.emit_coeffs:
        report["coeffs"] = poly.to_json()
    if args.format == "json":
        out.write(_dump(report))
        return EXIT_OK
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["n", "A", "S", "degree", "M", "ratio"])
    w.writerow([report[k] for k in ("n", "A", "S", "degree", "M", "ratio")])
    if args.emit_coeffs:
        w.writerow([])
        w.writerow(["index", "coefficient"])
        w.writerows(enumerate(report["coeffs"]))
    return EXIT_OK


def cmd_circle(args, out) -> int:
    n = parse_squarefree_odd(args.n)
    # seeded runs are not keyed by their seeds, so they bypass the cache
    cache = None if args.no_cache or args.seeds else ProfileCache()
    prof = cache.get(n, args.grid_mult, DEFAULT_TOL) if cache else None
    if prof is None:
        prof = circle_profile(
            n, args.grid_mult, args.seeds, scan_budget=args.scan_budget,
            eval_cap=args.eval_cap, workers=args.threads,
        )
        if cache:
            cache.put(prof, DEFAULT_TOL)
    out.write(_dump(prof.to_json()))
    return EXIT_OK


def cmd_construct(args, out) -> int:
    if args.omega < 3:
        raise UsageError("construct: --omega must be at least 3")
    tower = None
    code = EXIT_OK
    try:
        tower = start_tower(
            args.omega, args.epsilon, args.h, grid_mult=args.grid_mult,
            eval_cap=args.eval_cap, workers=args.threads,
        )
        while len(tower.levels) < args.omega:
            next_level(tower, args.budget)
    except SearchExhausted:
        if tower is None:
            raise
        code = SearchExhausted.exit_code
    text = _dump(tower.to_json())
    if args.out is not None:
        args.out.write_text(text)
    out.write(text)
    if code == EXIT_OK and not tower.verdict:
        # every candidate within the budget fell short of some level target
        code = SearchExhausted.exit_code
    return code


def cmd_scan(args, out) -> int:
    if args.omega < 3:
        raise UsageError("scan: --omega must be at least 3")
    rows = scan_ratios(args.omega, args.max_n)
    if args.top is not None:
        rows = rows[: args.top]
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["n", "A", "M", "ratio"])
    for row in rows:
        w.writerow([row.n.value, row.A, row.M, repr(row.ratio)])
    return EXIT_OK


def cmd_verify(args, out) -> int:
    results = run_suite(args.suite, ProfileCache(), args.threads)
    width = max(len(r.name) for r in results)
    for r in results:
        out.write(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  {r.cases} cases\n")
        for c in r.counterexamples:
            out.write(f"      counterexample: {c}\n")
    if args.report is not None:
        args.report.write_text(_dump({"suite": args.suite, "checks": [r.to_json() for r in results]}))
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


COMMANDS = {
    "coeffs": cmd_coeffs,
    "circle": cmd_circle,
    "construct": cmd_construct,
    "scan": cmd_scan,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        err.write(f"{exc}\n")
        return EXIT_USAGE
    except CycloError as exc:
        err.write(_dump(exc.to_json()))
        return exc.exit_code
    except ValueError as exc:
        err.write(_dump({"error": "ValueError", "message": str(exc)}))
        return 2


def run(argv: list[str]) -> tuple[int, str, str]:
    """Run the CLI in-process and capture (exit code, stdout, stderr)."""
    out, err = io.StringIO(), io.StringIO()
    code = main(argv, out, err)
    return code, out.getvalue(), err.getvalue()


if __name__ == "__main__":
    sys.exit(main())
