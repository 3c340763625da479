"""Command-line front end.

Exit codes: 0 success, 1 negative but valid result, 2 usage or domain
error, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from .arith import ArithmeticDomainError, MagnitudeError
from .census import (
    DEFAULT_CAP,
    BudgetError,
    census_exact_grid,
    construction_setup,
    epsilon,
    fit_exponent,
    run_census,
)
from .construct import LiftError, NoSolutionError, default_T, gen_case1, gen_case2, is_special
from .frey import (
    HypothesisError,
    UnsatisfiableClassError,
    check_corollary_hypotheses,
    corollary_exponent,
    get_curve,
    revalidate_witness,
    screen_twists,
    witnesses_csv,
)
from .qform import class_group, discriminant_of

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3
CLASSGROUP_CAP = 10**12


class UsageError(Exception):
    pass


def _frac(x) -> str:
    return "%d/%d" % (x.numerator, x.denominator)


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _grid(args) -> list[int]:
    if args.grid:
        try:
            grid = [int(float(x)) for x in args.grid.split(",") if x.strip()]
        except ValueError:
            raise UsageError("--grid must be comma-separated integers")
    elif args.X is not None:
        grid = [args.X]
    else:
        raise UsageError("give --X or --grid")
    if not grid or min(grid) < 1:
        raise UsageError("grid values must be positive")
    return sorted(set(grid))


def _need(args, *names):
    missing = ["--" + n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError("missing %s" % ", ".join(missing))


def _csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


# -- subcommands --------------------------------------------------------------------


def cmd_classgroup(args) -> int:
    _need(args, "D")
    if args.D > args.cap:
        raise BudgetError("D exceeds cap")
    disc = discriminant_of(args.D)
    cg = class_group(disc.value)
    forms = [list(f) for f in cg.reduced_forms]
    if args.format == "json":
        text = json.dumps({"D": args.D, "disc": disc.value, "h": cg.h, "exponent": cg.exponent,
                           "reduced_forms": forms}, indent=2) + "\n"
    else:
        rows = [{"D": args.D, "disc": disc.value, "h": cg.h, "exponent": cg.exponent,
                 "reduced_forms": " ".join("(%d %d %d)" % tuple(f) for f in forms)}]
        text = _csv(rows, ["D", "disc", "h", "exponent", "reduced_forms"])
    _emit(text, args.out)
    return EXIT_OK


def cmd_special(args) -> int:
    _need(args, "A", "B", "g")
    w = is_special(args.A, args.B, args.g)
    if w is None:
        _emit("not special: (%d, %d) for g=%d\n" % (args.A, args.B, args.g), args.out)
        return EXIT_NEGATIVE
    d = {"A": args.A, "B": args.B, "g": args.g, "m0": w.m0, "t0": w.t0, "modulus": w.modulus,
         "m": w.m, "t": w.t}
    if args.format == "json":
        text = json.dumps(d, indent=2) + "\n"
    else:
        text = _csv([d], list(d))
    _emit(text, args.out)
    return EXIT_OK


def cmd_construct(args) -> int:
    _need(args, "A", "B", "g", "X")
    if args.X > args.cap:
        raise BudgetError("X exceeds cap")
    lift, w = construction_setup(args.A, args.B, args.g, args.sign, lift=args.lift)
    rows = []
    if args.g % 4 == 2:
        T = args.T or default_T(args.X, args.g)
        for m, n, t, D in gen_case1(args.X, T, args.g, w):
            rows.append({"m": m, "n": n, "t": t, "D": D})
        cols = ["m", "n", "t", "D"]
    else:
        T = None
        for m, t, D in gen_case2(args.X, args.g, w):
            rows.append({"m": m, "t": t, "D": D})
        cols = ["m", "t", "D"]
    header = {"A": args.A, "B": args.B, "g": args.g, "X": args.X, "T": T,
              "A_prime": lift.A_prime if lift else None, "B_prime": lift.B_prime if lift else w.modulus,
              "r": lift.r if lift else None}
    if args.format == "json":
        text = json.dumps({"config": header, "rows": rows}, indent=2, sort_keys=True) + "\n"
    else:
        text = _csv(rows, cols)
    _emit(text, args.out)
    return EXIT_OK if rows else EXIT_NEGATIVE


def _config(args, grid) -> dict:
    # Shard count and output path are deliberately left out so reports are
    # byte-identical across them.
    return {"subcommand": args.cmd, "grid": grid, "A": args.A, "B": args.B, "g": args.g, "T": args.T,
            "cap": args.cap, "seed": args.seed, "sign": args.sign, "lift": args.lift}


def cmd_census(args) -> int:
    _need(args, "A", "B", "g")
    grid = _grid(args)
    report = run_census(grid, args.A, args.B, args.g, T=args.T, shards=args.shards, cap=args.cap,
                        sign=args.sign, lift=args.lift)
    if args.format == "json":
        text = report.to_json(_config(args, grid))
    else:
        text = report.to_csv()
    _emit(text, args.out)
    return EXIT_OK if all(report.chain_holds()) and not any(report.oracle_failures) else EXIT_NEGATIVE


def _read_points(path) -> list[tuple[int, int]]:
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        d = json.loads(text)
        return list(zip(d["grid"], d["exact_counts"]))
    return [(int(r["X"]), int(r["exact_count"])) for r in csv.DictReader(io.StringIO(text))]


def cmd_fit(args) -> int:
    if args.input:
        points = _read_points(args.input)
        g = args.g
    else:
        _need(args, "A", "B", "g")
        grid = _grid(args)
        exact, _, _ = census_exact_grid(grid, args.A, args.B, args.g, shards=args.shards, cap=args.cap)
        points = list(zip(grid, exact))
        g = args.g
    slope = fit_exponent(points)
    d = {"points": len(points), "fitted_exponent": "%.6f" % slope}
    if g:
        d["g"] = g
        d["half_plus_epsilon"] = _frac(epsilon(g) + Fraction(1, 2))
    if args.format == "json":
        text = json.dumps(d, indent=2, sort_keys=True) + "\n"
    else:
        text = _csv([d], list(d))
    _emit(text, args.out)
    return EXIT_OK


def cmd_screen(args) -> int:
    _need(args, "curve", "X", "case")
    if args.X > args.cap:
        raise BudgetError("X exceeds cap")
    curve = get_curve(args.curve)
    hyp = check_corollary_hypotheses(curve, args.case, args.d)
    head = [
        "# curve %s p=%d case=%d%s" % (curve.label, curve.p, args.case, "" if args.d is None else " d=%d" % args.d),
        "# corollary exponent %s" % _frac(corollary_exponent(curve.p)),
        "# hypotheses %s" % ("ok" if hyp.ok else "FAILED: " + "; ".join(hyp.failures)),
    ]
    try:
        cls, ws = screen_twists(curve, args.X, args.case, args.d, args.convention, shards=args.shards,
                                check_hypotheses=False, seed=args.seed)
    except UnsatisfiableClassError as e:
        _emit("\n".join(head + ["# unsatisfiable: %s (prime %s)" % (e, e.prime)]) + "\n", args.out)
        return EXIT_NEGATIVE
    bad = [w.D for w in ws if revalidate_witness(curve, cls, w)]
    head += [
        "# class D = %d mod %d (convention %s)" % (cls.A, cls.B, cls.sign_convention),
        "# witnesses %d up to X=%d, revalidation failures %d" % (len(ws), args.X, len(bad)),
    ]
    if args.format == "json":
        text = json.dumps({
            "curve": curve.label, "p": curve.p, "case": args.case, "d": args.d,
            "corollary_exponent": _frac(corollary_exponent(curve.p)),
            "hypotheses_ok": hyp.ok, "hypothesis_failures": hyp.failures,
            "class": {"A": cls.A, "B": cls.B, "convention": cls.sign_convention},
            "X": args.X, "seed": args.seed, "count": len(ws),
            "witnesses": [{"D": w.D, "h": w.h, "certificate": list(w.certificate)} for w in ws],
        }, indent=2, sort_keys=True) + "\n"
    else:
        text = "\n".join(head) + "\n" + witnesses_csv(ws)
    _emit(text, args.out)
    return EXIT_OK if ws and hyp.ok and not bad else EXIT_NEGATIVE


COMMANDS = {
    "classgroup": cmd_classgroup,
    "special": cmd_special,
    "construct": cmd_construct,
    "census": cmd_census,
    "fit": cmd_fit,
    "screen": cmd_screen,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="classdiv", description="Class groups with elements of order g.")
    sub = parser.add_subparsers(dest="cmd", required=True)

    def common(p, cap=DEFAULT_CAP):
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--cap", type=int, default=cap)
        p.add_argument("--shards", type=int, default=1)

    def cls(p):
        p.add_argument("--A", type=int)
        p.add_argument("--B", type=int)
        p.add_argument("--g", type=int)

    p = sub.add_parser("classgroup", help="class number, exponent and reduced forms of Cl(-D)")
    p.add_argument("--D", type=int)
    common(p, CLASSGROUP_CAP)

    p = sub.add_parser("special", help="decide whether (A, B) is special for g")
    cls(p)
    common(p)

    for name, help_ in (("construct", "emit constructed discriminants"), ("census", "exact and construction counts")):
        p = sub.add_parser(name, help=help_)
        cls(p)
        p.add_argument("--X", type=int)
        p.add_argument("--grid")
        p.add_argument("--T", type=int)
        p.add_argument("--sign", type=int, choices=(1, -1), default=1)
        p.add_argument("--lift", action=argparse.BooleanOptionalAction, default=True)
        common(p)

    p = sub.add_parser("fit", help="fit the growth exponent of exact counts")
    cls(p)
    p.add_argument("--X", type=int)
    p.add_argument("--grid")
    p.add_argument("--input", help="census CSV or JSON to fit instead of recomputing")
    common(p)

    p = sub.add_parser("screen", help="screen quadratic twists of a stored curve")
    p.add_argument("--curve")
    p.add_argument("--X", type=int)
    p.add_argument("--case", type=int, choices=(1, 2, 3))
    p.add_argument("--d", type=int)
    p.add_argument("--convention", choices=("negative", "positive"), default="negative")
    common(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    if getattr(args, "shards", 1) < 1 or getattr(args, "cap", 1) < 1:
        print("error: --shards and --cap must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.cmd](args)
    except BudgetError as e:
        print("budget: %s" % e, file=sys.stderr)
        return EXIT_BUDGET
    except (UsageError, ArithmeticDomainError, MagnitudeError, HypothesisError) as e:
        print("error: %s" % e, file=sys.stderr)
        return EXIT_USAGE
    except (LiftError, NoSolutionError) as e:
        print("no construction: %s" % e, file=sys.stderr)
        return EXIT_NEGATIVE


if __name__ == "__main__":
    sys.exit(main())
