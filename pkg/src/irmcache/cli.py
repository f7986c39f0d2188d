"""Command-line front end.

Subcommands: ``mr``, ``ccp``, ``verify``, ``simulate``, ``itable``.
Exit status is 0 on success, 1 when ``verify`` finds a discrepancy above
tolerance, and 2 for usage or configuration errors.

If ``IRMCACHE_OUTPUT_DIR`` is set and ``--out`` is not given, the report is
written to ``$IRMCACHE_OUTPUT_DIR/<command>.<format>`` instead of stdout.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from dataclasses import asdict
from pathlib import Path

from irmcache.ccp import ccp_curve, expected_partial_time
from irmcache.lru import (
    IdentityError,
    king_miss_rate,
    king_miss_rate_bruteforce,
    miss_rate_curve,
    verify_identity,
)
from irmcache.popularity import from_spec
from irmcache.montecarlo import simulate_ccp, simulate_lru
from irmcache.quadrature import QuadratureError, i_integral
from irmcache.subsets import TUPLE_CAP, i_table_build

OUTPUT_DIR_ENV = "IRMCACHE_OUTPUT_DIR"
QUADRATURE_SPOT_CHECKS = 64


class UsageError(Exception):
    pass


def parse_j_range(text: str, m: int) -> list[int]:
    """Parse ``"3"`` or ``"1..3"`` (inclusive) into a list within ``[0, m]``."""
    try:
        if ".." in text:
            lo, hi = (int(x) for x in text.split("..", 1))
        else:
            lo = hi = int(text)
    except ValueError:
        raise UsageError(f"bad j value {text!r}; expected N or A..B") from None
    if not 0 <= lo <= hi <= m:
        raise UsageError(f"j range {text!r} must lie within [0, {m}]")
    return list(range(lo, hi + 1))


def _positive(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irmcache",
        description="Exact LRU miss rates and coupon-collector times under IRM.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--dist", required=True,
                       help="distribution spec: inline JSON or path to a JSON file")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", help="write the report here instead of stdout")
        return p

    p = common(sub.add_parser("mr", help="miss-rate curve by King and Flajolet"))
    p.add_argument("--j", help="capacity N or range A..B (default 1..m)")
    p.add_argument("--rational", action="store_true", help="exact rational arithmetic")

    p = common(sub.add_parser("ccp", help="partial coupon-collection times"))
    p.add_argument("--j", help="collection size N or range A..B (default 0..m)")
    p.add_argument("--rational", action="store_true", help="exact rational arithmetic")

    p = common(sub.add_parser("verify", help="cross-check all exact routes"))
    p.add_argument("--jmax", type=int, help="largest capacity to check (default m-1)")
    p.add_argument("--tol", type=_positive, default=1e-10)
    p.add_argument("--rational", action="store_true", help="exact rational arithmetic")

    p = common(sub.add_parser("simulate", help="Monte Carlo estimate beside the exact value"))
    p.add_argument("--kind", choices=("lru", "ccp"), default="lru")
    p.add_argument("--j", type=int, required=True, help="cache capacity or collection size")
    p.add_argument("--accesses", type=int, default=10**6)
    p.add_argument("--trials", type=int, default=10**5)
    p.add_argument("--seed", type=int, default=0)

    p = common(sub.add_parser("itable", help="dump one layer of the I_J table"))
    p.add_argument("--layer", type=int, required=True)
    return parser


def _cmd_mr(args, pop):
    js = parse_j_range(args.j, pop.m) if args.j else list(range(1, pop.m + 1))
    curve = miss_rate_curve(pop, js, exact=args.rational)
    return 0, curve.to_csv() if args.format == "csv" else curve.to_json()


def _cmd_ccp(args, pop):
    js = parse_j_range(args.j, pop.m) if args.j else list(range(pop.m + 1))
    curve = ccp_curve(pop, js, exact=args.rational)
    return 0, curve.to_csv() if args.format == "csv" else curve.to_json()


def _cmd_verify(args, pop):
    m = pop.m
    if m < 2:
        raise UsageError("verify needs at least two items")
    jmax = m - 1 if args.jmax is None else args.jmax
    if not 1 <= jmax <= m - 1:
        raise UsageError(f"--jmax must be in [1, {m - 1}]")
    tol = args.tol
    failures = []

    try:
        curve = verify_identity(pop, jmax, tol, exact=args.rational)
    except IdentityError as exc:
        curve = exc.curve
        failures.append(str(exc))

    table = i_table_build(pop, jmax)
    brute = []
    for j in range(1, min(jmax, 6) + 1):
        if math.perm(m, j) > TUPLE_CAP:
            break
        king = king_miss_rate(pop, j, table)
        value = king_miss_rate_bruteforce(pop, j)
        diff = abs(value - king)
        ok = diff <= tol * max(1.0, abs(king))
        brute.append({"j": j, "bruteforce": value, "king": king, "diff": diff, "ok": ok})
        if not ok:
            failures.append(f"brute-force King at j={j} differs by {diff:.3g}")

    quad = []
    quad_tol = min(max(tol, 1e-12), 1e-3)
    for k in range(1, min(jmax, 5) + 1):
        layer = table.layer(k)
        for mask, value in zip(layer.masks.tolist(), layer.values.tolist()):
            if len(quad) >= QUADRATURE_SPOT_CHECKS:
                break
            try:
                res = i_integral(pop, mask, quad_tol)
            except QuadratureError as exc:
                failures.append(f"quadrature for mask {mask:#b}: {exc}")
                continue
            diff = abs(res.value - value)
            ok = diff <= max(tol, 10 * res.error_estimate)
            quad.append({"mask": mask, "dp": value, "quadrature": res.value,
                         "error_estimate": res.error_estimate, "diff": diff, "ok": ok})
            if not ok:
                failures.append(f"quadrature I_J for mask {mask:#b} differs by {diff:.3g}")

    passed = not failures
    if args.format == "json":
        report = json.dumps({
            "passed": passed,
            "tolerance": tol,
            "max_discrepancy": curve.max_discrepancy,
            "identity": [asdict(e) for e in curve.entries],
            "bruteforce": brute,
            "quadrature": quad,
            "failures": failures,
        }, indent=2)
    else:
        report = curve.to_csv()
    for line in failures:
        print(f"FAIL: {line}", file=sys.stderr)
    print(
        f"verify: {'passed' if passed else 'FAILED'} (identity max discrepancy "
        f"{curve.max_discrepancy:.3g}, {len(brute)} brute-force, {len(quad)} quadrature checks)",
        file=sys.stderr,
    )
    return (0 if passed else 1), report


def _cmd_simulate(args, pop):
    if args.kind == "lru":
        est = simulate_lru(pop, args.j, args.accesses, seed=args.seed)
        exact = 0.0 if args.j == pop.m else king_miss_rate(pop, args.j)
    else:
        est = simulate_ccp(pop, args.j, args.trials, seed=args.seed)
        exact = expected_partial_time(pop, args.j)
    z = (est.mean - exact) / est.std_error if est.std_error > 0 else 0.0
    record = {"kind": args.kind, "j": args.j, **asdict(est), "exact": exact, "z_score": z}
    if args.format == "json":
        return 0, json.dumps(record, indent=2)
    buf = io.StringIO()
    buf.write(",".join(record) + "\n")
    buf.write(",".join(repr(v) if isinstance(v, float) else str(v) for v in record.values()) + "\n")
    return 0, buf.getvalue()


def _cmd_itable(args, pop):
    if not 0 <= args.layer <= pop.m - 1:
        raise UsageError(f"--layer must be in [0, {pop.m - 1}]")
    table = i_table_build(pop, args.layer)
    if args.format == "json":
        layer = table.layer(args.layer)
        rows = [{"mask": mk, "size": args.layer, "q_J": 1.0 - r, "I_J": v}
                for mk, v, r in zip(layer.masks.tolist(), layer.values.tolist(), layer.rest.tolist())]
        return 0, json.dumps(rows, indent=2)
    buf = io.StringIO()
    table.write_csv(args.layer, buf)
    return 0, buf.getvalue()


COMMANDS = {
    "mr": _cmd_mr,
    "ccp": _cmd_ccp,
    "verify": _cmd_verify,
    "simulate": _cmd_simulate,
    "itable": _cmd_itable,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        pop = from_spec(args.dist)
        status, report = COMMANDS[args.command](args, pop)
    except (UsageError, ValueError, TypeError, OSError) as exc:
        print(f"irmcache {args.command}: error: {exc}", file=sys.stderr)
        return 2
    if not report.endswith("\n"):
        report += "\n"
    out = args.out
    if out is None and os.environ.get(OUTPUT_DIR_ENV):
        out = Path(os.environ[OUTPUT_DIR_ENV]) / f"{args.command}.{args.format}"
    if out is None:
        sys.stdout.write(report)
    else:
        Path(out).write_text(report)
    return status


if __name__ == "__main__":
    sys.exit(main())
