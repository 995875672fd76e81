"""Command-line front end: solve, sample, verify, generate and plotdata.

Exit codes: 0 success, 1 verification found a nonzero gap, 2 bad input,
3 solver invariant violated, 4 pivot budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from typing import Optional, Sequence

from .errors import BudgetExceeded, InvariantViolation, OracleError, ValidationError
from .homotopy import SolutionCurve, run, sample
from .instances import DEFAULT_BRAESS_EPSILON, nested_braess, paper_example
from .oracle import equilibrium_at, verify_equilibrium
from .rational import INF, RationalParseError, format_decimal, format_rational, is_infinite, parse_rational
from .serialization import (
    continuity_errors,
    curve_to_csv,
    curve_to_dict,
    instance_to_dict,
    rational_pair,
    read_curve,
    read_instance,
    write_csv,
    write_json,
)

EXIT_OK = 0
EXIT_GAP = 1
EXIT_INPUT = 2
EXIT_INVARIANT = 3
EXIT_BUDGET = 4

STATS_ENV = "WARDROP_STATS"


class UsageError(Exception):
    pass


def _emit(text: str, path: Optional[str]) -> None:
    if path and path != "-":
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _stats_level() -> int:
    try:
        return int(os.environ.get(STATS_ENV, "0"))
    except ValueError:
        return 0


def _rational_arg(text: str):
    try:
        return parse_rational(text)
    except RationalParseError as exc:
        raise UsageError(str(exc)) from exc


# --------------------------------------------------------------------------
# solve


def cmd_solve(args) -> int:
    inst = read_instance(args.instance)
    lam_max = INF if args.lambda_max is None else _rational_arg(args.lambda_max)
    curve = run(inst.network, inst.costs, lam_max, constant_costs=inst.constant_costs)
    if args.format == "csv":
        _emit(curve_to_csv(curve), args.out)
    else:
        _emit(write_json(curve_to_dict(curve, inst), None), args.out)
    level = _stats_level()
    if level >= 1:
        print(json.dumps(curve.stats), file=sys.stderr)
    if level >= 2:
        for rec in curve.degeneracies:
            for step in rec.steps:
                chosen = "-" if step.chosen is None else curve.network.edge_ids[step.chosen]
                print(f"degenerate point at {format_rational(rec.lam)}: region {step.region} -> {chosen}", file=sys.stderr)
    return EXIT_OK


# --------------------------------------------------------------------------
# sample


def _sample_row(curve: SolutionCurve, lam: Fraction) -> list[str]:
    net = curve.network
    x, pi = sample(curve, lam)
    row = rational_pair(lam)
    for v in x:
        row += rational_pair(v)
    for v in pi:
        row += rational_pair(v)
    for e, (u, w) in enumerate(net.edges):
        row += rational_pair(pi[w] - pi[u])
    return row


def sample_header(curve: SolutionCurve) -> list[str]:
    net = curve.network
    header = ["lambda", "lambda_decimal"]
    for e in net.edge_ids:
        header += [f"x_{e}", f"x_{e}_decimal"]
    for v in net.labels:
        header += [f"pi_{v}", f"pi_{v}_decimal"]
    for e in net.edge_ids:
        header += [f"cost_{e}", f"cost_{e}_decimal"]
    return header


def cmd_sample(args) -> int:
    loaded = read_curve(args.curve)
    curve = loaded.curve
    rows = []
    for text in args.lambdas:
        lam = _rational_arg(text)
        if is_infinite(lam):
            raise UsageError("demand must be finite")
        try:
            rows.append(_sample_row(curve, lam))
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    _emit(write_csv(sample_header(curve), rows), args.out)
    return EXIT_OK


# --------------------------------------------------------------------------
# verify


def sample_points(curve: SolutionCurve, per_segment: int) -> list[Fraction]:
    """``per_segment`` evenly spaced demands in each affine piece, plus the end."""
    out = []
    for seg in curve.flow_segments:
        width = Fraction(1) if is_infinite(seg.lambda_hi) else seg.lambda_hi - seg.lambda_lo
        for k in range(per_segment):
            out.append(seg.lambda_lo + width * Fraction(k, per_segment))
    if curve.bounded and curve.flow_segments and not is_infinite(curve.end):
        out.append(curve.end)
    return sorted(set(out))


def cmd_verify(args) -> int:
    inst = read_instance(args.instance)
    loaded = read_curve(args.curve, inst)
    curve = loaded.curve
    if args.samples_per_segment < 1:
        raise UsageError("samples per segment must be positive")
    problems = continuity_errors(curve)
    for msg in problems:
        print(f"continuity: {msg}")
    worst = Fraction(0)
    worst_float = 0.0
    points = sample_points(curve, args.samples_per_segment)
    for lam in points:
        x, pi = sample(curve, lam)
        try:
            cert = verify_equilibrium(inst.network, inst.costs, x, pi)
        except OracleError as exc:
            print(f"lambda={format_rational(lam)}: {exc}")
            problems.append(str(exc))
            continue
        gap = cert.gap
        if cert.demand != lam:
            problems.append(f"flow at {format_rational(lam)} routes demand {format_rational(cert.demand)}")
            print(problems[-1])
        worst = max(worst, gap)
        line = f"lambda={format_rational(lam)} gap={format_rational(gap)}"
        if args.oracle:
            ref = equilibrium_at(inst.network, inst.costs, lam)
            diff = max((abs(float(a) - b) for a, b in zip(x, ref.flow_float)), default=0.0)
            worst_float = max(worst_float, diff)
            line += f" oracle_flow_diff={diff:.3e}"
        if args.verbose:
            print(line)
    print(f"samples: {len(points)}")
    print(f"max gap: {format_rational(worst)} ({format_decimal(worst)})")
    if args.oracle:
        print(f"max oracle flow difference: {worst_float:.3e}")
    failed = bool(problems) or worst != 0 or (args.oracle and worst_float > args.oracle_tolerance)
    print("result: " + ("FAIL" if failed else "OK"))
    return EXIT_GAP if failed else EXIT_OK


# --------------------------------------------------------------------------
# generate


def cmd_generate(args) -> int:
    if args.family == "braess":
        if args.epsilon.lower() == "none":
            eps = None
        else:
            eps = _rational_arg(args.epsilon)
        inst = nested_braess(args.j, eps)
    else:
        try:
            inst = paper_example(args.name)
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from exc
    _emit(write_json(instance_to_dict(inst), None), args.out)
    return EXIT_OK


# --------------------------------------------------------------------------
# plotdata


def _series_index(curve: SolutionCurve, selector: str) -> tuple[str, int]:
    net = curve.network
    kind, _, name = selector.partition(":")
    if not name:
        kind, name = "", selector
    if kind in ("", "x") and name in net.edge_ids:
        return "x", net.edge_ids.index(name)
    if kind in ("", "pi") and name in net.labels:
        return "pi", net.labels.index(name)
    raise UsageError(f"unknown series {selector!r}; use x:<edge id> or pi:<vertex>")


def series_points(curve: SolutionCurve, kind: str, idx: int) -> list[tuple[Fraction, Fraction, Optional[Fraction]]]:
    """(demand, value, slope after) at every record start, plus the end of a bounded curve."""
    rows: list[tuple[Fraction, Fraction, Optional[Fraction]]] = []
    for seg in curve.segments:
        off = seg.flow_offset if kind == "x" else seg.potential_offset
        slope = seg.flow_slope if kind == "x" else seg.potential_slope
        if seg.kind == "jump":
            rows.append((seg.lambda_lo, off[idx], None))
            continue
        if rows and rows[-1][0] == seg.lambda_lo and rows[-1][1] == off[idx] and rows[-1][2] is None:
            rows.pop()
        rows.append((seg.lambda_lo, off[idx], slope[idx]))
    segs = curve.flow_segments
    if curve.bounded and segs and not is_infinite(segs[-1].lambda_hi):
        last = segs[-1]
        vals = last.flow_at(last.lambda_hi) if kind == "x" else last.potential_at(last.lambda_hi)
        rows.append((last.lambda_hi, vals[idx], None))
    return rows


def cmd_plotdata(args) -> int:
    loaded = read_curve(args.curve)
    curve = loaded.curve
    selected = [(s, *_series_index(curve, s)) for s in args.series]
    header = ["series", "lambda", "lambda_decimal", "value", "value_decimal", "slope"]
    rows = []
    for name, kind, idx in selected:
        for lam, val, slope in series_points(curve, kind, idx):
            rows.append([name, *rational_pair(lam), *rational_pair(val), "" if slope is None else format_rational(slope)])
    _emit(write_csv(header, rows), args.out)
    if args.figure:
        render_figure(curve, selected, args.figure)
    return EXIT_OK


def render_figure(curve: SolutionCurve, selected, path: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for name, kind, idx in selected:
        pts = series_points(curve, kind, idx)
        lams = [float(p[0]) for p in pts]
        vals = [float(p[1]) for p in pts]
        if pts and pts[-1][2] is not None:
            extra = max(1.0, 0.25 * lams[-1])
            lams.append(lams[-1] + extra)
            vals.append(vals[-1] + extra * float(pts[-1][2]))
        ax.plot(lams, vals, marker="o", markersize=3, label=name)
    ax.set_xlabel("demand")
    ax.set_ylabel("value")
    if selected:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wardrop", description="Exact demand-parametric equilibria on networks with piecewise linear costs.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="trace the equilibrium curve of an instance")
    s.add_argument("instance")
    s.add_argument("--lambda-max", help="stop at this demand (rational string)")
    s.add_argument("--out", "-o", help="output file (stdout if omitted)")
    s.add_argument("--format", choices=["json", "csv"], default="json")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("sample", help="evaluate a curve at given demands")
    s.add_argument("curve")
    s.add_argument("--lambda", dest="lambdas", nargs="+", required=True, metavar="LAMBDA")
    s.add_argument("--out", "-o")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("verify", help="check a curve against its instance")
    s.add_argument("instance")
    s.add_argument("curve")
    s.add_argument("--samples-per-segment", type=int, default=5)
    s.add_argument("--oracle", action="store_true", help="also compare with the Frank-Wolfe oracle")
    s.add_argument("--oracle-tolerance", type=float, default=1e-6)
    s.add_argument("--verbose", "-v", action="store_true")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("generate", help="write a generated instance")
    gen = s.add_subparsers(dest="family", required=True)
    b = gen.add_parser("braess", help="nested Braess network")
    b.add_argument("--j", type=int, required=True)
    b.add_argument("--epsilon", default=format_rational(DEFAULT_BRAESS_EPSILON), help='slope on zero-cost edges, or "none"')
    b.add_argument("--out", "-o")
    e = gen.add_parser("example", help="one of the small worked examples")
    e.add_argument("name")
    e.add_argument("--out", "-o")
    s.set_defaults(func=cmd_generate)

    s = sub.add_parser("plotdata", help="breakpoint table of selected series")
    s.add_argument("curve")
    s.add_argument("series", nargs="*", help="x:<edge id> or pi:<vertex>")
    s.add_argument("--out", "-o")
    s.add_argument("--figure", help="also render the series to this image file")
    s.set_defaults(func=cmd_plotdata)
    return p


def _fail(code: int, kind: str, message: str) -> int:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except (ValidationError, UsageError, OSError) as exc:
        return _fail(EXIT_INPUT, "input", str(exc))
    except InvariantViolation as exc:
        return _fail(EXIT_INVARIANT, "invariant", str(exc))
    except BudgetExceeded as exc:
        return _fail(EXIT_BUDGET, "budget", str(exc))
    except OracleError as exc:
        return _fail(EXIT_GAP, "oracle", str(exc))


if __name__ == "__main__":
    sys.exit(main())
