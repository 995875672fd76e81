"""JSON and CSV formats for instances and solution curves.

Rationals are always written as strings ("7/3", "inf"), never as floats.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from importlib import resources
from typing import Any, Optional, Sequence

import jsonschema

from .costs import PiecewiseLinearCost, make_cost
from .errors import ValidationError
from .homotopy import DegenerateRecord, Segment, SolutionCurve
from .instances import EdgeSpec, Instance, make_instance
from .rational import INF, NEG_INF, RationalParseError, format_decimal, format_rational, is_infinite, parse_rational


def load_schema(name: str) -> dict:
    text = resources.files("wardrop_homotopy").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def _validate(doc: Any, schema: str) -> None:
    try:
        jsonschema.validate(doc, load_schema(schema))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "document"
        raise ValidationError(f"{schema} file invalid at {where}: {exc.message}") from exc


def _rat(text, where: str, allow_infinite: bool = False):
    try:
        return parse_rational(text, allow_infinite=allow_infinite)
    except RationalParseError as exc:
        raise ValidationError(f"{where}: {exc}") from exc


# --------------------------------------------------------------------------
# instances


def cost_to_dict(cost: PiecewiseLinearCost) -> dict:
    out = {
        "breakpoints": [format_rational(b) for b in cost.breakpoints],
        "slopes": [format_rational(a) for a in cost.slopes],
        "offsets": [format_rational(b) for b in cost.offsets],
    }
    jumps = _jumps_of(cost)
    if any(j is not None for j in jumps):
        out["jumps"] = jumps
    return out


def _limits(cost: PiecewiseLinearCost, k: int) -> tuple:
    """Left and right limits of the cost at breakpoint k."""
    tau = cost.breakpoints[k]
    left = cost.piece_value(k - 1, tau) if k > 0 else NEG_INF
    right = cost.piece_value(k, tau) if k < cost.piece_count else INF
    return left, right


def _jumps_of(cost: PiecewiseLinearCost) -> list[Optional[dict]]:
    out = []
    for k, tau in enumerate(cost.breakpoints):
        if is_infinite(tau):
            out.append(None)
            continue
        left, right = _limits(cost, k)
        if left == right:
            out.append(None)
        else:
            out.append({"left": format_rational(left), "right": format_rational(right)})
    return out


def cost_from_dict(doc: dict, where: str, allow_constant: bool) -> PiecewiseLinearCost:
    bps = [_rat(b, f"{where}.breakpoints", allow_infinite=True) for b in doc["breakpoints"]]
    slopes = [_rat(a, f"{where}.slopes") for a in doc["slopes"]]
    offsets = [_rat(b, f"{where}.offsets") for b in doc["offsets"]]
    if len(offsets) != len(slopes):
        raise ValidationError(f"{where}: slopes and offsets differ in length")
    if len(slopes) == len(bps):
        capacity = False
    elif len(slopes) == len(bps) - 1:
        capacity = True
    else:
        raise ValidationError(f"{where}: need one slope per piece ({len(bps)} or {len(bps) - 1}), got {len(slopes)}")
    if not bps:
        raise ValidationError(f"{where}: at least one breakpoint is required")
    if bps[0] != NEG_INF and bps[0] != 0:
        raise ValidationError(f"{where}: the first breakpoint must be -inf or 0")
    if any(is_infinite(b) for b in bps[1:]):
        raise ValidationError(f"{where}: only the first breakpoint may be infinite")
    try:
        cost = make_cost(bps, slopes, offsets, directed=bps[0] == 0, capacity=capacity, allow_constant=allow_constant)
    except ValidationError as exc:
        raise ValidationError(f"{where}: {exc}") from exc
    jumps = doc.get("jumps")
    if jumps is not None:
        if len(jumps) != len(bps):
            raise ValidationError(f"{where}.jumps: need one entry per breakpoint")
        for k, j in enumerate(jumps):
            if j is None or is_infinite(bps[k]):
                continue
            left, right = _limits(cost, k)
            given = (_rat(j["left"], f"{where}.jumps", True), _rat(j["right"], f"{where}.jumps", True))
            if given != (left, right):
                raise ValidationError(
                    f"{where}.jumps[{k}]: limits {format_rational(given[0])}, {format_rational(given[1])} "
                    f"disagree with the pieces ({format_rational(left)}, {format_rational(right)})"
                )
    return cost


def instance_to_dict(inst: Instance) -> dict:
    doc = {
        "mode": inst.mode,
        "constant_costs": inst.constant_costs,
        "vertices": list(inst.vertices),
        "source": inst.source,
        "sink": inst.sink,
        "edges": [{"id": s.id, "tail": s.tail, "head": s.head, **cost_to_dict(s.cost)} for s in inst.edges],
    }
    if inst.name:
        doc["name"] = inst.name
    if inst.note:
        doc["note"] = inst.note
    return doc


def instance_from_dict(doc: Any) -> Instance:
    _validate(doc, "instance")
    constant = doc.get("constant_costs", False)
    specs = []
    for k, e in enumerate(doc["edges"]):
        where = f"edges[{k}] ({e['id']})"
        specs.append(EdgeSpec(e["id"], e["tail"], e["head"], cost_from_dict(e, where, constant)))
    ids = [s.id for s in specs]
    if len(set(ids)) != len(ids):
        raise ValidationError("edge ids must be unique")
    if len(set(doc["vertices"])) != len(doc["vertices"]):
        raise ValidationError("vertex names must be unique")
    return make_instance(
        doc["vertices"],
        doc["source"],
        doc["sink"],
        specs,
        doc["mode"],
        constant,
        doc.get("name", ""),
        doc.get("note", ""),
    )


def read_instance(path: str) -> Instance:
    return instance_from_dict(_read_json(path))


def write_json(doc: Any, path: Optional[str]) -> str:
    text = json.dumps(doc, indent=2) + "\n"
    if path and path != "-":
        with open(path, "w") as fh:
            fh.write(text)
    return text


def _read_json(path: str) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from exc


# --------------------------------------------------------------------------
# curves


def _vec(values: Sequence) -> list[str]:
    return [format_rational(v) for v in values]


def segment_to_dict(seg: Segment) -> dict:
    return {
        "lambda_lo": format_rational(seg.lambda_lo),
        "lambda_hi": format_rational(seg.lambda_hi),
        "region": [i + 1 for i in seg.region],
        "flow_offset": _vec(seg.flow_offset),
        "flow_slope": _vec(seg.flow_slope),
        "potential_offset": _vec(seg.potential_offset),
        "potential_slope": _vec(seg.potential_slope),
        "kind": seg.kind,
    }


def _record_to_dict(rec: DegenerateRecord, edge_ids) -> dict:
    return {
        "lambda": format_rational(rec.lam),
        "start": rec.start,
        "steps": [
            {
                "region": list(step.region),
                "vectors": {edge_ids[e]: (None if v is None else _vec(v)) for e, v in step.vectors.items()},
                "chosen": None if step.chosen is None else edge_ids[step.chosen],
            }
            for step in rec.steps
        ],
    }


def curve_to_dict(curve: SolutionCurve, inst: Optional[Instance] = None) -> dict:
    net = curve.network
    doc = {
        "breakpoints": _vec(curve.breakpoints),
        "bounded": curve.bounded,
        "edges": list(net.edge_ids),
        "vertices": list(net.labels),
        "segments": [segment_to_dict(s) for s in curve.segments],
        "stats": dict(curve.stats),
        "degeneracies": [_record_to_dict(r, net.edge_ids) for r in curve.degeneracies if r.steps and any(s.chosen is not None for s in r.steps)],
    }
    if inst is not None:
        doc["instance"] = instance_to_dict(inst)
    return doc


def segment_from_dict(doc: dict, where: str) -> Segment:
    lo = _rat(doc["lambda_lo"], f"{where}.lambda_lo")
    hi = _rat(doc["lambda_hi"], f"{where}.lambda_hi", allow_infinite=True)
    if hi == NEG_INF:
        raise ValidationError(f"{where}: lambda_hi cannot be -inf")
    vecs = {k: [_rat(v, f"{where}.{k}") for v in doc[k]] for k in ("flow_offset", "flow_slope", "potential_offset", "potential_slope")}
    return Segment(lo, hi, tuple(i - 1 for i in doc["region"]), vecs["flow_offset"], vecs["flow_slope"], vecs["potential_offset"], vecs["potential_slope"], doc["kind"])


@dataclass
class LoadedCurve:
    """A curve read back from JSON together with the instance it solves."""

    curve: SolutionCurve
    instance: Instance


def curve_from_dict(doc: Any, instance: Optional[Instance] = None) -> LoadedCurve:
    _validate(doc, "curve")
    embedded = instance_from_dict(doc["instance"]) if "instance" in doc else None
    if instance is None:
        if embedded is None:
            raise ValidationError("curve file carries no instance; pass one explicitly")
        instance = embedded
    elif embedded is not None and instance_to_dict(embedded) != instance_to_dict(instance):
        raise ValidationError("curve was computed for a different instance")
    net = instance.network
    if list(doc["edges"]) != list(net.edge_ids) or list(doc["vertices"]) != list(net.labels):
        raise ValidationError("curve edges or vertices do not match the instance")
    segments = []
    for k, sd in enumerate(doc["segments"]):
        seg = segment_from_dict(sd, f"segments[{k}]")
        if len(seg.flow_offset) != net.m or len(seg.flow_slope) != net.m or len(seg.region) != net.m:
            raise ValidationError(f"segments[{k}]: expected {net.m} edge entries")
        if len(seg.potential_offset) != net.n or len(seg.potential_slope) != net.n:
            raise ValidationError(f"segments[{k}]: expected {net.n} vertex entries")
        segments.append(seg)
    curve = SolutionCurve(net, segments, doc.get("bounded", True), dict(doc.get("stats", {})))
    return LoadedCurve(curve, instance)


def read_curve(path: str, instance: Optional[Instance] = None) -> LoadedCurve:
    return curve_from_dict(_read_json(path), instance)


def continuity_errors(curve: SolutionCurve) -> list[str]:
    """Places where consecutive records do not join up."""
    out = []
    segs = curve.segments
    for k, (a, b) in enumerate(zip(segs, segs[1:])):
        if is_infinite(a.lambda_hi) or a.lambda_hi != b.lambda_lo:
            out.append(f"records {k} and {k + 1}: demand gap")
            continue
        if a.flow_at(a.lambda_hi) != b.flow_offset:
            out.append(f"records {k} and {k + 1}: flow discontinuity at {format_rational(b.lambda_lo)}")
        end = [p + q for p, q in zip(a.potential_offset, a.potential_slope)] if a.kind == "jump" else a.potential_at(a.lambda_hi)
        if end != b.potential_offset:
            out.append(f"records {k} and {k + 1}: potential discontinuity at {format_rational(b.lambda_lo)}")
    return out


# --------------------------------------------------------------------------
# CSV


def rational_pair(value) -> list[str]:
    return [format_rational(value), format_decimal(value)]


def write_csv(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def curve_to_csv(curve: SolutionCurve) -> str:
    net = curve.network
    header = ["kind", "lambda_lo", "lambda_hi", "region"]
    header += [f"x_{e}" for e in net.edge_ids] + [f"dx_{e}" for e in net.edge_ids]
    header += [f"pi_{v}" for v in net.labels] + [f"dpi_{v}" for v in net.labels]
    rows = []
    for seg in curve.segments:
        row = [seg.kind, format_rational(seg.lambda_lo), format_rational(seg.lambda_hi), " ".join(str(i + 1) for i in seg.region)]
        row += _vec(seg.flow_offset) + _vec(seg.flow_slope) + _vec(seg.potential_offset) + _vec(seg.potential_slope)
        rows.append(row)
    return write_csv(header, rows)
