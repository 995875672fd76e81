"""Piecewise linear edge costs and their inverses.

A cost with breakpoints ``tau_1 < ... < tau_k`` has affine pieces
``l(x) = a_i x + b_i`` on ``[tau_i, tau_{i+1})``.  ``tau_1`` is ``-inf`` for
an edge usable in both directions, or ``0`` for a one-way edge whose left
limit at zero is ``-inf``.  With ``capacity=True`` the last breakpoint is a
capacity: the right limit there is ``+inf`` and no piece follows it.

The inverse is a list of segments in potential order.  Sloped segments
invert an increasing piece, flat segments come from jumps of ``l`` and map
a whole potential interval to one flow, and constant segments (slope zero,
only with the constant-cost extension) map one potential to a flow
interval.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence

from .errors import ValidationError
from .rational import INF, NEG_INF, Ext, is_infinite

SLOPED = "sloped"
FLAT = "flat"
CONSTANT = "constant"


@dataclass(frozen=True)
class PiecewiseLinearCost:
    breakpoints: tuple
    slopes: tuple
    offsets: tuple
    directed: bool = False
    capacity: bool = False

    @property
    def piece_count(self) -> int:
        return len(self.slopes)

    def piece_bounds(self, i: int) -> tuple[Ext, Ext]:
        lo = self.breakpoints[i]
        hi = self.breakpoints[i + 1] if i + 1 < len(self.breakpoints) else INF
        return lo, hi

    def piece_value(self, i: int, x: Ext) -> Ext:
        a, b = self.slopes[i], self.offsets[i]
        if is_infinite(x):
            if a == 0:
                return b
            return x
        return a * x + b

    @property
    def capacity_value(self) -> Optional[Fraction]:
        return self.breakpoints[-1] if self.capacity else None

    @property
    def has_constant_piece(self) -> bool:
        return any(a == 0 for a in self.slopes)


@dataclass(frozen=True)
class CostValue:
    value: Ext
    left: Ext
    right: Ext


@dataclass(frozen=True)
class InverseSegment:
    kind: str
    lo: Ext  # potential range
    hi: Ext
    flow_lo: Ext  # flow range
    flow_hi: Ext
    c: Optional[Fraction]  # conductivity, None on constant segments
    d: Optional[Fraction]  # flow = c * v - d

    def flow_at(self, v: Fraction) -> Fraction:
        if self.kind == CONSTANT:
            raise ValueError("flow on a constant segment is not determined by the potential")
        return self.c * v - self.d


@dataclass(frozen=True)
class InverseCost:
    segments: tuple[InverseSegment, ...]

    def __len__(self) -> int:
        return len(self.segments)

    def __getitem__(self, i: int) -> InverseSegment:
        return self.segments[i]


def make_cost(
    breakpoints: Sequence,
    slopes: Sequence,
    offsets: Sequence,
    directed: bool = False,
    capacity: bool = False,
    allow_constant: bool = False,
) -> PiecewiseLinearCost:
    cost = PiecewiseLinearCost(
        tuple(_ext(b) for b in breakpoints),
        tuple(Fraction(a) for a in slopes),
        tuple(Fraction(b) for b in offsets),
        directed,
        capacity,
    )
    validate_cost(cost, allow_constant=allow_constant)
    return cost


def _ext(value) -> Ext:
    if is_infinite(value):
        return value
    return Fraction(value)


def validate_cost(cost: PiecewiseLinearCost, allow_constant: bool = False, partial: bool = False) -> None:
    """Check the structural, monotonicity and sign conditions.

    ``partial`` accepts a cost given only on ``x >= 0`` that has not yet been
    made one-way (the input of :func:`directify`).
    """
    tau = cost.breakpoints
    if not tau:
        raise ValidationError("a cost needs at least one breakpoint")
    first = tau[0]
    if first == NEG_INF:
        if cost.directed:
            raise ValidationError("a one-way cost must start at breakpoint 0")
    elif first == 0:
        if not cost.directed and not partial:
            raise ValidationError("a cost starting at 0 must be one-way")
    else:
        raise ValidationError("the first breakpoint must be -inf or 0")
    for k in range(1, len(tau)):
        if is_infinite(tau[k]):
            raise ValidationError("only the first breakpoint may be infinite")
        if not tau[k] > tau[k - 1]:
            raise ValidationError("breakpoints must be strictly increasing")
    expected = len(tau) - 1 if cost.capacity else len(tau)
    if cost.capacity and len(tau) < 2:
        raise ValidationError("a capacity needs a piece before it")
    if cost.capacity and tau[-1] <= 0:
        raise ValidationError("a capacity must be positive")
    if len(cost.slopes) != expected or len(cost.offsets) != expected:
        raise ValidationError(f"expected {expected} slopes and offsets, got {len(cost.slopes)} and {len(cost.offsets)}")
    for a in cost.slopes:
        if a < 0:
            raise ValidationError("cost pieces must be nondecreasing")
        if a == 0 and not allow_constant:
            raise ValidationError("zero-slope pieces need the constant-cost extension")
    for k in range(1, expected):
        left = cost.piece_value(k - 1, tau[k])
        right = cost.piece_value(k, tau[k])
        if left > right:
            raise ValidationError(f"cost decreases across breakpoint {tau[k]}")
    lim = cost_limits_at_zero(cost)
    if lim[1] < 0:
        raise ValidationError("cost must be nonnegative for positive flow")
    if lim[0] > 0:
        raise ValidationError("cost must be nonpositive for negative flow")


def cost_limits_at_zero(cost: PiecewiseLinearCost) -> tuple[Ext, Ext]:
    v = evaluate_cost(cost, Fraction(0))
    return v.left, v.right


def _piece_index(cost: PiecewiseLinearCost, x: Fraction) -> int:
    """Index of the piece whose half-open interval contains x."""
    idx = 0
    for k in range(1, cost.piece_count):
        if cost.breakpoints[k] <= x:
            idx = k
        else:
            break
    return idx


def evaluate_cost(cost: PiecewiseLinearCost, x) -> CostValue:
    """Cost value at x together with both one-sided limits.

    Outside the domain of a one-way or capacitated edge the value is
    ``-inf`` (negative flow) or ``+inf`` (above capacity).
    """
    x = Fraction(x)
    tau = cost.breakpoints
    if cost.directed and x < 0:
        return CostValue(NEG_INF, NEG_INF, NEG_INF)
    if cost.capacity and x > tau[-1]:
        return CostValue(INF, INF, INF)
    if cost.capacity and x == tau[-1]:
        left = cost.piece_value(cost.piece_count - 1, x)
        return CostValue(left, left, INF)
    k = _piece_index(cost, x)
    right = cost.piece_value(k, x)
    if x == tau[k] and k > 0:
        left = cost.piece_value(k - 1, x)
    elif x == tau[0] and cost.directed:
        left = NEG_INF
    else:
        left = right
    return CostValue(right, left, right)


def invert_cost(cost: PiecewiseLinearCost) -> InverseCost:
    """Build the inverse segments in potential order."""
    segs: list[InverseSegment] = []
    tau = cost.breakpoints
    if cost.directed:
        first = cost.piece_value(0, tau[0])
        segs.append(InverseSegment(FLAT, NEG_INF, first, tau[0], tau[0], Fraction(0), -tau[0]))
    for i in range(cost.piece_count):
        lo_x, hi_x = cost.piece_bounds(i)
        a, b = cost.slopes[i], cost.offsets[i]
        if i > 0:
            left = cost.piece_value(i - 1, lo_x)
            right = cost.piece_value(i, lo_x)
            if right > left:
                segs.append(InverseSegment(FLAT, left, right, lo_x, lo_x, Fraction(0), -lo_x))
        if a == 0:
            segs.append(InverseSegment(CONSTANT, b, b, lo_x, hi_x, None, None))
        else:
            lo_v = cost.piece_value(i, lo_x)
            hi_v = cost.piece_value(i, hi_x)
            segs.append(InverseSegment(SLOPED, lo_v, hi_v, lo_x, hi_x, 1 / a, b / a))
    if cost.capacity:
        cap = tau[-1]
        left = cost.piece_value(cost.piece_count - 1, cap)
        segs.append(InverseSegment(FLAT, left, INF, cap, cap, Fraction(0), -cap))
    return InverseCost(tuple(segs))


def inverse_interval(inv: InverseCost, v) -> tuple[Ext, Ext]:
    """Range of flows x with left limit <= v <= right limit at x."""
    v = Fraction(v)
    values: list[Ext] = []
    for seg in inv.segments:
        if seg.lo <= v <= seg.hi:
            if seg.kind == CONSTANT:
                values += [seg.flow_lo, seg.flow_hi]
            else:
                values.append(seg.flow_at(v))
    if not values:
        raise ValueError(f"potential difference {v} not covered by the inverse")
    return min(values), max(values)


def evaluate_inverse(inv: InverseCost, v) -> Fraction:
    """The flow induced by potential difference v.

    Raises ``ValueError`` when v lands on a constant segment, where the flow
    is not unique.
    """
    lo, hi = inverse_interval(inv, v)
    if lo != hi:
        raise ValueError(f"flow at potential difference {v} is not unique: [{lo}, {hi}]")
    return lo


def directify(cost: PiecewiseLinearCost) -> PiecewiseLinearCost:
    """Turn a cost given on x >= 0 into a one-way cost (left limit -inf at 0)."""
    if cost.breakpoints[0] != 0:
        raise ValidationError("directify expects a cost defined from x = 0")
    if cost.piece_value(0, Fraction(0)) < 0:
        raise ValidationError("cost is negative at zero flow")
    out = replace(cost, directed=True)
    validate_cost(out, allow_constant=cost.has_constant_piece)
    return out


def halve(cost: PiecewiseLinearCost) -> PiecewiseLinearCost:
    """Same breakpoints, slopes and offsets divided by two."""
    return replace(
        cost,
        slopes=tuple(a / 2 for a in cost.slopes),
        offsets=tuple(b / 2 for b in cost.offsets),
    )
