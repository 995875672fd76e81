"""Tie-breaking between boundary crossings and jumps out of ambiguous regions.

Ties are broken by a symbolic perturbation that is fixed once at the start
and carried along the whole run, so every choice is consistent with every
earlier one.  Each edge keeps its slack, the perturbation part of its
position inside the current segment: the potential difference for sloped
and flat segments, the flow for constant segments.  Slacks are vectors
over the perturbation components

    [edge 0, ..., edge m-1, vertex of rank 0, ..., vertex of rank n-1]

compared from the last component, so vertex components dominate.  At the
start a non-constant edge (u, w) gets ``unit(w) - unit(u) + unit(e)``
(vertices in the order Dijkstra settled them; the edge unit separates
edges whose vertex parts cancel around a cycle closed by constant
segments) and a constant edge gets its own edge unit.  The time for edge e to reach its boundary is ``eps + m_e * delta``
with real part ``eps`` and ``m_e = -slack_e / rate_e``; the next crossing
minimises this pair.  After a crossing all slacks move by ``m * rate``, and
the crossed edge gets a fresh edge unit that puts it strictly inside its
new segment (a vanishing shift of the breakpoint it just passed).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .costs import CONSTANT
from .errors import InvariantViolation
from .homotopy import (
    DegenerateRecord,
    Direction,
    HomotopyState,
    LexStep,
    Segment,
    advance,
    check_sign,
    cross_boundary,
    direction,
    edge_rate,
    one_based,
)
from .rational import INF, Ext, is_infinite

LexVector = Optional[list[Fraction]]  # None stands for the all-infinite vector


def lex_compare(v: LexVector, w: LexVector) -> int:
    """Three-way comparison starting from the last component.

    ``None`` is the infinite vector and exceeds every finite vector.
    """
    if v is None or w is None:
        if v is None and w is None:
            return 0
        return 1 if v is None else -1
    if len(v) != len(w):
        raise ValueError("lexicographic comparison needs equal lengths")
    for a, b in zip(reversed(v), reversed(w)):
        if a < b:
            return -1
        if a > b:
            return 1
    return 0


def lex_smaller(v: LexVector, w: LexVector) -> bool:
    return lex_compare(v, w) < 0


def lex_sign(v: LexVector) -> int:
    if v is None:
        return 1
    for a in reversed(v):
        if a:
            return 1 if a > 0 else -1
    return 0


def _unit(size: int, idx: int, value: int = 1) -> list[Fraction]:
    out = [Fraction(0)] * size
    out[idx] = Fraction(value)
    return out


class Perturbation:
    """Per-edge slack vectors of the perturbed curve."""

    def __init__(self, state: HomotopyState, ranks: Sequence[int]):
        net = state.net
        self.m = net.m
        self.size = net.m + net.n
        self.slack: list[list[Fraction]] = []
        for e, (u, w) in enumerate(net.edges):
            if state.is_constant(e):
                self.slack.append(_unit(self.size, e, -1 if state.boundary_sides(e) == {"hi"} else 1))
            else:
                vec = _unit(self.size, e)
                vec[self.m + ranks[w]] += 1
                vec[self.m + ranks[u]] -= 1
                self.slack.append(vec)

    def shift(self, T: Sequence[Fraction], rates: Sequence[Fraction]) -> None:
        for e, r in enumerate(rates):
            if r:
                self.slack[e] = [a + t * r for a, t in zip(self.slack[e], T)]

    def reset(self, e: int, sign: int) -> None:
        """Place edge e just inside the segment it entered moving in direction ``sign``."""
        self.slack[e] = _unit(self.size, e, sign)


@dataclass
class Crossing:
    """The next boundary ahead of the perturbed curve."""

    eps: Ext  # real step length, INF if no boundary lies ahead
    edge: Optional[int]
    vector: LexVector  # perturbation part of the step
    rates: list[Fraction]
    tied: list[int]  # edges whose real step equals eps
    ahead: dict[int, list[Fraction]] = field(default_factory=dict)
    vectors: dict[int, LexVector] = field(default_factory=dict)  # edges on a boundary


def _coordinate(state: HomotopyState, e: int):
    seg = state.segment(e)
    if seg.kind == CONSTANT:
        return state.x[e], seg.flow_lo, seg.flow_hi
    return state.voltage(e), seg.lo, seg.hi


def next_crossing(state: HomotopyState, d: Direction, pert: Perturbation) -> Crossing:
    rates = [edge_rate(state, d, e) for e in range(state.net.m)]
    real: dict[int, Fraction] = {}
    ahead: dict[int, list[Fraction]] = {}
    vectors: dict[int, LexVector] = {}
    for e, r in enumerate(rates):
        pos, lo, hi = _coordinate(state, e)
        on_lo, on_hi = pos == lo, pos == hi
        if on_lo or on_hi:
            vectors[e] = None
        if r == 0:
            continue
        bound = hi if r > 0 else lo
        if is_infinite(bound):
            continue
        eps = (bound - pos) / r
        if eps < 0:
            raise InvariantViolation(f"edge {state.net.edge_ids[e]} lies outside its segment")
        vec = [-s / r for s in pert.slack[e]]
        if eps == 0:
            vectors[e] = vec
            if lex_sign(vec) <= 0:
                raise InvariantViolation(f"perturbed point is not inside the segment of edge {state.net.edge_ids[e]}")
        real[e] = eps
        ahead[e] = vec
    if not real:
        return Crossing(INF, None, None, rates, [], ahead, vectors)
    eps = min(real.values())
    tied = [e for e, v in real.items() if v == eps]
    best = tied[0]
    for e in tied[1:]:
        if lex_compare(ahead[e], ahead[best]) < 0:
            best = e
    twins = [e for e in tied if lex_compare(ahead[e], ahead[best]) == 0]
    if len(twins) > 1:
        names = ", ".join(state.net.edge_ids[e] for e in twins)
        raise InvariantViolation(f"lexicographic minimum is not unique ({names})")
    return Crossing(eps, best, ahead[best], rates, tied, ahead, vectors)


def apply_crossing(state: HomotopyState, d: Direction, pert: Perturbation, c: Crossing, move_lambda: bool = True) -> tuple[int, Fraction]:
    """Move to the chosen boundary and cross it; returns the edge and its old rate."""
    if c.eps > 0:
        advance(state, d, c.eps, move_lambda=move_lambda)
    pert.shift(c.vector, c.rates)
    e = c.edge
    r = c.rates[e]
    sign = 1 if r > 0 else -1
    cross_boundary(state, e, sign)
    pert.reset(e, sign)
    state.mark_visited()
    return e, r


def resolve(
    state: HomotopyState,
    pert: Perturbation,
    record: DegenerateRecord,
    pending: Optional[tuple[int, Fraction]] = None,
) -> Direction:
    """Cross boundaries at the current point until the curve can leave it.

    Each zero-length crossing and the final region are appended to
    ``record``; returns the direction in the final region.
    """
    while True:
        d = direction(state)
        if pending is not None:
            check_sign(state, pending[0], pending[1], d)
        c = next_crossing(state, d, pert)
        if c.eps != 0:
            record.steps.append(LexStep(one_based(state.region), c.vectors, None))
            return d
        record.steps.append(LexStep(one_based(state.region), c.vectors, c.edge))
        pending = apply_crossing(state, d, pert, c)


def resolve_degenerate_potential(state: HomotopyState, pert: Perturbation, record: DegenerateRecord, pending=None) -> Direction:
    """Tie-breaking at a point where every involved segment has positive slope."""
    if any(state.is_constant(e) and state.boundary_sides(e) for e in range(state.net.m)):
        raise ValueError("constant segments involved; use resolve_degenerate_flow")
    return resolve(state, pert, record, pending)


def resolve_degenerate_flow(state: HomotopyState, pert: Perturbation, record: DegenerateRecord, pending=None) -> Direction:
    """Tie-breaking when constant segments take part; their flow slacks decide for them."""
    return resolve(state, pert, record, pending)


@dataclass
class JumpResult:
    segment: Optional[Segment]
    crossing: Optional[Crossing]
    pending: Optional[tuple[int, Fraction]] = None


def jump_ambiguous(state: HomotopyState, pert: Perturbation, d: Optional[Direction] = None) -> Optional[JumpResult]:
    """Leave an ambiguous region by raising the sink side's potentials.

    Returns ``None`` if the current region is not ambiguous.  A result
    without a crossing means no boundary lies ahead, so the demand cannot
    grow any further.  A result without a segment is a zero-length jump.
    """
    if d is None:
        d = direction(state)
    if not d.jump:
        return None
    c = next_crossing(state, d, pert)
    if is_infinite(c.eps):
        return JumpResult(None, None)
    before = list(state.pi)
    x_before = list(state.x)
    region = tuple(state.region)
    if c.eps > 0:
        advance(state, d, c.eps, move_lambda=False)
        c.eps = Fraction(0)
    if state.x != x_before:
        raise InvariantViolation("flow changed during a potential jump")
    seg = None
    if state.pi != before:
        seg = Segment(
            state.lam,
            state.lam,
            region,
            list(state.x),
            [Fraction(0)] * state.net.m,
            before,
            [p - q for p, q in zip(state.pi, before)],
            "jump",
        )
    pending = apply_crossing(state, d, pert, c, move_lambda=False)
    return JumpResult(seg, c, pending)
