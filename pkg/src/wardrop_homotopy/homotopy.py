"""Demand-parametric equilibrium curve by region pivoting.

The solver starts at zero demand and increases the demand ``lam`` along the
unit s-t direction.  Inside a region (one inverse segment per edge) the
potentials move along ``H e_t`` where ``H`` is the inverse of the reduced
Laplacian; at a region boundary one edge changes segment and ``H`` is
updated by a rank-one formula.  Ties between boundaries are broken by the
lexicographic rule in :mod:`wardrop_homotopy.degeneracy`, and regions whose
Laplacian is singular are left by a flow-preserving potential jump.
"""

from __future__ import annotations

import heapq
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .costs import CONSTANT, FLAT, InverseCost, InverseSegment, PiecewiseLinearCost, evaluate_cost, invert_cost
from .errors import BudgetExceeded, InvariantViolation, SingularMatrixError, ValidationError
from .linalg import (
    Matrix,
    active_components,
    dot,
    invert_spd,
    mat_vec,
    reduced_laplacian,
    sherman_morrison_limit,
    sherman_morrison_update,
)
from .network import Network, excess_of, reduced_column
from .rational import INF, Ext, coeff_bits, is_infinite

PIVOT_BUDGET_ENV = "WARDROP_MAX_PIVOTS"
DEFAULT_PIVOT_BUDGET = 100_000


@dataclass
class Segment:
    """One affine piece of the curve: ``x(lam) = flow_offset + (lam - lambda_lo) * flow_slope``.

    Jump records have ``lambda_lo == lambda_hi``; their potential moves by
    ``potential_slope`` while the flow stays put.
    """

    lambda_lo: Fraction
    lambda_hi: Ext
    region: tuple[int, ...]
    flow_offset: list[Fraction]
    flow_slope: list[Fraction]
    potential_offset: list[Fraction]
    potential_slope: list[Fraction]
    kind: str = "segment"
    inverse: Optional[Matrix] = field(default=None, repr=False, compare=False)

    def flow_at(self, lam) -> list[Fraction]:
        dl = Fraction(lam) - self.lambda_lo
        return [a + dl * b for a, b in zip(self.flow_offset, self.flow_slope)]

    def potential_at(self, lam) -> list[Fraction]:
        dl = Fraction(lam) - self.lambda_lo
        return [a + dl * b for a, b in zip(self.potential_offset, self.potential_slope)]


@dataclass
class LexStep:
    region: tuple[int, ...]
    vectors: dict[int, Optional[list[Fraction]]]
    chosen: Optional[int]


@dataclass
class DegenerateRecord:
    lam: Fraction
    potential: list[Fraction]
    start: bool
    steps: list[LexStep] = field(default_factory=list)

    @property
    def regions(self) -> list[tuple[int, ...]]:
        return [s.region for s in self.steps]


@dataclass
class SolutionCurve:
    network: Network
    segments: list[Segment]
    bounded: bool
    stats: dict
    degeneracies: list[DegenerateRecord] = field(default_factory=list)
    visited: list[tuple[int, ...]] = field(default_factory=list, repr=False)

    @property
    def breakpoints(self) -> list[Fraction]:
        out: list[Fraction] = []
        for seg in self.segments:
            if not out or seg.lambda_lo != out[-1]:
                out.append(seg.lambda_lo)
        if self.segments and self.bounded and not is_infinite(self.segments[-1].lambda_hi):
            end = self.segments[-1].lambda_hi
            if end != out[-1]:
                out.append(end)
        return out

    @property
    def flow_segments(self) -> list[Segment]:
        return [s for s in self.segments if s.kind == "segment"]

    @property
    def end(self) -> Ext:
        segs = self.flow_segments
        return segs[-1].lambda_hi if segs else Fraction(0)


@dataclass
class Direction:
    potential: list[Fraction]
    flow: list[Fraction]
    jump: bool


class HomotopyState:
    """Mutable solver state: point, region and the maintained inverse."""

    def __init__(self, net: Network, inverses: Sequence[InverseCost], allow_constant: bool, max_pivots: int):
        self.net = net
        self.inverses = list(inverses)
        self.allow_constant = allow_constant
        self.max_pivots = max_pivots
        self.lam = Fraction(0)
        self.pi = [Fraction(0)] * net.n
        self.x = [Fraction(0)] * net.m
        self.region = [0] * net.m
        self.H: Optional[Matrix] = None
        self.neighbors: dict[int, Matrix] = {}
        self.visited: set[tuple[int, ...]] = set()
        self.visit_order: list[tuple[int, ...]] = []
        self.pivots = 0
        self.gammas = [reduced_column(net, e) for e in range(net.m)]

    def segment(self, e: int) -> InverseSegment:
        return self.inverses[e][self.region[e]]

    def voltage(self, e: int) -> Fraction:
        u, w = self.net.edges[e]
        return self.pi[w] - self.pi[u]

    def is_constant(self, e: int) -> bool:
        return self.segment(e).kind == CONSTANT

    def conductances(self, constant_as=None) -> list[Optional[Fraction]]:
        out = []
        for e in range(self.net.m):
            seg = self.segment(e)
            if seg.kind == CONSTANT:
                if not self.allow_constant:
                    raise ValidationError("zero-slope piece reached without the constant-cost extension")
                out.append(constant_as)
            else:
                out.append(seg.c)
        return out

    def mark_visited(self) -> None:
        key = tuple(self.region)
        if key in self.visited:
            raise InvariantViolation(f"region {one_based(key)} visited twice")
        self.visited.add(key)
        self.visit_order.append(key)

    def boundary_sides(self, e: int) -> set[str]:
        """Which ends of the current segment the point touches."""
        seg = self.segment(e)
        sides = set()
        if seg.kind == CONSTANT:
            val = self.x[e]
            lo, hi = seg.flow_lo, seg.flow_hi
        else:
            val = self.voltage(e)
            lo, hi = seg.lo, seg.hi
        if val == lo:
            sides.add("lo")
        if val == hi:
            sides.add("hi")
        return sides


def one_based(region: Sequence[int]) -> tuple[int, ...]:
    return tuple(t + 1 for t in region)


def pivot_budget(max_pivots: Optional[int] = None) -> int:
    if max_pivots is not None:
        return max_pivots
    env = os.environ.get(PIVOT_BUDGET_ENV)
    return int(env) if env else DEFAULT_PIVOT_BUDGET


# --------------------------------------------------------------------------
# inverse maintenance


def reinvert(state: HomotopyState) -> None:
    """Recompute H (and the per-constant-edge inverses) from scratch.

    Constant edges enter the Laplacian with unit conductance and are then
    contracted by the limit operator.  A singular Laplacian marks an
    ambiguous region (``H = None``).
    """
    net = state.net
    cs = state.conductances(constant_as=Fraction(1))
    try:
        A = invert_spd(reduced_laplacian(net, cs))
    except SingularMatrixError:
        state.H = None
        state.neighbors = {}
        return
    constants = [e for e in range(net.m) if state.is_constant(e)]
    state.H = _contract(A, constants, state.gammas)
    state.neighbors = {f: _contract(A, [e for e in constants if e != f], state.gammas) for f in constants}


def _contract(A: Matrix, edges: Sequence[int], gammas) -> Matrix:
    H = A
    for e in edges:
        try:
            H = sherman_morrison_limit(H, gammas[e])
        except SingularMatrixError:
            raise InvariantViolation("zero-slope pieces close a cycle; equilibrium flows are not unique") from None
    return H


def _update_inverse(state: HomotopyState, e: int, old: InverseSegment, new: InverseSegment) -> None:
    if state.H is None or old.kind == CONSTANT:
        reinvert(state)
        return
    g = state.gammas[e]
    try:
        if new.kind == CONSTANT:
            neighbor = sherman_morrison_update(state.H, g, 1 - old.c)
            H = sherman_morrison_limit(state.H, g)
            others = {f: sherman_morrison_limit(N, g) for f, N in state.neighbors.items()}
            others[e] = neighbor
        else:
            dc = new.c - old.c
            H = sherman_morrison_update(state.H, g, dc)
            others = {f: sherman_morrison_update(N, g, dc) for f, N in state.neighbors.items()}
    except SingularMatrixError:
        reinvert(state)
        return
    state.H = H
    state.neighbors = others


# --------------------------------------------------------------------------
# primitive operations


def direction(state: HomotopyState) -> Direction:
    """Potential and flow rates of the current region.

    In an ambiguous region the potential of the sink's active component
    rises at unit rate and no flow changes.
    """
    net = state.net
    if state.H is None:
        comp = active_components(net, state.conductances())
        if comp[net.source] == comp[net.sink]:
            raise InvariantViolation("singular region although source and sink are actively connected")
        J = [Fraction(int(comp[v] == comp[net.sink])) for v in range(net.n)]
        return Direction(J, [Fraction(0)] * net.m, True)
    H = state.H
    col = net.n - 2
    dpi = [Fraction(0)] + [row[col] for row in H]
    dx = []
    for e in range(net.m):
        seg = state.segment(e)
        u, w = net.edges[e]
        if seg.kind == CONSTANT:
            N = state.neighbors.get(e)
            if N is None:
                raise InvariantViolation(f"no neighbouring inverse stored for edge {net.edge_ids[e]}")
            g = state.gammas[e]
            num = dot(g, [row[col] for row in N])
            den = dot(g, mat_vec(N, g))
            dx.append(num / den)
        elif seg.kind == FLAT:
            dx.append(Fraction(0))
        else:
            dx.append(seg.c * (dpi[w] - dpi[u]))
    if excess_of(net, dx) != net.demand_direction():
        raise InvariantViolation("flow direction violates conservation")
    return Direction(dpi, dx, False)


def edge_rate(state: HomotopyState, d: Direction, e: int) -> Fraction:
    """Rate in the coordinate that locates the edge inside its segment."""
    if state.is_constant(e):
        return d.flow[e]
    u, w = state.net.edges[e]
    return d.potential[w] - d.potential[u]


def potential_rate(state: HomotopyState, d: Direction, e: int) -> Fraction:
    u, w = state.net.edges[e]
    return d.potential[w] - d.potential[u]


def step_length(state: HomotopyState, d: Direction) -> tuple[Ext, list[int], list[Ext]]:
    """Distance to the nearest boundary ahead and the edges attaining it."""
    eps_all: list[Ext] = []
    for e in range(state.net.m):
        seg = state.segment(e)
        r = edge_rate(state, d, e)
        if seg.kind == CONSTANT:
            pos, lo, hi = state.x[e], seg.flow_lo, seg.flow_hi
        else:
            pos, lo, hi = state.voltage(e), seg.lo, seg.hi
        if r > 0:
            eps_all.append(INF if is_infinite(hi) else (hi - pos) / r)
        elif r < 0:
            eps_all.append(INF if is_infinite(lo) else (lo - pos) / r)
        else:
            eps_all.append(INF)
    eps = min(eps_all, default=INF)
    estar = [] if is_infinite(eps) else [e for e, v in enumerate(eps_all) if v == eps]
    return eps, estar, eps_all


def cross_boundary(state: HomotopyState, e: int, sign: int) -> None:
    """Move edge e to the neighbouring segment in direction ``sign``."""
    if sign not in (1, -1):
        raise InvariantViolation("crossing needs a nonzero rate")
    old = state.segment(e)
    t = state.region[e] + sign
    if not 0 <= t < len(state.inverses[e]):
        raise InvariantViolation(f"edge {state.net.edge_ids[e]} has no segment beyond its last one")
    new = state.inverses[e][t]
    state.region[e] = t
    state.pivots += 1
    if state.pivots > state.max_pivots:
        raise BudgetExceeded(f"pivot budget of {state.max_pivots} exhausted at demand {state.lam}")
    _update_inverse(state, e, old, new)


def check_sign(state: HomotopyState, e: int, before: Fraction, d: Direction) -> None:
    after = edge_rate(state, d, e)
    if before * after < 0:
        raise InvariantViolation(f"rate on edge {state.net.edge_ids[e]} changed sign across its boundary")


def advance(state: HomotopyState, d: Direction, eps: Fraction, move_lambda: bool = True) -> None:
    state.pi = [p + eps * dp for p, dp in zip(state.pi, d.potential)]
    if move_lambda:
        state.lam += eps
        state.x = [x + eps * dx for x, dx in zip(state.x, d.flow)]
    for e in range(state.net.m):
        seg = state.segment(e)
        if seg.kind != CONSTANT and seg.flow_at(state.voltage(e)) != state.x[e]:
            raise InvariantViolation(f"flow on edge {state.net.edge_ids[e]} drifted from its closed form")


# --------------------------------------------------------------------------
# start point


def initial_point(net: Network, costs: Sequence[PiecewiseLinearCost], inverses=None, allow_constant=None, max_pivots=None):
    """Zero-flow start: shortest-path potentials and a start region.

    Returns ``(state, ranks)`` where ``ranks[v]`` is the order in which
    Dijkstra settled vertex v; the ranks define the perturbation that picks
    a side for every edge sitting exactly on a breakpoint.
    """
    if inverses is None:
        inverses = [invert_cost(c) for c in costs]
    if allow_constant is None:
        allow_constant = any(c.has_constant_piece for c in costs)
    state = HomotopyState(net, inverses, allow_constant, pivot_budget(max_pivots))
    pi, ranks = zero_flow_potentials(net, costs)
    state.pi = pi
    for e in range(net.m):
        state.region[e] = _start_segment(state, e, ranks)
    reinvert(state)
    state.mark_visited()
    return state, ranks


def zero_flow_potentials(net: Network, costs: Sequence[PiecewiseLinearCost]) -> tuple[list[Fraction], list[int]]:
    adj: list[list[tuple[int, Fraction]]] = [[] for _ in range(net.n)]
    for e, (u, w) in enumerate(net.edges):
        val = evaluate_cost(costs[e], 0)
        if not is_infinite(val.right):
            adj[u].append((w, val.right))
        if not is_infinite(val.left):
            adj[w].append((u, -val.left))
    dist: list[Optional[Fraction]] = [None] * net.n
    ranks = [-1] * net.n
    heap = [(Fraction(0), net.source)]
    best = {net.source: Fraction(0)}
    order = 0
    while heap:
        d, v = heapq.heappop(heap)
        if dist[v] is not None:
            continue
        dist[v] = d
        ranks[v] = order
        order += 1
        for w, wt in adj[v]:
            nd = d + wt
            if dist[w] is None and (w not in best or nd < best[w]):
                best[w] = nd
                heapq.heappush(heap, (nd, w))
    missing = [net.labels[v] for v in range(net.n) if dist[v] is None]
    if missing:
        raise ValidationError(f"vertices not reachable from the source at zero flow: {', '.join(missing)}")
    return dist, ranks


def _start_segment(state: HomotopyState, e: int, ranks: Sequence[int]) -> int:
    v = state.voltage(e)
    cands = []
    for i, seg in enumerate(state.inverses[e].segments):
        if not seg.lo <= v <= seg.hi:
            continue
        if seg.kind == CONSTANT:
            ok = seg.flow_lo <= 0 <= seg.flow_hi
        else:
            ok = seg.flow_at(v) == 0
        if ok:
            cands.append(i)
    if not cands:
        raise InvariantViolation(f"no segment of edge {state.net.edge_ids[e]} fits the zero-flow start")
    if len(cands) == 1:
        return cands[0]
    if len(cands) > 2:
        raise InvariantViolation(f"edge {state.net.edge_ids[e]} touches more than two segments at the start")
    lower, upper = cands
    for i in cands:
        if state.inverses[e][i].kind == CONSTANT:
            return i
    u, w = state.net.edges[e]
    return upper if ranks[w] > ranks[u] else lower


# --------------------------------------------------------------------------
# main loop


def run(
    net: Network,
    costs: Sequence[PiecewiseLinearCost],
    lambda_max: Ext = INF,
    max_pivots: Optional[int] = None,
    constant_costs: Optional[bool] = None,
) -> SolutionCurve:
    """Trace the equilibrium curve on ``[0, lambda_max]``."""
    from . import degeneracy

    if not is_infinite(lambda_max):
        lambda_max = Fraction(lambda_max)
        if lambda_max < 0:
            raise ValueError("lambda_max must be nonnegative")
    inverses = [invert_cost(c) for c in costs]
    if constant_costs is None:
        constant_costs = any(c.has_constant_piece for c in costs)
    elif not constant_costs and any(c.has_constant_piece for c in costs):
        raise ValidationError("zero-slope pieces need the constant-cost extension")
    state, ranks = initial_point(net, costs, inverses, constant_costs, max_pivots)
    pert = degeneracy.Perturbation(state, ranks)
    stats = {"pivots": 0, "degenerate_points": 0, "jumps": 0, "max_coeff_bits": 0}
    records: list[DegenerateRecord] = []

    def settle(record: DegenerateRecord, pending) -> None:
        degeneracy.resolve(state, pert, record, pending)
        if any(step.chosen is not None for step in record.steps):
            stats["degenerate_points"] += 1
            records.append(record)

    settle(DegenerateRecord(state.lam, list(state.pi), True), None)

    segments: list[Segment] = []
    bounded = True
    pending: Optional[tuple[int, Fraction]] = None
    while True:
        d = direction(state)
        if pending is not None:
            check_sign(state, pending[0], pending[1], d)
            pending = None
        c = degeneracy.next_crossing(state, d, pert)
        if c.eps == 0:
            settle(DegenerateRecord(state.lam, list(state.pi), False), None)
            continue
        if d.jump:
            result = degeneracy.jump_ambiguous(state, pert, d)
            if result.crossing is None:
                break
            if result.segment is not None:
                segments.append(result.segment)
                stats["jumps"] += 1
            pending = result.pending
            continue
        hi = state.lam + c.eps if not is_infinite(c.eps) else INF
        stop = lambda_max <= hi
        if stop:
            hi = lambda_max
        if hi > state.lam or not segments:
            segments.append(
                Segment(
                    state.lam,
                    hi,
                    tuple(state.region),
                    list(state.x),
                    list(d.flow),
                    list(state.pi),
                    list(d.potential),
                    "segment",
                    [row[:] for row in state.H],
                )
            )
        if is_infinite(hi):
            bounded = False
            break
        if stop:
            advance(state, d, hi - state.lam)
            break
        region = one_based(state.region)
        pending = degeneracy.apply_crossing(state, d, pert, c)
        if len(c.tied) > 1:
            record = DegenerateRecord(state.lam, list(state.pi), False)
            record.steps.append(LexStep(region, {e: c.ahead[e] for e in c.tied}, c.edge))
            settle(record, pending)
            pending = None

    stats["pivots"] = state.pivots
    stats["max_coeff_bits"] = max(
        (coeff_bits(v) for s in segments for vec in (s.flow_offset, s.flow_slope, s.potential_offset, s.potential_slope) for v in vec),
        default=0,
    )
    return SolutionCurve(net, segments, bounded, stats, records, list(state.visit_order))


def sample(curve: SolutionCurve, lam) -> tuple[list[Fraction], list[Fraction]]:
    """Flow and potential at demand ``lam`` (segments are half-open)."""
    lam = Fraction(lam)
    if lam < 0:
        raise ValueError("demand must be nonnegative")
    segs = curve.flow_segments
    for seg in segs:
        if seg.lambda_lo <= lam < seg.lambda_hi:
            return seg.flow_at(lam), seg.potential_at(lam)
    if segs and curve.bounded and lam == segs[-1].lambda_hi:
        return segs[-1].flow_at(lam), segs[-1].potential_at(lam)
    raise ValueError(f"demand {lam} lies beyond the computed curve (ends at {curve.end})")
