"""Fixed-demand equilibrium oracle, exact verification and the direction QP.

Everything here is independent of the region-pivoting solver: equilibria
are found by Frank-Wolfe on the Beckmann potential and then confirmed
exactly by solving the optimality system for a guessed segment pattern.
"""

from __future__ import annotations

import heapq
import itertools
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .costs import CONSTANT, FLAT, PiecewiseLinearCost, evaluate_cost, invert_cost, _piece_index
from .errors import OracleError, SingularMatrixError
from .linalg import rref_solve
from .network import Network, excess_of
from .rational import INF, is_infinite

TOLERANCE_ENV = "WARDROP_ORACLE_TOL"
DEFAULT_TOLERANCE = 1e-8
EXACT_EDGE_LIMIT = 12
FLOAT = np.longdouble


# --------------------------------------------------------------------------
# exact verification


@dataclass
class EquilibriumCertificate:
    flow: list[Fraction]
    potential: list[Fraction]
    gap: Fraction
    demand: Fraction

    @property
    def is_equilibrium(self) -> bool:
        return self.gap == 0


def _demand_of(net: Network, x: Sequence[Fraction]) -> Fraction:
    y = excess_of(net, x)
    lam = y[net.sink]
    if lam < 0 or y[net.source] != -lam or any(y[v] for v in range(1, net.n - 1)):
        raise OracleError("flow is not an s-t flow of nonnegative value")
    return lam


def _auxiliary_arcs(net: Network, costs, x) -> list[tuple[int, int, Fraction]]:
    """Arcs whose shortest-path distances are the largest feasible potentials."""
    arcs = []
    for e, (u, w) in enumerate(net.edges):
        val = evaluate_cost(costs[e], x[e])
        if is_infinite(val.value) and val.left == val.right:
            raise OracleError(f"flow on edge {net.edge_ids[e]} is outside its domain")
        if not is_infinite(val.right):
            arcs.append((u, w, val.right))
        if not is_infinite(val.left):
            arcs.append((w, u, -val.left))
    return arcs


def _bellman_ford(n: int, arcs, sources: Sequence[int]):
    dist: list[Optional[Fraction]] = [None] * n
    for s in sources:
        dist[s] = Fraction(0)
    for _ in range(n):
        changed = False
        for u, w, wt in arcs:
            if dist[u] is not None and (dist[w] is None or dist[u] + wt < dist[w]):
                dist[w] = dist[u] + wt
                changed = True
        if not changed:
            return dist, Fraction(0)
    gap = Fraction(0)
    for u, w, wt in arcs:
        if dist[u] is not None and dist[u] + wt < dist[w]:
            gap = max(gap, dist[w] - dist[u] - wt)
    return dist, gap


def verify_equilibrium(
    net: Network,
    costs: Sequence[PiecewiseLinearCost],
    x: Sequence,
    potential: Optional[Sequence] = None,
) -> EquilibriumCertificate:
    """Exact check of the sandwich condition for flow x.

    Without ``potential`` the gap is positive iff the auxiliary graph has a
    negative cycle, i.e. no potential certifies x.  With ``potential`` the
    gap also includes the largest edgewise violation by that potential.
    """
    x = [Fraction(v) for v in x]
    if len(x) != net.m:
        raise ValueError(f"flow has length {len(x)}, expected {net.m}")
    lam = _demand_of(net, x)
    arcs = _auxiliary_arcs(net, costs, x)
    _, gap = _bellman_ford(net.n, arcs, range(net.n))
    if gap > 0:
        pi = [Fraction(0)] * net.n
    else:
        pi = _largest_potentials(net, arcs)
    if potential is not None:
        pi = [Fraction(p) for p in potential]
        for e, (u, w) in enumerate(net.edges):
            val = evaluate_cost(costs[e], x[e])
            v = pi[w] - pi[u]
            if not is_infinite(val.left) and v < val.left:
                gap = max(gap, val.left - v)
            if not is_infinite(val.right) and v > val.right:
                gap = max(gap, v - val.right)
    return EquilibriumCertificate(x, pi, gap, lam)


def _largest_potentials(net: Network, arcs) -> list[Fraction]:
    dist, _ = _bellman_ford(net.n, arcs, [net.source])
    if all(d is not None for d in dist):
        return dist
    # vertices the source cannot reach: any consistent labels, shifted up
    # far enough to respect their arcs into the reachable part
    free, _ = _bellman_ford(net.n, arcs, range(net.n))
    shift = Fraction(0)
    for u, w, wt in arcs:
        if dist[u] is None and dist[w] is not None:
            shift = max(shift, dist[w] - wt - free[u])
    return [d if d is not None else free[v] + shift for v, d in enumerate(dist)]


def sink_potential_range(net: Network, costs, x) -> tuple[Fraction, Fraction]:
    """Smallest and largest ``pi_t - pi_s`` over all certifying potentials."""
    x = [Fraction(v) for v in x]
    arcs = _auxiliary_arcs(net, costs, x)
    to_t, gap = _bellman_ford(net.n, arcs, [net.source])
    if gap > 0:
        raise OracleError("flow is not an equilibrium")
    from_t, _ = _bellman_ford(net.n, arcs, [net.sink])
    return -from_t[net.source], to_t[net.sink]


def support_set(x: Sequence) -> frozenset[int]:
    """Edges with nonzero flow (either sign)."""
    return frozenset(e for e, v in enumerate(x) if v != 0)


# --------------------------------------------------------------------------
# Frank-Wolfe on the Beckmann potential


@dataclass
class _Arcs:
    tail: list[int]
    head: list[int]
    edge: list[int]
    sign: list[int]
    cap: np.ndarray
    starts: np.ndarray  # (arcs, pieces) piece starts, +inf padding
    slopes: np.ndarray
    offsets: np.ndarray


def _arc_pieces(cost: PiecewiseLinearCost, forward: bool):
    """Pieces of y -> l(y) (forward) or y -> -l(-y) (backward) on y >= 0."""
    starts, slopes, offsets = [], [], []
    cap = INF
    if forward:
        for i in range(cost.piece_count):
            lo, hi = cost.piece_bounds(i)
            if cost.capacity and i == cost.piece_count - 1:
                cap = cost.breakpoints[-1]
            if hi <= 0:
                continue
            starts.append(max(lo, 0) if not is_infinite(lo) else 0)
            slopes.append(cost.slopes[i])
            offsets.append(cost.offsets[i])
    else:
        for i in reversed(range(cost.piece_count)):
            lo, hi = cost.piece_bounds(i)
            if lo >= 0:
                continue
            starts.append(max(-hi, 0) if not is_infinite(hi) else 0)
            slopes.append(cost.slopes[i])
            offsets.append(-cost.offsets[i])
    return starts, slopes, offsets, cap


def _build_arcs(net: Network, costs) -> _Arcs:
    rows = []
    for e, (u, w) in enumerate(net.edges):
        rows.append((u, w, e, 1, _arc_pieces(costs[e], True)))
        if not costs[e].directed:
            rows.append((w, u, e, -1, _arc_pieces(costs[e], False)))
    width = max(len(r[4][0]) for r in rows)
    A = len(rows)
    starts = np.full((A, width), np.inf, dtype=FLOAT)
    slopes = np.zeros((A, width), dtype=FLOAT)
    offsets = np.zeros((A, width), dtype=FLOAT)
    cap = np.full(A, np.inf, dtype=FLOAT)
    for k, (_, _, _, _, (st, sl, of, cp)) in enumerate(rows):
        starts[k, : len(st)] = [float(v) for v in st]
        slopes[k, : len(sl)] = [float(v) for v in sl]
        offsets[k, : len(of)] = [float(v) for v in of]
        cap[k] = float(cp) if not is_infinite(cp) else np.inf
    return _Arcs([r[0] for r in rows], [r[1] for r in rows], [r[2] for r in rows], [r[3] for r in rows], cap, starts, slopes, offsets)


def _piece_at(arcs: _Arcs, y: np.ndarray):
    """Slope and offset of the piece containing y (broadcast over leading axes)."""
    idx = (y[..., None] >= arcs.starts).sum(axis=-1) - 1
    idx = np.maximum(idx, 0)
    rows = np.arange(arcs.starts.shape[0])
    return arcs.slopes[rows, idx], arcs.offsets[rows, idx]


def _arc_costs(arcs: _Arcs, y: np.ndarray) -> np.ndarray:
    a, b = _piece_at(arcs, y)
    return a * y + b


def _beckmann(arcs: _Arcs, y: np.ndarray) -> FLOAT:
    total = FLOAT(0)
    for k in range(len(y)):
        yk = y[k]
        for p in range(arcs.starts.shape[1]):
            lo = arcs.starts[k, p]
            if not np.isfinite(lo) or lo >= yk:
                break
            hi = arcs.starts[k, p + 1] if p + 1 < arcs.starts.shape[1] else np.inf
            top = min(hi, yk)
            a, b = arcs.slopes[k, p], arcs.offsets[k, p]
            total += a * (top * top - lo * lo) / 2 + b * (top - lo)
    return total


def _all_or_nothing(net: Network, arcs: _Arcs, cost: np.ndarray, lam: float) -> np.ndarray:
    z = np.zeros(len(arcs.tail), dtype=FLOAT)
    if lam == 0:
        return z
    if np.all(np.isinf(arcs.cap)):
        path = _dijkstra_path(net.n, arcs, cost, net.source, net.sink)
        z[path] = lam
        return z
    return _min_cost_flow(net.n, arcs, cost, net.source, net.sink, lam)


def _dijkstra_path(n, arcs: _Arcs, cost, s, t) -> list[int]:
    out = [[] for _ in range(n)]
    for k, u in enumerate(arcs.tail):
        out[u].append(k)
    dist = [math.inf] * n
    via = [-1] * n
    dist[s] = 0.0
    heap = [(0.0, s)]
    done = [False] * n
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for k in out[u]:
            w = arcs.head[k]
            nd = d + float(cost[k])
            if nd < dist[w]:
                dist[w] = nd
                via[w] = k
                heapq.heappush(heap, (nd, w))
    if via[t] < 0:
        raise OracleError("sink unreachable")
    path = []
    v = t
    while v != s:
        k = via[v]
        path.append(k)
        v = arcs.tail[k]
    return path


def _min_cost_flow(n, arcs: _Arcs, cost, s, t, lam) -> np.ndarray:
    """Successive shortest paths with Bellman-Ford on the residual graph."""
    A = len(arcs.tail)
    z = np.zeros(A, dtype=FLOAT)
    flow_tol = 1e-12 * max(1.0, float(lam))
    finite = np.abs(cost[np.isfinite(cost)])
    cost_tol = 1e-12 * max(1.0, float(np.max(finite)) if finite.size else 1.0)
    remaining = FLOAT(lam)
    while remaining > flow_tol:
        dist = [math.inf] * n
        via: list[Optional[tuple[int, int]]] = [None] * n
        dist[s] = 0.0
        for _ in range(n):
            changed = False
            for k in range(A):
                c = float(cost[k])
                u, w = arcs.tail[k], arcs.head[k]
                if arcs.cap[k] - z[k] > flow_tol and dist[u] + c < dist[w] - cost_tol:
                    dist[w] = dist[u] + c
                    via[w] = (k, 1)
                    changed = True
                if z[k] > flow_tol and dist[w] - c < dist[u] - cost_tol:
                    dist[u] = dist[w] - c
                    via[u] = (k, -1)
                    changed = True
            if not changed:
                break
        if via[t] is None:
            raise OracleError("demand exceeds the network capacity")
        path = []
        seen = {t}
        v = t
        push = remaining
        while v != s:
            k, d = via[v]
            path.append((k, d))
            push = min(push, arcs.cap[k] - z[k] if d > 0 else z[k])
            v = arcs.tail[k] if d > 0 else arcs.head[k]
            if v in seen:
                raise OracleError("residual graph has a negative cycle")
            seen.add(v)
        if push <= 0:
            raise OracleError("no augmenting capacity on the shortest path")
        for k, d in path:
            z[k] += d * push
        remaining -= push
    np.clip(z, 0, None, out=z)
    return z


def _line_search(arcs: _Arcs, y: np.ndarray, d: np.ndarray) -> FLOAT:
    """Exact minimiser of the Beckmann potential on the segment y + theta d."""
    thetas = {FLOAT(0), FLOAT(1)}
    nz = d != 0
    if np.any(nz):
        fin = np.isfinite(arcs.starts)
        T = (arcs.starts - y[:, None]) / np.where(nz, d, 1)[:, None]
        mask = fin & nz[:, None] & (T > 0) & (T < 1)
        thetas.update(T[mask].tolist())
    grid = np.array(sorted(thetas), dtype=FLOAT)
    for lo, hi in zip(grid[:-1], grid[1:]):
        mid = (lo + hi) / 2
        a, b = _piece_at(arcs, y + mid * d)
        A = float(np.sum(d * (a * y + b)))
        B = float(np.sum(a * d * d))
        if A + B * float(lo) >= 0:
            return lo
        if A + B * float(hi) >= 0:
            return FLOAT(-A / B)
    return FLOAT(1)


@dataclass
class OracleResult:
    flow_float: list[float]
    flow: Optional[list[Fraction]]
    potential: Optional[list[Fraction]]
    gap: float
    iterations: int
    confirmed: bool
    objective_history: list[float] = field(default_factory=list, repr=False)
    gap_history: list[float] = field(default_factory=list, repr=False)

    @property
    def best_flow(self) -> list:
        return self.flow if self.flow is not None else self.flow_float


def oracle_tolerance(tol: Optional[float] = None) -> float:
    if tol is not None:
        return tol
    env = os.environ.get(TOLERANCE_ENV)
    return float(env) if env else DEFAULT_TOLERANCE


def equilibrium_at(
    net: Network,
    costs: Sequence[PiecewiseLinearCost],
    lam,
    tol: Optional[float] = None,
    max_iterations: int = 20000,
    confirm: bool = True,
) -> OracleResult:
    """Equilibrium flow for demand ``lam`` by Frank-Wolfe.

    Stops when the relative duality gap is at most ``tol`` or, on networks
    with at most ``EXACT_EDGE_LIMIT`` edges, as soon as an exact segment
    pattern is confirmed.  The reported gap is the best bound seen so far,
    which stays valid for the current iterate because the objective never
    increases under exact line search.
    """
    tol = oracle_tolerance(tol)
    lam_exact = Fraction(lam)
    if lam_exact < 0:
        raise OracleError("demand must be nonnegative")
    arcs = _build_arcs(net, costs)
    lamf = FLOAT(float(lam_exact))
    if lam_exact == 0:
        zero = [Fraction(0)] * net.m
        cert = verify_equilibrium(net, costs, zero)
        return OracleResult([0.0] * net.m, zero, cert.potential, 0.0, 0, cert.is_equilibrium)
    exact_ok = confirm and net.m <= EXACT_EDGE_LIMIT
    y = _all_or_nothing(net, arcs, _arc_costs(arcs, np.zeros(len(arcs.tail), dtype=FLOAT)), lamf)
    best_gap = math.inf
    history, gaps = [], []
    next_check = 8
    it = 0
    for it in range(1, max_iterations + 1):
        cost = _arc_costs(arcs, y)
        z = _all_or_nothing(net, arcs, cost, lamf)
        ty = float(np.sum(cost * y))
        gap_abs = ty - float(np.sum(cost * z))
        rel = gap_abs / ty if ty > 0 else max(gap_abs, 0.0)
        best_gap = min(best_gap, max(rel, 0.0))
        gaps.append(best_gap)
        history.append(float(_beckmann(arcs, y)))
        if best_gap <= tol:
            break
        if exact_ok and it >= next_check:
            next_check *= 2
            found = _confirm(net, costs, arcs, y, cost, lam_exact, best_gap)
            if found is not None:
                flow, pi = found
                return OracleResult([float(v) for v in flow], flow, pi, 0.0, it, True, history, gaps)
        d = z - y
        theta = _line_search(arcs, y, d)
        y = y + theta * d
    flow_f = _edge_flows(net, arcs, y)
    if exact_ok:
        found = _confirm(net, costs, arcs, y, _arc_costs(arcs, y), lam_exact, best_gap)
        if found is not None:
            flow, pi = found
            return OracleResult([float(v) for v in flow], flow, pi, 0.0, it, True, history, gaps)
    if best_gap > tol:
        raise OracleError(f"Frank-Wolfe did not reach gap {tol} in {max_iterations} iterations (gap {best_gap:.3g})")
    return OracleResult([float(v) for v in flow_f], None, None, best_gap, it, False, history, gaps)


def _edge_flows(net: Network, arcs: _Arcs, y: np.ndarray) -> np.ndarray:
    x = np.zeros(net.m, dtype=FLOAT)
    for k, e in enumerate(arcs.edge):
        x[e] += arcs.sign[k] * y[k]
    return x


def _float_potentials(net: Network, arcs: _Arcs, cost: np.ndarray, y: np.ndarray) -> list[float]:
    """Shortest-path labels under current arc costs (backward arcs of used edges included)."""
    dist = [math.inf] * net.n
    dist[net.source] = 0.0
    edges = [(arcs.tail[k], arcs.head[k], float(cost[k])) for k in range(len(cost))]
    edges += [(arcs.head[k], arcs.tail[k], -float(cost[k])) for k in range(len(cost)) if y[k] > 0]
    for _ in range(net.n):
        for u, w, c in edges:
            if dist[u] + c < dist[w] - 1e-12:
                dist[w] = dist[u] + c
    return [d if math.isfinite(d) else 0.0 for d in dist]


def _confirm(net, costs, arcs, y, cost, lam: Fraction, gap: float, max_patterns: int = 256):
    """Guess segments from the float flow and solve the optimality system exactly.

    Candidate segment patterns are tried closest-first.
    """
    x = [float(v) for v in _edge_flows(net, arcs, y)]
    pi = _float_potentials(net, arcs, cost, y)
    scale = 1.0 + float(lam)
    tol = min(0.1, 3.0 * math.sqrt(max(gap, 1e-18)) + 1e-9) * scale
    inverses = [invert_cost(c) for c in costs]
    options = []
    for e in range(net.m):
        scored = []
        for i, seg in enumerate(inverses[e].segments):
            lo = float(seg.flow_lo) if not is_infinite(seg.flow_lo) else -math.inf
            hi = float(seg.flow_hi) if not is_infinite(seg.flow_hi) else math.inf
            scored.append((max(lo - x[e], x[e] - hi, 0.0), i))
        scored.sort()
        options.append([(d, i) for d, i in scored if d <= tol] or [scored[0]])
    free = [Fraction(v).limit_denominator(10**6) for v in x] + [Fraction(p).limit_denominator(10**6) for p in pi[1:]]
    for pattern in itertools.islice(_closest_patterns(options), max_patterns):
        sol = _solve_pattern(net, inverses, pattern, lam, free)
        if sol is None:
            continue
        flow, potential = sol
        cert = verify_equilibrium(net, costs, flow, potential)
        if cert.gap == 0 and cert.demand == lam:
            return flow, potential
    return None


def _closest_patterns(options):
    """Yield one choice per edge in order of increasing total distance.

    ``options[e]`` is a list of ``(distance, segment)`` sorted by distance.
    """
    start = (0,) * len(options)
    heap = [(sum(opt[0][0] for opt in options), start)]
    seen = {start}
    while heap:
        total, idx = heapq.heappop(heap)
        yield tuple(options[e][k][1] for e, k in enumerate(idx))
        for e, k in enumerate(idx):
            if k + 1 < len(options[e]):
                nxt = idx[:e] + (k + 1,) + idx[e + 1 :]
                if nxt not in seen:
                    seen.add(nxt)
                    heapq.heappush(heap, (total - options[e][k][0] + options[e][k + 1][0], nxt))


def _solve_pattern(net, inverses, pattern, lam: Fraction, free):
    m, n = net.m, net.n
    size = m + n - 1
    rows, rhs = [], []
    for e, i in enumerate(pattern):
        seg = inverses[e][i]
        u, w = net.edges[e]
        row = [Fraction(0)] * size
        if seg.kind == FLAT:
            row[e] = Fraction(1)
            rhs.append(seg.flow_lo)
        elif seg.kind == CONSTANT:
            if w:
                row[m + w - 1] += 1
            if u:
                row[m + u - 1] -= 1
            rhs.append(seg.lo)
        else:
            row[e] = Fraction(1)
            if w:
                row[m + w - 1] -= seg.c
            if u:
                row[m + u - 1] += seg.c
            rhs.append(-seg.d)
        rows.append(row)
    dy = net.demand_direction()
    for v in range(1, n):
        row = [Fraction(0)] * size
        for e, (a, b) in enumerate(net.edges):
            if b == v:
                row[e] += 1
            if a == v:
                row[e] -= 1
        rows.append(row)
        rhs.append(lam * dy[v])
    try:
        z = rref_solve(rows, rhs, free)
    except SingularMatrixError:
        return None
    flow = z[:m]
    potential = [Fraction(0)] + z[m:]
    for e, i in enumerate(pattern):
        seg = inverses[e][i]
        u, w = net.edges[e]
        v = potential[w] - potential[u]
        if not (seg.flow_lo <= flow[e] <= seg.flow_hi and seg.lo <= v <= seg.hi):
            return None
    return flow, potential


# --------------------------------------------------------------------------
# direction of the curve from a known equilibrium


@dataclass
class DirectionResult:
    flow: list[Fraction]
    potential: list[Fraction]
    flow_float: list[float]


def _allowed_moves(net: Network, costs, x, pi):
    """Per edge: (slope for increasing or None, slope for decreasing or None)."""
    moves = []
    for e, (u, w) in enumerate(net.edges):
        cost = costs[e]
        val = evaluate_cost(cost, x[e])
        v = pi[w] - pi[u]
        up = down = None
        if not is_infinite(val.right) and v == val.right:
            up = cost.slopes[_piece_index(cost, x[e])]
        if not is_infinite(val.left) and v == val.left:
            k = _piece_index(cost, x[e])
            if x[e] == cost.breakpoints[k] and k > 0:
                k -= 1
            down = cost.slopes[k]
        if (up is not None and up == 0) or (down is not None and down == 0):
            raise OracleError("the direction program needs positive slopes on movable edges")
        moves.append((up, down))
    return moves


def direction_qp(
    net: Network,
    costs: Sequence[PiecewiseLinearCost],
    x_eq: Sequence,
    potential: Optional[Sequence] = None,
) -> DirectionResult:
    """Rate of change of the equilibrium flow when the demand grows.

    Minimises ``sum_e F_e(d_e)`` subject to ``Gamma d = Delta y``, where
    ``F_e`` is ``a+ d^2 / 2`` for increases and ``a- d^2 / 2`` for decreases
    and only moves allowed by the current potential are admitted.  A float
    Newton pass on the dual picks the sign pattern; the pattern is then
    solved and checked in exact arithmetic.
    """
    x = [Fraction(v) for v in x_eq]
    cert = verify_equilibrium(net, costs, x, potential)
    if cert.gap != 0:
        raise OracleError("direction_qp needs an equilibrium flow")
    pi = cert.potential
    moves = _allowed_moves(net, costs, x, pi)
    mu = _dual_newton(net, moves)
    z = [mu[w] - mu[u] for u, w in net.edges]
    span = max([abs(v) for v in z] + [1.0])
    tol = 1e-7 * span
    choices = []
    for (up, down), ze in zip(moves, z):
        opts = []
        if up is not None and ze > -tol:
            opts.append("+")
        if down is not None and ze < tol:
            opts.append("-")
        if abs(ze) <= tol or not opts:
            opts.append("0")
        if not (up is None and down is None) and abs(ze) > tol:
            opts = opts[:1]
        choices.append(opts)
    free = [Fraction(v).limit_denominator(10**9) for v in mu[1:]]
    for pattern in itertools.product(*choices):
        sol = _direction_pattern(net, moves, pattern, free)
        if sol is not None:
            flow, pot = sol
            return DirectionResult(flow, pot, [float(v) for v in flow])
    raise OracleError("no consistent sign pattern for the direction program")


def _direction_pattern(net: Network, moves, pattern, free):
    k = net.n - 1
    cond = []
    for (up, down), p in zip(moves, pattern):
        cond.append(1 / up if p == "+" else 1 / down if p == "-" else Fraction(0))
    L = [[Fraction(0)] * k for _ in range(k)]
    for (u, w), c in zip(net.edges, cond):
        if not c:
            continue
        for a, sa in ((u, -1), (w, 1)):
            for b, sb in ((u, -1), (w, 1)):
                if a and b:
                    L[a - 1][b - 1] += sa * sb * c
    rhs = net.demand_direction()[1:]
    try:
        mu_hat = rref_solve(L, rhs, free)
    except SingularMatrixError:
        return None
    mu = [Fraction(0)] + mu_hat
    flow = []
    for e, ((u, w), c, p) in enumerate(zip(net.edges, cond, pattern)):
        ze = mu[w] - mu[u]
        up, down = moves[e]
        if p == "+" and ze < 0 or p == "-" and ze > 0:
            return None
        if p == "0" and (up is not None and ze > 0 or down is not None and ze < 0):
            return None
        flow.append(c * ze)
    if excess_of(net, flow) != net.demand_direction():
        return None
    return flow, mu


def _dual_newton(net: Network, moves, iterations: int = 100) -> list[float]:
    """Semismooth Newton on the dual of the direction program (floats)."""
    k = net.n - 1
    dy = np.zeros(k)
    dy[-1] = 1.0
    G = np.zeros((net.m, k))
    for e, (u, w) in enumerate(net.edges):
        if u:
            G[e, u - 1] -= 1
        if w:
            G[e, w - 1] += 1
    cu = np.array([1 / float(up) if up is not None else 0.0 for up, _ in moves])
    cd = np.array([1 / float(down) if down is not None else 0.0 for _, down in moves])

    def value(mu):
        z = G @ mu
        return float(np.sum(cu * np.maximum(z, 0) ** 2 + cd * np.minimum(z, 0) ** 2) / 2 - dy @ mu)

    mu = np.zeros(k)
    for _ in range(iterations):
        z = G @ mu
        c = np.where(z > 0, cu, np.where(z < 0, cd, np.maximum(cu, cd)))
        grad = G.T @ (np.where(z > 0, cu, cd) * z) - dy
        if np.linalg.norm(grad) < 1e-13:
            break
        hess = G.T @ (c[:, None] * G) + 1e-12 * np.eye(k)
        step = np.linalg.solve(hess, grad)
        t, f0 = 1.0, value(mu)
        while t > 1e-12 and value(mu - t * step) > f0 - 1e-4 * t * float(grad @ step):
            t /= 2
        mu = mu - t * step
    return [0.0] + mu.tolist()
