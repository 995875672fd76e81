"""Instance bundles, the nested Braess family and small worked examples."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .costs import PiecewiseLinearCost, halve, make_cost, validate_cost
from .errors import ValidationError
from .network import Network, build_network
from .rational import INF, NEG_INF, Ext, is_infinite


@dataclass(frozen=True)
class EdgeSpec:
    id: str
    tail: str
    head: str
    cost: PiecewiseLinearCost


@dataclass(frozen=True)
class Instance:
    """A validated network with one cost per internal edge.

    ``edges`` keeps the user-level description (used for serialization);
    ``costs`` is aligned with ``network.edges`` after parallel-edge
    splitting.
    """

    network: Network
    costs: tuple[PiecewiseLinearCost, ...]
    vertices: tuple[str, ...]
    source: str
    sink: str
    edges: tuple[EdgeSpec, ...]
    mode: str = "undirected"
    constant_costs: bool = False
    name: str = ""
    note: str = ""


def make_instance(
    vertices: Sequence[str],
    source: str,
    sink: str,
    edges: Sequence[EdgeSpec],
    mode: str = "undirected",
    constant_costs: bool = False,
    name: str = "",
    note: str = "",
) -> Instance:
    if mode not in ("directed", "undirected"):
        raise ValidationError(f"unknown mode {mode!r}")
    for spec in edges:
        validate_cost(spec.cost, allow_constant=constant_costs)
        if mode == "directed" and not spec.cost.directed:
            raise ValidationError(f"edge {spec.id!r} is two-way in a directed instance")
    net = build_network(
        len(vertices),
        [(spec.tail, spec.head) for spec in edges],
        source,
        sink,
        vertex_labels=list(vertices),
        edge_ids=[spec.id for spec in edges],
    )
    costs = tuple(halve(edges[k].cost) if net.halved[i] else edges[k].cost for i, k in enumerate(net.origin))
    return Instance(net, costs, tuple(vertices), source, sink, tuple(edges), mode, constant_costs, name, note)


def _cost(breakpoints, slopes, offsets, capacity=False, allow_constant=False) -> PiecewiseLinearCost:
    directed = breakpoints[0] == 0
    return make_cost(breakpoints, slopes, offsets, directed=directed, capacity=capacity, allow_constant=allow_constant)


def _triangle(costs, name: str, constant_costs: bool = False, note: str = "") -> Instance:
    """Vertices s, v, t with e1 = (s, v), e2 = (v, t), e3 = (s, t)."""
    ends = [("s", "v"), ("v", "t"), ("s", "t")]
    specs = [EdgeSpec(f"e{k + 1}", a, b, c) for k, ((a, b), c) in enumerate(zip(ends, costs))]
    return make_instance(["s", "v", "t"], "s", "t", specs, "undirected", constant_costs, name, note)


def ex_simple_undirected() -> Instance:
    F = Fraction
    return _triangle(
        [
            _cost([NEG_INF, F(1)], [1, 2], [0, -1]),
            _cost([NEG_INF, F(2)], [1, 2], [0, -2]),
            _cost([NEG_INF, F(2)], [2, 1], [0, 2]),
        ],
        "ex_simple_undirected",
        note="continuous two-piece costs on a triangle",
    )


def ex_lexicographic() -> Instance:
    F = Fraction
    return _triangle(
        [
            _cost([NEG_INF, F(1)], [1, 5], [0, -4]),
            _cost([NEG_INF, F(1)], [1, 7], [0, -6]),
            _cost([NEG_INF, F(2)], [1, 12], [0, -22]),
        ],
        "ex_lexicographic",
        note="all three edges reach a breakpoint at demand 3",
    )


def ex_ambiguous() -> Instance:
    F = Fraction
    return _triangle(
        [
            _cost([NEG_INF], [1], [0]),
            _cost([F(0), F(1), F(2)], [1, 1], [0, 2], capacity=True),
            _cost([NEG_INF, F(3, 2)], [2, 2], [0, 2]),
        ],
        "ex_ambiguous",
        note="e2 is one-way with capacity 2; e2 and e3 have jumps",
    )


def fig1_regions() -> Instance:
    F = Fraction
    return _triangle(
        [
            _cost([NEG_INF, F(2)], [1, 4], [0, -6]),
            _cost([NEG_INF, F(1)], [1, F(1, 2)], [0, F(1, 2)]),
            _cost([NEG_INF, F(1)], [1, F(1, 4)], [0, F(3, 4)]),
        ],
        "fig1_regions",
        note="continuous costs with breakpoints 2, 1, 1",
    )


def fig_degenerate_region(alpha: Ext = INF) -> Instance:
    """Triangle whose edge e2 = (v, t) has a middle piece of slope 1/alpha.

    ``alpha = inf`` makes the middle piece constant and needs the
    constant-cost extension.
    """
    F = Fraction
    if is_infinite(alpha):
        mid_slope, mid_off, last_off, constant = F(0), F(1), F(-2), True
    else:
        alpha = F(alpha)
        if alpha <= 0:
            raise ValidationError("alpha must be positive")
        mid_slope, mid_off, last_off, constant = 1 / alpha, (alpha - 1) / alpha, (2 - 2 * alpha) / alpha, False
    e2 = _cost([NEG_INF, F(1), F(3)], [1, mid_slope, 1], [0, mid_off, last_off], allow_constant=constant)
    ident = _cost([NEG_INF], [1], [0])
    return _triangle([ident, e2, ident], f"fig_degenerate_region({alpha})", constant, "middle piece of e2 flattens as alpha grows")


EXAMPLES = {
    "ex_simple_undirected": ex_simple_undirected,
    "ex_lexicographic": ex_lexicographic,
    "ex_ambiguous": ex_ambiguous,
    "fig1_regions": fig1_regions,
    "fig_degenerate_region": fig_degenerate_region,
}


def paper_example(name: str) -> Instance:
    """Worked example by name; ``fig_degenerate_region(alpha)`` takes a parameter."""
    name = name.strip()
    if name.startswith("fig_degenerate_region"):
        arg = name[len("fig_degenerate_region"):].strip()
        if not arg:
            return fig_degenerate_region()
        if not (arg.startswith("(") and arg.endswith(")")):
            raise KeyError(f"unknown example {name!r}")
        from .rational import parse_rational

        return fig_degenerate_region(parse_rational(arg[1:-1]))
    if name not in EXAMPLES:
        raise KeyError(f"unknown example {name!r}; choose from {', '.join(EXAMPLES)}")
    return EXAMPLES[name]()


DEFAULT_BRAESS_EPSILON = Fraction(1, 10**6)


def nested_braess(j: int, epsilon: Optional[Fraction] = DEFAULT_BRAESS_EPSILON) -> Instance:
    """The j-th nested Braess network: 2j + 2 vertices, 4j + 1 one-way edges.

    Vertices are ``s = v0, v1, ..., v2j, t = v(2j+1)``.  The path edges
    ``(v_i, v_{i+1})`` with ``i != j`` cost x.  The middle edge
    ``(v_j, v_{j+1})`` and the shortcuts ``(v_i, v_{2j-i})`` and
    ``(v_{i+1}, v_{2j+1-i})`` (for ``i < j``) have slope ``epsilon``; the
    shortcuts carry offset ``10**(j-1-i)``.  ``epsilon=None`` uses exact
    zero slopes and turns on the constant-cost extension.
    """
    if not isinstance(j, int) or j < 1:
        raise ValidationError("j must be a positive integer")
    constant = epsilon is None
    eps = Fraction(0) if constant else Fraction(epsilon)
    if not constant and eps <= 0:
        raise ValidationError("epsilon must be positive")
    labels = ["s"] + [f"v{i}" for i in range(1, 2 * j + 1)] + ["t"]

    def edge(a: int, b: int, slope, offset) -> EdgeSpec:
        cost = make_cost([Fraction(0)], [slope], [offset], directed=True, allow_constant=constant)
        return EdgeSpec(f"{labels[a]}-{labels[b]}", labels[a], labels[b], cost)

    edges = []
    for i in range(2 * j + 1):
        if i == j:
            edges.append(edge(i, i + 1, eps, 0))
        else:
            edges.append(edge(i, i + 1, 1, 0))
    for i in range(j):
        edges.append(edge(i, 2 * j - i, eps, 10 ** (j - 1 - i)))
    for i in range(j):
        edges.append(edge(i + 1, 2 * j + 1 - i, eps, 10 ** (j - 1 - i)))
    return make_instance(
        labels,
        "s",
        "t",
        edges,
        "directed",
        constant,
        f"nested_braess({j})",
        "zero slopes" if constant else f"slope {eps} on the non-path edges",
    )


# --------------------------------------------------------------------------
# random small instances for property tests

_SLOPES = [Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2), Fraction(3)]


def _half_steps(rng, lo: int, hi: int) -> Fraction:
    return Fraction(rng.randint(2 * lo, 2 * hi), 2)


def _propagate(bps, slopes, anchor: int, value: Fraction, rng, jump_rate: float) -> list[Fraction]:
    """Offsets so piece ``anchor`` passes through ``value`` at its left end.

    Moving away from the anchor, each breakpoint gets a jump with
    probability ``jump_rate``.
    """
    k = len(slopes)
    offsets: list[Optional[Fraction]] = [None] * k
    start = bps[anchor] if not is_infinite(bps[anchor]) else Fraction(0)
    offsets[anchor] = value - slopes[anchor] * start
    for i in range(anchor + 1, k):
        left = slopes[i - 1] * bps[i] + offsets[i - 1]
        jump = Fraction(rng.randint(1, 2)) if rng.random() < jump_rate else Fraction(0)
        offsets[i] = left + jump - slopes[i] * bps[i]
    for i in range(anchor - 1, -1, -1):
        right = slopes[i + 1] * bps[i + 1] + offsets[i + 1]
        jump = Fraction(rng.randint(1, 2)) if rng.random() < jump_rate else Fraction(0)
        offsets[i] = right - jump - slopes[i] * bps[i + 1]
    return offsets


def random_cost(
    rng,
    directed: bool,
    max_breakpoints: int = 3,
    jump_rate: float = 0.15,
    capacity_rate: float = 0.05,
    zero_slope_rate: float = 0.0,
) -> PiecewiseLinearCost:
    """Random cost with at most ``max_breakpoints`` breakpoints.

    Slopes are positive except that a piece is flat with probability
    ``zero_slope_rate`` (which needs the constant-cost extension).
    """

    def slope():
        return Fraction(0) if rng.random() < zero_slope_rate else rng.choice(_SLOPES)

    allow = zero_slope_rate > 0
    count = rng.randint(1, max_breakpoints)
    if directed:
        inner = sorted({_half_steps(rng, 1, 8) for _ in range(count - 1)})
        bps = [Fraction(0)] + inner
        capacity = len(bps) >= 2 and rng.random() < capacity_rate
        pieces = len(bps) - 1 if capacity else len(bps)
        slopes = [slope() for _ in range(pieces)]
        start = Fraction(rng.randint(0, 3)) if rng.random() < 0.5 else Fraction(0)
        offsets = _propagate(bps, slopes, 0, start, rng, jump_rate)
        return make_cost(bps, slopes, offsets, directed=True, capacity=capacity, allow_constant=allow)
    inner = sorted({_half_steps(rng, -4, 6) for _ in range(count - 1)})
    bps = [NEG_INF] + inner
    slopes = [slope() for _ in range(len(bps))]
    if 0 in inner:
        anchor = bps.index(Fraction(0))
        # a jump at zero: left limit <= 0 <= right limit
        value = Fraction(rng.randint(0, 2))
        offsets = _propagate(bps, slopes, anchor, value, rng, jump_rate)
        left = slopes[anchor - 1] * 0 + offsets[anchor - 1]
        if left > 0:
            shift = left
            offsets = [b - shift if i < anchor else b for i, b in enumerate(offsets)]
        return make_cost(bps, slopes, offsets, allow_constant=allow)
    anchor = max(i for i, b in enumerate(bps) if is_infinite(b) or b < 0)
    # the piece containing zero passes through the origin
    offsets = _propagate(bps, slopes, anchor, Fraction(0), rng, jump_rate)
    shift = offsets[anchor]
    offsets = [b - shift for b in offsets]
    return make_cost(bps, slopes, offsets, allow_constant=allow)


def random_instance(
    rng,
    max_vertices: int = 6,
    max_edges: int = 10,
    max_breakpoints: int = 3,
    mode: str = "undirected",
    jump_rate: float = 0.15,
    capacity_rate: float = 0.05,
    zero_slope_rate: float = 0.0,
) -> Instance:
    """Small random connected instance; ``rng`` is a ``random.Random``.

    A spanning tree oriented away from the source keeps every vertex
    reachable.  In ``undirected`` mode edges are two-way or one-way at
    random; in ``directed`` mode all are one-way.  No parallel edges.
    Zero-slope pieces appear only on tree edges, which keeps the
    equilibrium potentials unique.
    """
    n = rng.randint(2, max_vertices)
    labels = ["s"] + [f"v{i}" for i in range(1, n - 1)] + ["t"]
    pairs: list[tuple[int, int]] = []
    order = [0] + rng.sample(range(1, n), n - 1)
    for k in range(1, n):
        pairs.append((order[rng.randrange(k)], order[k]))
    seen = {frozenset(p) for p in pairs}
    budget = rng.randint(n - 1, max(n - 1, max_edges))
    tries = 0
    while len(pairs) < budget and tries < 100:
        tries += 1
        a, b = rng.sample(range(n), 2)
        if frozenset((a, b)) in seen:
            continue
        seen.add(frozenset((a, b)))
        pairs.append((a, b))
    specs = []
    for k, (a, b) in enumerate(pairs):
        directed = mode == "directed" or rng.random() < 0.4
        # zero slopes only on tree edges, so constant segments never close a cycle
        zero_rate = zero_slope_rate if k < n - 1 else 0.0
        cost = random_cost(rng, directed, max_breakpoints, jump_rate, capacity_rate, zero_rate)
        specs.append(EdgeSpec(f"e{k + 1}", labels[a], labels[b], cost))
    return make_instance(labels, "s", "t", specs, mode, zero_slope_rate > 0, "random", f"{n} vertices, {len(specs)} edges")
