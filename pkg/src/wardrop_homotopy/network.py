"""Graph model: vertices, oriented edges and incidence algebra.

Vertices are renumbered internally so that the source is vertex 0 and the
sink is vertex ``n - 1``.  Edge ``e`` has incidence column ``gamma_e`` with
-1 at its tail and +1 at its head.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Sequence

from .errors import ValidationError


@dataclass(frozen=True)
class Network:
    n: int
    edges: tuple[tuple[int, int], ...]
    labels: tuple[str, ...]
    edge_ids: tuple[str, ...]
    # origin[e] is the index of the user edge that internal edge e came from
    origin: tuple[int, ...]
    # True for both halves of a split parallel edge
    halved: tuple[bool, ...]

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def source(self) -> int:
        return 0

    @property
    def sink(self) -> int:
        return self.n - 1

    def tail(self, e: int) -> int:
        return self.edges[e][0]

    def head(self, e: int) -> int:
        return self.edges[e][1]

    def vertex_index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown vertex {label!r}") from None

    def edge_index(self, edge_id: str) -> int:
        try:
            return self.edge_ids.index(edge_id)
        except ValueError:
            raise KeyError(f"unknown edge {edge_id!r}") from None

    def demand_direction(self) -> list[Fraction]:
        """Unit s-t excess direction: -1 at the source, +1 at the sink."""
        dy = [Fraction(0)] * self.n
        dy[self.source] = Fraction(-1)
        dy[self.sink] = Fraction(1)
        return dy


def build_network(
    vertex_count: int,
    edge_list: Sequence[tuple[Hashable, Hashable]],
    source: Hashable,
    sink: Hashable,
    vertex_labels: Sequence[str] | None = None,
    edge_ids: Sequence[str] | None = None,
) -> Network:
    """Validate a graph and renumber it so that s comes first and t last.

    Vertices are given either as 1-based integers (when ``vertex_labels`` is
    omitted) or as labels.  A second edge between an already connected
    vertex pair (in either orientation) is split by a dummy vertex; both
    halves are flagged in ``Network.halved`` so that callers halve the cost.
    """
    if vertex_count < 2:
        raise ValidationError("a network needs at least two vertices")
    if vertex_labels is None:
        vertex_labels = [str(i) for i in range(1, vertex_count + 1)]
        resolve = _int_resolver(vertex_count)
    else:
        if len(vertex_labels) != vertex_count:
            raise ValidationError("vertex label count does not match vertex_count")
        if len(set(vertex_labels)) != vertex_count:
            raise ValidationError("duplicate vertex labels")
        resolve = _label_resolver(vertex_labels)
    if edge_ids is None:
        edge_ids = [f"e{i + 1}" for i in range(len(edge_list))]
    if len(edge_ids) != len(edge_list):
        raise ValidationError("edge id count does not match edge count")
    if len(set(edge_ids)) != len(edge_ids):
        raise ValidationError("duplicate edge ids")

    s = resolve(source)
    t = resolve(sink)
    if s == t:
        raise ValidationError("source and sink must differ")

    order = [s] + [v for v in range(vertex_count) if v not in (s, t)]
    raw_edges = []
    for k, (u, w) in enumerate(edge_list):
        a, b = resolve(u), resolve(w)
        if a == b:
            raise ValidationError(f"edge {edge_ids[k]!r} is a self-loop")
        raw_edges.append((a, b))

    labels = [vertex_labels[v] for v in order]
    seen: set[frozenset[int]] = set()
    split: list[bool] = []
    for a, b in raw_edges:
        key = frozenset((a, b))
        split.append(key in seen)
        seen.add(key)
    dummies = [f"{edge_ids[k]}#mid" for k in range(len(raw_edges)) if split[k]]
    for d in dummies:
        if d in labels or d == vertex_labels[t]:
            raise ValidationError(f"dummy vertex label {d!r} clashes with a user label")
    labels += dummies + [vertex_labels[t]]
    position = {v: i for i, v in enumerate(order)}
    position[t] = len(labels) - 1
    n = len(labels)

    edges: list[tuple[int, int]] = []
    ids: list[str] = []
    origin: list[int] = []
    halved: list[bool] = []
    next_dummy = len(order)
    for k, (a, b) in enumerate(raw_edges):
        u, w = position[a], position[b]
        if split[k]:
            mid = next_dummy
            next_dummy += 1
            edges += [(u, mid), (mid, w)]
            ids += [f"{edge_ids[k]}#a", f"{edge_ids[k]}#b"]
            origin += [k, k]
            halved += [True, True]
        else:
            edges.append((u, w))
            ids.append(str(edge_ids[k]))
            origin.append(k)
            halved.append(False)

    net = Network(n, tuple(edges), tuple(labels), tuple(ids), tuple(origin), tuple(halved))
    if not _weakly_connected(net):
        raise ValidationError("the network is not connected")
    return net


def _int_resolver(count: int):
    def resolve(v):
        if isinstance(v, bool) or not isinstance(v, int):
            raise ValidationError(f"vertex {v!r} is not an integer index")
        if not 1 <= v <= count:
            raise ValidationError(f"vertex {v} out of range 1..{count}")
        return v - 1

    return resolve


def _label_resolver(labels: Sequence[str]):
    index = {label: i for i, label in enumerate(labels)}

    def resolve(v):
        if v not in index:
            raise ValidationError(f"unknown vertex {v!r}")
        return index[v]

    return resolve


def _weakly_connected(net: Network) -> bool:
    parent = list(range(net.n))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for u, w in net.edges:
        parent[find(u)] = find(w)
    root = find(0)
    return all(find(v) == root for v in range(net.n))


def incidence_column(net: Network, e: int) -> list[int]:
    if not 0 <= e < net.m:
        raise IndexError(f"edge index {e} out of range")
    col = [0] * net.n
    u, w = net.edges[e]
    col[u] = -1
    col[w] = 1
    return col


def reduced_column(net: Network, e: int) -> list[int]:
    """Incidence column with the source row removed."""
    return incidence_column(net, e)[1:]


def potential_difference(net: Network, e: int, pi: Sequence) -> Fraction:
    u, w = net.edges[e]
    return pi[w] - pi[u]


def excess_of(net: Network, x: Sequence) -> list[Fraction]:
    """Net inflow y = Gamma x at every vertex."""
    if len(x) != net.m:
        raise ValueError(f"flow has length {len(x)}, expected {net.m}")
    y = [Fraction(0)] * net.n
    for (u, w), xe in zip(net.edges, x):
        y[u] -= xe
        y[w] += xe
    return y
