import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wardrop_homotopy.costs import invert_cost, make_cost
from wardrop_homotopy.errors import SingularMatrixError
from wardrop_homotopy.instances import ex_ambiguous, ex_simple_undirected, nested_braess
from wardrop_homotopy.linalg import (
    active_components,
    component_sets,
    conductance_matrix,
    dot,
    identity,
    invert_spd,
    mat_mul,
    mat_vec,
    reduced_laplacian,
    rref_solve,
    sherman_morrison_limit,
    sherman_morrison_update,
)
from wardrop_homotopy.network import build_network, incidence_column, reduced_column
from wardrop_homotopy.rational import NEG_INF

F = Fraction


def inverses(inst):
    return [invert_cost(c) for c in inst.costs]


def random_spd(rng, k):
    B = [[F(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(k)] for _ in range(k)]
    A = [[sum(B[r][i] * B[r][j] for r in range(k)) for j in range(k)] for i in range(k)]
    for i in range(k):
        A[i][i] += F(1, rng.randint(1, 4))
    return A


def rank(M):
    M = [row[:] for row in M]
    r = 0
    for c in range(len(M[0]) if M else 0):
        piv = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c] / M[r][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        r += 1
    return r


def full_laplacian(net, cs):
    L = [[F(0)] * net.n for _ in range(net.n)]
    for e in range(net.m):
        g = incidence_column(net, e)
        for i in range(net.n):
            for j in range(net.n):
                L[i][j] += cs[e] * g[i] * g[j]
    return L


def test_conductances_example_five_start():
    inst = ex_simple_undirected()
    cs, ds = conductance_matrix(inst.network, inverses(inst), [0, 0, 0])
    assert cs == [1, 1, F(1, 2)] and ds == [0, 0, 0]
    cs, _ = conductance_matrix(inst.network, inverses(inst), [1, 0, 1])
    assert cs == [F(1, 2), 1, 1]


def test_conductances_ambiguous_cut():
    inst = ex_ambiguous()
    cs, _ = conductance_matrix(inst.network, inverses(inst), [0, 2, 1])
    assert cs == [1, 0, 0]


def test_conductances_unit_slopes():
    net = build_network(2, [(1, 2)], 1, 2)
    cs, ds = conductance_matrix(net, [invert_cost(make_cost([NEG_INF, 1], [1, 1], [0, 2]))], [2])
    assert cs == [1] and ds == [2]


def test_reduced_laplacians():
    net = ex_simple_undirected().network
    L = reduced_laplacian(net, [F(1), F(1), F(1, 2)])
    assert L == [[2, -1], [-1, F(3, 2)]]
    assert invert_spd(L) == [[F(3, 4), F(1, 2)], [F(1, 2), 1]]
    assert reduced_laplacian(build_network(2, [(1, 2)], 1, 2), [F(1)]) == [[1]]
    assert invert_spd([[F(1)]]) == [[1]]


def test_ambiguous_laplacian_is_singular():
    L = reduced_laplacian(ex_ambiguous().network, [F(1), F(0), F(0)])
    assert L == [[1, 0], [0, 0]]
    with pytest.raises(SingularMatrixError):
        invert_spd(L)


def test_sherman_morrison_example_step():
    H = [[F(3, 4), F(1, 2)], [F(1, 2), F(1)]]
    assert sherman_morrison_update(H, [1, 0], F(-1, 2)) == [[F(6, 5), F(4, 5)], [F(4, 5), F(6, 5)]]
    assert sherman_morrison_update(H, [1, 0], 0) == H


def test_sherman_morrison_singular_update():
    with pytest.raises(SingularMatrixError):
        sherman_morrison_update([[F(1)]], [1], -1)


def test_limit_needs_nonzero_quadratic_form():
    with pytest.raises(SingularMatrixError):
        sherman_morrison_limit([[F(1), F(0)], [F(0), F(1)]], [0, 0])


def test_active_components_ambiguous():
    net = ex_ambiguous().network
    comp = active_components(net, [F(1), F(0), F(0)])
    assert [sorted(net.labels[v] for v in c) for c in component_sets(comp)] == [["s", "v"], ["t"]]
    assert len(component_sets(active_components(net, [F(1)] * 3))) == 1


def test_active_components_braess_middle_inactive():
    net = nested_braess(1).network
    cs = [F(0) if net.edges[e] == (1, 2) else F(1) for e in range(net.m)]
    # independent depth-first search over the active edges
    adj = {v: set() for v in range(net.n)}
    for e, (u, w) in enumerate(net.edges):
        if cs[e]:
            adj[u].add(w)
            adj[w].add(u)
    seen, stack = {0}, [0]
    while stack:
        for w in adj[stack.pop()] - seen:
            seen.add(w)
            stack.append(w)
    comp = active_components(net, cs)
    assert {v for v in range(net.n) if comp[v] == comp[0]} == seen == set(range(net.n))
    assert active_components(net, [None] + [F(0)] * (net.m - 1))[:2] == [0, 0]


def test_rref_solve():
    assert rref_solve([[2, 1], [1, 3]], [3, 4]) == [1, 1]
    assert rref_solve([[1, 1]], [2], free_values=[0, 5]) == [-3, 5]
    with pytest.raises(SingularMatrixError):
        rref_solve([[1, 1], [2, 2]], [1, 3])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9), st.integers(1, 5))
def test_inverse_and_updates_are_exact(seed, k):
    rng = random.Random(seed)
    A = random_spd(rng, k)
    H = invert_spd(A)
    assert mat_mul(H, A) == identity(k)
    g = [F(rng.randint(-2, 2)) for _ in range(k)]
    dc = F(rng.randint(0, 6), rng.randint(1, 3))
    A2 = [[A[i][j] + dc * g[i] * g[j] for j in range(k)] for i in range(k)]
    assert mat_mul(sherman_morrison_update(H, g, dc), A2) == identity(k)
    # two updates on one vector add up
    dc2 = F(rng.randint(0, 6), rng.randint(1, 3))
    twice = sherman_morrison_update(sherman_morrison_update(H, g, dc), g, dc2)
    assert twice == sherman_morrison_update(H, g, dc + dc2)
    if any(g):
        lim = sherman_morrison_limit(H, g)
        assert mat_vec(lim, g) == [0] * k
        assert dot(g, mat_vec(lim, g)) == 0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9))
def test_limit_commutes_with_update(seed):
    rng = random.Random(seed)
    H = invert_spd(random_spd(rng, 3))
    g1 = [F(rng.randint(-2, 2)) for _ in range(3)]
    g2 = [F(rng.randint(-2, 2)) for _ in range(3)]
    if not any(g1) or not any(g2):
        return
    alpha = F(rng.randint(1, 9))
    try:
        a = sherman_morrison_limit(sherman_morrison_update(H, g2, alpha), g1)
        b = sherman_morrison_update(sherman_morrison_limit(H, g1), g2, alpha)
    except SingularMatrixError:
        return
    assert a == b


def random_graph(rng, n, extra):
    edges = [(rng.randint(1, v - 1), v) for v in range(2, n + 1)]
    pairs = {frozenset(p) for p in edges}
    for _ in range(extra):
        a, b = rng.sample(range(1, n + 1), 2)
        if frozenset((a, b)) not in pairs:
            pairs.add(frozenset((a, b)))
            edges.append((a, b))
    return build_network(n, edges, 1, n)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9), st.integers(2, 7), st.integers(0, 6))
def test_laplacian_properties(seed, n, extra):
    rng = random.Random(seed)
    net = random_graph(rng, n, extra)
    cs = [F(rng.choice([0, 0, 1, 2, 3]), rng.randint(1, 3)) for _ in range(net.m)]
    L = full_laplacian(net, cs)
    assert all(sum(row) == 0 for row in L)
    assert all(sum(L[i][j] for i in range(net.n)) == 0 for j in range(net.n))
    comps = component_sets(active_components(net, cs))
    assert rank(L) == net.n - len(comps)
    assert reduced_laplacian(net, cs) == [row[1:] for row in L[1:]]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9), st.integers(2, 7), st.integers(0, 6))
def test_inverse_positive_and_effective_resistance(seed, n, extra):
    rng = random.Random(seed)
    net = random_graph(rng, n, extra)
    cs = [F(rng.randint(1, 4), rng.randint(1, 3)) for _ in range(net.m)]
    H = invert_spd(reduced_laplacian(net, cs))
    k = net.n - 1
    assert all(H[i][j] == H[j][i] and H[i][j] >= 0 for i in range(k) for j in range(k))
    assert all(H[i][i] > 0 for i in range(k))
    tree = extra == 0
    for e in range(net.m):
        g = reduced_column(net, e)
        r = dot(g, mat_vec(H, g))
        assert r <= 1 / cs[e]
        if tree:
            assert r == 1 / cs[e]
