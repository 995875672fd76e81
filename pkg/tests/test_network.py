from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from wardrop_homotopy.errors import ValidationError
from wardrop_homotopy.network import build_network, excess_of, incidence_column, potential_difference, reduced_column
from wardrop_homotopy.oracle import verify_equilibrium
from wardrop_homotopy.costs import make_cost
from wardrop_homotopy.rational import NEG_INF

from conftest import fr


def triangle():
    return build_network(3, [(1, 2), (2, 3), (1, 3)], 1, 3)


def test_triangle_incidence():
    net = triangle()
    assert net.m == 3
    assert incidence_column(net, 0) == [-1, 1, 0]
    assert incidence_column(net, 2) == [-1, 0, 1]


def test_single_edge():
    net = build_network(2, [(1, 2)], 1, 2)
    assert net.m == 1
    assert incidence_column(net, 0) == [-1, 1]


def test_source_first_sink_last():
    net = build_network(3, [("a", "t"), ("s", "a")], "s", "t", vertex_labels=["t", "a", "s"])
    assert net.labels == ("s", "a", "t")
    assert net.edges == ((1, 2), (0, 1))


def test_parallel_edges_split_with_dummy():
    net = build_network(3, [(1, 3), (3, 1), (1, 2), (2, 3)], 1, 3)
    assert net.n == 4
    assert net.m == 5
    assert net.edge_ids[:3] == ("e1", "e2#a", "e2#b")
    assert net.halved == (False, True, True, False, False)
    assert net.labels[-1] == "3"
    for e in range(net.m):
        col = incidence_column(net, e)
        assert sorted(col) == [-1] + [0] * (net.n - 2) + [1]


def test_split_edge_matches_unsplit_oracle():
    # Two parallel s-t links with costs x and 2x; the second is split into two
    # halves costing x each.  Demand 3 splits 2 : 1, as on the unsplit pair.
    net = build_network(2, [(1, 2), (1, 2)], 1, 2)
    one = make_cost([NEG_INF], [1], [0])
    two_half = make_cost([NEG_INF], [1], [0])
    costs = [one, two_half, two_half]
    cert = verify_equilibrium(net, costs, fr(2, 1, 1))
    assert cert.gap == 0 and cert.demand == 3
    assert verify_equilibrium(net, costs, fr(1, 2, 2)).gap > 0


@pytest.mark.parametrize(
    "args",
    [
        (1, [], 1, 1),
        (3, [(1, 2), (2, 3)], 1, 1),
        (3, [(1, 1), (1, 3)], 1, 3),
        (4, [(1, 2), (3, 4)], 1, 4),
        (3, [(1, 2), (2, 4)], 1, 3),
    ],
)
def test_invalid_networks(args):
    with pytest.raises(ValidationError):
        build_network(*args)


def test_excess_examples():
    net = triangle()
    assert excess_of(net, fr(1, 1, 1)) == fr(-2, 0, 2)
    assert excess_of(net, fr(0, 0, 0)) == fr(0, 0, 0)
    dy = net.demand_direction()
    assert excess_of(net, fr(1, 1, 1)) == [2 * v for v in dy]


def test_reduced_column_and_potential_difference():
    net = triangle()
    assert reduced_column(net, 0) == [1, 0]
    assert potential_difference(net, 2, fr(0, 1, 2)) == 2


def test_bad_edge_index():
    with pytest.raises(IndexError):
        incidence_column(triangle(), 3)


pairs = st.lists(st.tuples(st.integers(1, 5), st.integers(1, 5)).filter(lambda p: p[0] != p[1]), min_size=4, max_size=12)


@given(pairs, st.lists(st.fractions(min_value=-5, max_value=5), min_size=12, max_size=12))
def test_excess_sums_to_zero(edge_list, values):
    edge_list = [(1, 2), (2, 3), (3, 4), (4, 5)] + edge_list
    net = build_network(5, edge_list, 1, 5)
    x = values[: net.m] + [Fraction(0)] * max(0, net.m - len(values))
    assert sum(excess_of(net, x)) == 0


@given(pairs)
def test_columns_pairwise_independent(edge_list):
    edge_list = [(1, 2), (2, 3), (3, 4), (4, 5)] + edge_list
    net = build_network(5, edge_list, 1, 5)
    cols = [tuple(incidence_column(net, e)) for e in range(net.m)]
    for i in range(len(cols)):
        assert cols[i].count(1) == 1 and cols[i].count(-1) == 1
        for j in range(i + 1, len(cols)):
            neg = tuple(-v for v in cols[j])
            assert cols[i] != cols[j] and cols[i] != neg
