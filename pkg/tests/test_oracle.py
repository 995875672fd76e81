import random
from fractions import Fraction

import pytest

from wardrop_homotopy import nested_braess, run
from wardrop_homotopy.costs import make_cost
from wardrop_homotopy.errors import OracleError
from wardrop_homotopy.instances import ex_ambiguous, ex_simple_undirected, random_instance
from wardrop_homotopy.network import build_network
from wardrop_homotopy.oracle import (
    direction_qp,
    equilibrium_at,
    oracle_tolerance,
    sink_potential_range,
    support_set,
    verify_equilibrium,
)
from wardrop_homotopy.rational import NEG_INF

from conftest import fr

F = Fraction


def example_five():
    inst = ex_simple_undirected()
    return inst.network, inst.costs


def test_verify_example_five():
    net, costs = example_five()
    cert = verify_equilibrium(net, costs, fr(1, 1, 1))
    assert cert.gap == 0 and cert.potential == fr(0, 1, 2) and cert.demand == 2
    assert cert.is_equilibrium
    assert verify_equilibrium(net, costs, fr(0, 0, 0)).gap == 0


def test_verify_rejects_one_route_flow():
    net, costs = example_five()
    # the top route then costs 1 + 2 = 3 against 2 on the bottom edge
    cert = verify_equilibrium(net, costs, fr(2, 2, 0))
    assert cert.gap == 3 and not cert.is_equilibrium


def test_verify_with_potential():
    net, costs = example_five()
    assert verify_equilibrium(net, costs, fr(1, 1, 1), fr(0, 1, 2)).gap == 0
    assert verify_equilibrium(net, costs, fr(1, 1, 1), fr(0, 1, 3)).gap == 1


def test_verify_input_errors():
    net, costs = example_five()
    with pytest.raises(OracleError):
        verify_equilibrium(net, costs, fr(1, 0, 0))
    with pytest.raises(ValueError):
        verify_equilibrium(net, costs, fr(1, 1))
    amb = ex_ambiguous()
    with pytest.raises(OracleError):
        verify_equilibrium(amb.network, amb.costs, fr(0, 3, 3))


def test_sink_potential_range_on_flat_segment():
    amb = ex_ambiguous()
    assert sink_potential_range(amb.network, amb.costs, fr(1, 1, F(3, 2))) == (3, 4)
    net, costs = example_five()
    assert sink_potential_range(net, costs, fr(1, 1, 1)) == (2, 2)


def test_equilibrium_at_examples():
    net, costs = example_five()
    res = equilibrium_at(net, costs, 5)
    assert res.confirmed and res.flow == fr(2, 2, 3)
    assert max(abs(a - b) for a, b in zip(res.flow_float, [2, 2, 3])) < 1e-8
    assert equilibrium_at(net, costs, F(7, 2)).flow == fr(F(8, 5), F(8, 5), F(19, 10))
    zero = equilibrium_at(net, costs, 0)
    assert zero.flow == fr(0, 0, 0) and zero.iterations == 0


def test_equilibrium_float_path_without_confirmation():
    net, costs = example_five()
    res = equilibrium_at(net, costs, 5, tol=1e-10, confirm=False)
    assert res.flow is None and not res.confirmed
    assert max(abs(a - b) for a, b in zip(res.flow_float, [2, 2, 3])) < 1e-4
    gaps = res.gap_history
    assert all(b <= a for a, b in zip(gaps, gaps[1:]))


def test_equilibrium_budget_failure():
    B = nested_braess(2)
    with pytest.raises(OracleError):
        equilibrium_at(B.network, B.costs, 4, tol=1e-30, max_iterations=3, confirm=False)
    with pytest.raises(OracleError):
        equilibrium_at(B.network, B.costs, -1)


def test_tolerance_environment(monkeypatch):
    monkeypatch.setenv("WARDROP_ORACLE_TOL", "1e-5")
    assert oracle_tolerance() == 1e-5
    assert oracle_tolerance(1e-3) == 1e-3


def test_braess_inner_path_at_unit_demand():
    B = nested_braess(1, None)
    res = equilibrium_at(B.network, B.costs, 1)
    assert res.flow == fr(1, 1, 1, 0, 0)
    assert verify_equilibrium(B.network, B.costs, res.flow).gap == 0


def test_braess_support_sets():
    B = nested_braess(1)
    inner = B.network.edge_index("v1-v2")
    assert support_set(equilibrium_at(B.network, B.costs, F(3, 2)).flow) == frozenset(range(5))
    assert support_set(equilibrium_at(B.network, B.costs, 3).flow) == frozenset(range(5)) - {inner}
    assert support_set(fr(1, 1, 0)) == frozenset({0, 1})


def test_direction_qp_examples():
    net, costs = example_five()
    assert direction_qp(net, costs, fr(1, 1, 1)).flow == fr(F(2, 5), F(2, 5), F(3, 5))
    assert direction_qp(net, costs, fr(F(7, 5), F(7, 5), F(8, 5))).flow == fr(F(2, 5), F(2, 5), F(3, 5))
    single = build_network(2, [(1, 2)], 1, 2)
    assert direction_qp(single, [make_cost([NEG_INF], [1], [0])], fr(3)).flow == fr(1)


def test_direction_qp_errors():
    net, costs = example_five()
    with pytest.raises(OracleError):
        direction_qp(net, costs, fr(2, 2, 0))
    B = nested_braess(1, None)
    with pytest.raises(OracleError):
        direction_qp(B.network, B.costs, fr(1, 1, 1, 0, 0))


def test_direction_qp_dual_matches_slopes():
    for seed in range(20):
        inst = random_instance(random.Random(seed), mode="directed")
        curve = run(inst.network, inst.costs)
        for seg in curve.flow_segments[:3]:
            hi = seg.lambda_hi if seg.lambda_hi != float("inf") else seg.lambda_lo + 2
            lam = (seg.lambda_lo + hi) / 2
            x, pi = seg.flow_at(lam), seg.potential_at(lam)
            res = direction_qp(inst.network, inst.costs, x, pi)
            for e, (u, w) in enumerate(inst.network.edges):
                if res.flow[e] != 0:
                    cost = inst.costs[e]
                    piece = max(k for k in range(cost.piece_count) if cost.breakpoints[k] <= x[e])
                    if x[e] == cost.breakpoints[piece] and res.flow[e] < 0:
                        piece -= 1
                    assert res.potential[w] - res.potential[u] == cost.slopes[piece] * res.flow[e]


def test_certificate_potential_matches_path_costs(random_runs):
    for inst, curve in random_runs[:60]:
        seg = curve.flow_segments[-1]
        lam = seg.lambda_lo + 1
        x, pi = seg.flow_at(lam), seg.potential_at(lam)
        cert = verify_equilibrium(inst.network, inst.costs, x)
        lo, hi = sink_potential_range(inst.network, inst.costs, x)
        assert lo <= pi[-1] <= hi and lo <= cert.potential[-1] <= hi
