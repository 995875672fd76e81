"""Acceptance suite: one test per criterion, summarised as PASS/FAIL lines at the end of the run."""

import random
import time
from fractions import Fraction as F

from conftest import fr

from wardrop_homotopy import run
from wardrop_homotopy.costs import evaluate_cost, invert_cost
from wardrop_homotopy.homotopy import pivot_budget
from wardrop_homotopy.instances import ex_ambiguous, ex_lexicographic, ex_simple_undirected, nested_braess, random_instance
from wardrop_homotopy.linalg import (
    conductance_matrix,
    identity,
    invert_spd,
    mat_mul,
    mat_vec,
    reduced_laplacian,
    sherman_morrison_limit,
    sherman_morrison_update,
    vec_mat,
)
from wardrop_homotopy.oracle import (
    direction_qp,
    equilibrium_at,
    sink_potential_range,
    support_set,
    verify_equilibrium,
)

SAMPLES_PER_SEGMENT = 5
ORACLE_TOLERANCE = 1e-6


def test_criterion_1_simple_undirected_golden():
    inst = ex_simple_undirected()
    start = time.perf_counter()
    curve = run(inst.network, inst.costs)
    elapsed = time.perf_counter() - start
    segs = curve.flow_segments
    assert len(segs) == 4
    assert curve.breakpoints == fr(0, 2, F(11, 3), 5)
    assert [s.flow_offset for s in segs] == [fr(0, 0, 0), fr(1, 1, 1), fr(F(5, 3), F(5, 3), 2), fr(2, 2, 3)]
    assert [s.flow_slope for s in segs] == [
        fr(F(1, 2), F(1, 2), F(1, 2)),
        fr(F(2, 5), F(2, 5), F(3, 5)),
        fr(F(1, 4), F(1, 4), F(3, 4)),
        fr(F(1, 5), F(1, 5), F(4, 5)),
    ]
    assert [s.inverse for s in segs] == [
        [fr(F(3, 4), F(1, 2)), fr(F(1, 2), 1)],
        [fr(F(6, 5), F(4, 5)), fr(F(4, 5), F(6, 5))],
        [fr(1, F(1, 2)), fr(F(1, 2), F(3, 4))],
        [fr(F(6, 5), F(2, 5)), fr(F(2, 5), F(4, 5))],
    ]
    # each recorded inverse is the inverse of its region's reduced Laplacian
    inverses = [invert_cost(c) for c in inst.costs]
    for s in segs:
        cs, _ = conductance_matrix(inst.network, inverses, s.region)
        assert mat_mul(s.inverse, reduced_laplacian(inst.network, cs)) == identity(2)
    assert elapsed < 1.0


def test_criterion_2_lexicographic_rule_golden():
    inst = ex_lexicographic()
    start = time.perf_counter()
    curve = run(inst.network, inst.costs)
    elapsed = time.perf_counter() - start
    (record,) = curve.degeneracies
    assert record.lam == 3 and record.potential == fr(0, 1, 2)
    assert record.regions == [(1, 1, 1), (1, 2, 1), (1, 2, 2), (2, 2, 2)]
    m = inst.network.m
    ids = inst.network.edge_ids
    step0 = {ids[e]: v[m:] for e, v in record.steps[0].vectors.items()}
    assert step0 == {"e1": fr(3, -3, 0), "e2": fr(0, 3, -3), "e3": fr(F(3, 2), 0, F(-3, 2))}
    assert elapsed < 1.0


def test_criterion_3_ambiguous_jump_golden():
    inst = ex_ambiguous()
    curve = run(inst.network, inst.costs)
    jumps = [s for s in curve.segments if s.kind == "jump"]
    assert len(jumps) == 1
    jump = jumps[0]
    after = curve.segments[curve.segments.index(jump) + 1]
    assert jump.lambda_lo == jump.lambda_hi == F(5, 2)
    assert jump.potential_offset == fr(0, 1, 3)
    assert after.potential_offset == fr(0, 1, 4)
    assert jump.flow_offset == after.flow_offset == fr(1, 1, F(3, 2))
    assert jump.flow_slope == fr(0, 0, 0)
    assert after.lambda_lo == F(5, 2)
    assert after.potential_slope == fr(0, 1, 2)


def braess_support_sets(j):
    inst = nested_braess(j, F(1, 10**6))
    curve = run(inst.network, inst.costs)
    limit = 3 * F(10) ** (j - 1)
    sets = {support_set(curve.segments[0].flow_at(0))}
    for seg in curve.flow_segments:
        if seg.lambda_lo >= limit:
            break
        hi = min(seg.lambda_hi, limit)
        sets.add(support_set(seg.flow_at((seg.lambda_lo + hi) / 2)))
    return sets


def test_criterion_4_nested_braess_support_sets():
    for j in (1, 2, 3):
        assert len(braess_support_sets(j)) >= 2 ** (j + 1)
    start = time.perf_counter()
    count = len(braess_support_sets(4))
    elapsed = time.perf_counter() - start
    assert count >= 2**5
    assert elapsed < 60.0


def test_criterion_5_no_region_revisited(random_runs):
    assert len(random_runs) == 200
    budget = pivot_budget()
    directed = 0
    for inst, curve in random_runs:
        assert inst.network.n <= 6 and inst.network.m <= 10
        assert all(len(c.breakpoints) <= 3 for c in inst.costs)
        directed += any(c.directed for c in inst.costs)
        assert len(curve.visited) == len(set(curve.visited))
        assert curve.stats["pivots"] <= budget
    assert 0 < directed < 200


def sample_points(seg):
    hi = seg.lambda_hi if seg.lambda_hi != float("inf") else seg.lambda_lo + 2
    for i in range(SAMPLES_PER_SEGMENT):
        lam = seg.lambda_lo + (hi - seg.lambda_lo) * F(i, SAMPLES_PER_SEGMENT)
        if lam > 0:
            yield lam


def cost_distance(cost, a, b):
    """Gap between the cost intervals at two flows, 0 when they overlap."""
    va, vb = evaluate_cost(cost, a), evaluate_cost(cost, b)
    return max(0, max(va.left, vb.left) - min(va.right, vb.right))


def test_criterion_6_oracle_equivalence(random_runs):
    samples = 0
    for inst, curve in random_runs:
        net, costs = inst.network, inst.costs
        unique_flow = not any(c.has_constant_piece for c in costs)
        for seg in curve.flow_segments:
            for lam in sample_points(seg):
                x, pi = seg.flow_at(lam), seg.potential_at(lam)
                assert verify_equilibrium(net, costs, x, pi).gap == 0
                result = equilibrium_at(net, costs, lam)
                assert result.confirmed, (inst.name, lam)
                for e in range(net.m):
                    assert cost_distance(costs[e], x[e], result.flow[e]) <= ORACLE_TOLERANCE
                if unique_flow:
                    assert max(abs(a - b) for a, b in zip(x, result.flow)) <= ORACLE_TOLERANCE
                # pi_t is set-valued at a cost jump, so both must lie in the exact admissible range;
                # the range is a single point everywhere else
                lo, hi = sink_potential_range(net, costs, result.flow)
                assert lo - ORACLE_TOLERANCE <= pi[-1] - pi[0] <= hi + ORACLE_TOLERANCE
                assert lo <= result.potential[-1] - result.potential[0] <= hi
                if lo == hi:
                    assert abs((pi[-1] - pi[0]) - (result.potential[-1] - result.potential[0])) <= ORACLE_TOLERANCE
                samples += 1
    assert samples > 1000


def random_spd(rng, k):
    B = [[F(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(k)] for _ in range(k)]
    A = [[sum(B[r][i] * B[r][j] for r in range(k)) for j in range(k)] for i in range(k)]
    for i in range(k):
        A[i][i] += F(1, rng.randint(1, 4))
    return A


def test_criterion_7_pivot_algebra():
    rng = random.Random(7)
    for _ in range(1000):
        A = random_spd(rng, 4)
        H = invert_spd(A)
        g = [0] * 4
        while not any(g):
            g = [rng.choice((-1, 0, 0, 1)) for _ in range(4)]
        dc = F(rng.randint(1, 5), rng.randint(1, 5))
        A2 = [[A[i][j] + dc * g[i] * g[j] for j in range(4)] for i in range(4)]
        assert mat_mul(sherman_morrison_update(H, g, dc), A2) == identity(4)
        lim = sherman_morrison_limit(H, g)
        assert mat_vec(lim, g) == [0] * 4
        assert vec_mat(g, lim) == [0] * 4


def test_criterion_8_direction_qp_cross_check():
    checked = 0
    for seed in range(50):
        inst = random_instance(random.Random(10000 + seed), mode="directed")
        curve = run(inst.network, inst.costs)
        for seg in curve.flow_segments:
            hi = seg.lambda_hi if seg.lambda_hi != float("inf") else seg.lambda_lo + 2
            lam = (seg.lambda_lo + hi) / 2
            result = direction_qp(inst.network, inst.costs, seg.flow_at(lam), seg.potential_at(lam))
            assert result.flow == seg.flow_slope, (inst.name, lam)
            checked += 1
    assert checked >= 50
