import itertools

import numpy as np
import pytest

from helpers import comb, roadmap_from_polylines
from mrta.assignment import CostMatrix, Flow, InitialPlan, build_cost_matrix, redistribution_planning, solve_assignment
from mrta.demand import DemandReport
from mrta.errors import Unreachable
from mrta.hungarian import assignment_cost, hungarian


def _brute(cost):
    n = len(cost)
    best = min(sum(cost[i][p[i]] for i in range(n)) for p in itertools.permutations(range(n)))
    return best


def _brute_lex(cost, tol=1e-9):
    n = len(cost)
    perms = list(itertools.permutations(range(n)))
    totals = [sum(cost[i][p[i]] for i in range(n)) for p in perms]
    best = min(totals)
    return min(p for p, t in zip(perms, totals) if t <= best + tol)


def test_hungarian_small_examples():
    assert list(hungarian([[7.0]])) == [0]
    perm = hungarian([[1, 2], [2, 1]])
    assert list(perm) == [0, 1] and assignment_cost([[1, 2], [2, 1]], perm) == 2
    assert list(hungarian(np.zeros((0, 0)))) == []


def test_hungarian_rejects_bad_input():
    with pytest.raises(ValueError):
        hungarian([[1, 2, 3], [4, 5, 6]])
    with pytest.raises(ValueError):
        hungarian([[1, np.inf], [1, 1]])


@pytest.mark.parametrize("n", range(2, 8))
def test_hungarian_matches_permutations(n):
    rng = np.random.default_rng(100 + n)
    for _ in range(40):
        c = rng.uniform(0, 100, (n, n))
        assert assignment_cost(c, hungarian(c)) == pytest.approx(_brute(c.tolist()), abs=1e-9)


@pytest.mark.parametrize("n", range(2, 7))
def test_hungarian_ties_take_smallest_mapping(n):
    rng = np.random.default_rng(n)
    for _ in range(40):
        c = rng.integers(0, 3, (n, n)).astype(float)
        assert tuple(int(x) for x in hungarian(c)) == _brute_lex(c.tolist())


def test_hungarian_6x6_integer_against_720_permutations():
    c = np.random.default_rng(6).integers(0, 50, (6, 6))
    assert assignment_cost(c, hungarian(c)) == _brute(c.tolist())


# ---------------------------------------------------------------- cost matrix


def _report(bal):
    return DemandReport({s: max(d, 0) for s, d in bal.items()}, {s: max(-d, 0) for s, d in bal.items()})


def test_single_pair_matrix():
    rm = roadmap_from_polylines([[(0.0, 0.0), (5.0, 0.0)], [(5.0, 0.0), (10.0, 0.0)], [(5.0, 0.0), (5.0, 3.0)]], 0.5)
    s_left = next(s.id for s in rm.sections if rm.positions[s.nodes, 0].max() <= 5 and rm.positions[s.nodes, 1].max() == 0)
    s_right = next(s.id for s in rm.sections if rm.positions[s.nodes, 0].min() >= 5 and rm.positions[s.nodes, 1].max() == 0)
    bal = {s.id: 0 for s in rm.sections}
    bal[s_left], bal[s_right] = 1, -1
    cm, _ = build_cost_matrix(_report(bal), rm)
    assert cm.cost.shape == (1, 1) and cm.cost[0, 0] == pytest.approx(5.0, abs=1e-9)


def test_slot_expansion_duplicates_rows():
    rm = comb()
    bal = {s.id: 0 for s in rm.sections}
    bal[2], bal[3], bal[4] = 2, -1, -1
    cm, cache = build_cost_matrix(_report(bal), rm)
    assert cm.row_slots == [(2, 0), (2, 1)] and cm.col_slots == [(3, 0), (4, 0)]
    assert np.array_equal(cm.cost[0], cm.cost[1])
    assert cm.cost[0, 0] == pytest.approx(cache.length(2, 3))
    assert cm.to_csv().splitlines()[0] == "slot,s3:0,s4:0"


def _tree_distance(rm, a, b):
    # the comb is a tree, so the unique simple path is the shortest one
    stack = [(a, -1, 0.0)]
    while stack:
        u, parent, d = stack.pop()
        if u == b:
            return d
        for v, w in rm.adjacency[u]:
            if v != parent:
                stack.append((v, u, d + w))
    raise AssertionError


def test_costs_equal_path_enumeration():
    rm = comb()
    bal = {s.id: 0 for s in rm.sections}
    bal.update({0: 1, 1: 2, 5: -1, 6: -1, 4: -1})
    cm, cache = build_cost_matrix(_report(bal), rm)
    for (i, _), row in zip(cm.row_slots, cm.cost):
        for (j, _), c in zip(cm.col_slots, row):
            expect = _tree_distance(rm, rm.sections[i].center_node, rm.sections[j].center_node)
            assert c == pytest.approx(expect, abs=1e-9)
            assert cache.length(j, i) == pytest.approx(c, abs=1e-9)


def test_unbalanced_report_rejected():
    rm = comb()
    bal = {s.id: 0 for s in rm.sections}
    bal[2] = 1
    with pytest.raises(ValueError):
        build_cost_matrix(_report(bal), rm)


def test_unreachable_section():
    rm = roadmap_from_polylines([[(0.0, 0.0), (5.0, 0.0)], [(0.0, 9.0), (5.0, 9.0)]], 0.5)
    with pytest.raises(Unreachable):
        build_cost_matrix(_report({0: 1, 1: -1}), rm)


def test_infinite_pick_raises():
    cm = CostMatrix([(0, 0), (1, 0)], [(2, 0), (3, 0)], np.array([[1.0, np.inf], [2.0, np.inf]]))
    with pytest.raises(Unreachable):
        solve_assignment(cm)


# ---------------------------------------------------------------- initial plan


def test_redistribution_counts_slots():
    cm = CostMatrix([(2, 0), (2, 1), (2, 2)], [(3, 0), (3, 1), (4, 0)], np.zeros((3, 3)))
    plan = redistribution_planning(np.array([0, 2, 1]), cm)
    assert plan.as_lists() == [[2, 3, 2], [2, 4, 1]]


def test_empty_and_single_plans():
    empty = CostMatrix([], [], np.zeros((0, 0)))
    assert redistribution_planning(solve_assignment(empty), empty).flows == []
    one = CostMatrix([(5, 0)], [(1, 0)], np.array([[3.0]]))
    assert redistribution_planning(solve_assignment(one), one).flows == [Flow(5, 1, 1)]


def test_marginals_match_report():
    rm = comb()
    bal = {s.id: 0 for s in rm.sections}
    bal.update({0: 3, 1: 1, 5: -2, 6: -1, 4: -1})
    rep = _report(bal)
    cm, _ = build_cost_matrix(rep, rm)
    plan = redistribution_planning(solve_assignment(cm), cm)
    out = {s: sum(f.count for f in plan.flows if f.start == s) for s in rep.oversupplied}
    inn = {s: sum(f.count for f in plan.flows if f.end == s) for s in rep.undersupplied}
    assert out == {s: bal[s] for s in rep.oversupplied}
    assert inn == {s: -bal[s] for s in rep.undersupplied}
