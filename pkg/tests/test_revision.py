from collections import defaultdict

import numpy as np
import pytest

from helpers import comb
from mrta.assignment import Flow, InitialPlan, PathCache
from mrta.generator import gen_instance
from mrta.revision import decompose, revise
from mrta.roadmap import gen_roadmap


@pytest.fixture(scope="module")
def teeth():
    rm = comb()
    return rm, PathCache(rm, [s.id for s in rm.sections])


def test_decompose_within_one_section(teeth):
    rm, cache = teeth
    path, _ = cache.path(3, 3)
    assert decompose(path, rm, 3, 3) == [3]


def test_decompose_through_middle_section(teeth):
    rm, cache = teeth
    path, _ = cache.path(2, 4)
    assert decompose(path, rm, 2, 4) == [2, 3, 4]


def test_decompose_four_sections(teeth):
    rm, cache = teeth
    path, _ = cache.path(1, 4)
    assert decompose(path, rm, 1, 4) == [1, 2, 3, 4]


def test_worked_example(teeth):
    rm, cache = teeth
    init = InitialPlan([Flow(2, 3, 2), Flow(2, 4, 1)])
    assert revise(init, cache, rm).as_lists() == [[2, 3, 3], [3, 4, 1]]


def test_adjacent_flow_unchanged(teeth):
    rm, cache = teeth
    assert revise(InitialPlan([Flow(3, 4, 2)]), cache, rm).as_lists() == [[3, 4, 2]]


def test_shared_hops_merge(teeth):
    rm, cache = teeth
    init = InitialPlan([Flow(0, 3, 1), Flow(1, 3, 2)])
    assert revise(init, cache, rm).as_lists() == [[0, 2, 1], [1, 2, 2], [2, 3, 3]]


def test_revision_is_idempotent(teeth):
    rm, cache = teeth
    once = revise(InitialPlan([Flow(0, 4, 2), Flow(5, 1, 1), Flow(6, 2, 3)]), cache, rm)
    again = revise(InitialPlan([Flow(f.start, f.end, f.count) for f in once.flows]), cache, rm)
    assert again.as_lists() == once.as_lists()


def _net(flows):
    net = defaultdict(int)
    for s, t, n in flows:
        net[s] -= n
        net[t] += n
    return {k: v for k, v in net.items() if v}


def check_random_flow_sets(rm, count, seed):
    """Adjacency and net-flow preservation on random initial plans; returns the number checked."""
    rng = np.random.default_rng(seed)
    comp = rm.components
    ids = [s.id for s in rm.sections]
    cache = PathCache(rm, ids)
    jcs = {s.id: set(s.jc_endpoints) for s in rm.sections}
    for _ in range(count):
        flows = {}
        for _ in range(int(rng.integers(1, 8))):
            a, b = (int(x) for x in rng.choice(ids, 2, replace=False))
            if comp[rm.sections[a].center_node] != comp[rm.sections[b].center_node]:
                continue
            flows[(a, b)] = flows.get((a, b), 0) + int(rng.integers(1, 5))
        init = InitialPlan([Flow(a, b, n) for (a, b), n in sorted(flows.items())])
        x = revise(init, cache, rm)
        for f in x.flows:
            assert f.start != f.end and jcs[f.start] & jcs[f.end]
            assert f.jc in jcs[f.start] & jcs[f.end]
        assert _net(x.as_lists()) == _net(init.as_lists())
    return count


def test_random_flow_sets_on_generated_map():
    inst = gen_instance("random-polygons", 20, 20, 3)
    assert check_random_flow_sets(gen_roadmap(inst), 200, 0) == 200
