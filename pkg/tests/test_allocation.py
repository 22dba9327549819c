import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mrta.allocation import allocate_section, estimate_arrivals
from mrta.errors import CountMismatch
from mrta.fcfs import Mover, match_section
from mrta.generator import gen_instance
from mrta.pipeline import plan_rm
from mrta.plan import check_bijection


def test_inner_robot_takes_task_away_from_entry():
    # tasks run from the left JC to the right one; r2, r3 come in from the right
    out = allocate_section([], ["r2", "r3"], ["r1"], ["t1", "t2", "t3"])
    assert out == {"r1": "t1", "r2": "t2", "r3": "t3"}


def test_two_sided_split():
    out = allocate_section(["a"], ["b1", "b2"], [], ["t1", "t2", "t3"])
    assert out["a"] == "t1"
    assert {out["b1"], out["b2"]} == {"t2", "t3"}
    # the first robot in from the right goes deepest
    assert out["b1"] == "t2"


def test_left_side_earliest_goes_deepest():
    assert allocate_section(["a", "b"], [], [], ["t1", "t2"]) == {"a": "t2", "b": "t1"}


def test_one_robot_one_task():
    assert allocate_section([], [], ["r"], ["t"]) == {"r": "t"}


def test_count_mismatch():
    with pytest.raises(CountMismatch):
        allocate_section(["a"], [], [], ["t1", "t2"])


# ---------------------------------------------------------------- matching along one section


def _edges(start, goal):
    if goal >= start:
        return {(k, k + 1) for k in range(start, goal)}
    return {(k + 1, k) for k in range(goal, start)}


@settings(max_examples=300, deadline=None)
@given(
    n=st.integers(1, 12),
    data=st.data(),
)
def test_match_section_keeps_one_direction_per_edge(n, data):
    length = 10
    idx = data.draw(st.lists(st.integers(1, length - 1), min_size=n, max_size=n))
    tau = data.draw(st.lists(st.floats(0, 20, allow_nan=False), min_size=n, max_size=n))
    e0 = data.draw(st.integers(0, n))
    e1 = data.draw(st.integers(0, n - e0))
    k = n - e0 - e1
    task_idx = sorted(data.draw(st.lists(st.integers(1, length - 1), min_size=k, max_size=k)))
    tasks = [(100 + j, q) for j, q in enumerate(task_idx)]
    movers = [Mover(i, q, t) for i, (q, t) in enumerate(zip(idx, tau))]
    arc = np.arange(length + 1, dtype=float)
    m = match_section(movers, tasks, (e0, e1), arc)
    assert len(m.exits[0]) == e0 and len(m.exits[1]) == e1
    assert sorted(m.tasks.values()) == [t for t, _ in tasks]
    assigned = set(m.tasks) | set(m.exits[0]) | set(m.exits[1])
    assert assigned == set(range(n))
    where = dict(tasks)
    used = set()
    for mv in movers:
        if mv.robot in m.tasks:
            goal = where[m.tasks[mv.robot]]
        else:
            goal = 0 if mv.robot in m.exits[0] else length
        used |= _edges(mv.index, goal)
    assert not any((b, a) in used for a, b in used)


def test_match_section_fcfs_on_one_side():
    arc = np.arange(11, dtype=float)
    # both robots come in at index 0; the one arriving first goes deeper
    movers = [Mover(0, 0, 5.0), Mover(1, 0, 2.0)]
    m = match_section(movers, [(7, 3), (8, 6)], (0, 0), arc)
    assert m.tasks == {1: 8, 0: 7}


def test_match_section_count_mismatch():
    with pytest.raises(ValueError):
        match_section([Mover(0, 1, 0.0)], [], (0, 0), np.arange(5.0))


# ---------------------------------------------------------------- final plan


def test_arrivals():
    res = plan_rm(gen_instance("corridor", 12, 12, 8))
    arr = estimate_arrivals(res.execution)
    for it in res.execution.itineraries:
        assert arr[it.robot] == (it.traveled if it.hops else 0.0)


@pytest.mark.parametrize("kind", ["corridor", "rooms", "random-polygons"])
def test_final_plan_structure(kind):
    inst = gen_instance(kind, 10, 10, 11)
    res = plan_rm(inst)
    plan, rm = res.plan, res.roadmap
    exported = rm.to_dict()
    edges = {(e["u"], e["v"]) for e in exported["edges"]} | {(e["v"], e["u"]) for e in exported["edges"]}
    assert check_bijection(plan, len(inst.robots))
    for i, j in plan.allocation.items():
        seq = plan.node_paths[i]
        assert all((a, b) in edges for a, b in zip(seq, seq[1:]))
        path = plan.paths[i]
        assert np.allclose(path[0], inst.robots[i]) and np.allclose(path[-1], inst.tasks[j])
        assert np.allclose(path[1:-1], rm.positions[seq])
        # the task lies in the robot's final section
        final = res.execution.itineraries[i].section
        assert res.assoc.task_section(rm, j) == final
        assert seq[-1] == res.assoc.task_nearest[j]


def test_untransferred_robot_path():
    from helpers import comb, instance, on_line

    rm = comb()
    inst = instance([on_line(rm, 3, 0.2)], [on_line(rm, 3, 0.7, -0.05)], ws=(-1, -1, 41, 6), r=0.5)
    res = plan_rm(inst, rm)
    seq = res.plan.node_paths[0]
    sec = rm.sections[3].nodes
    assert seq == sec[sec.index(seq[0]) : sec.index(seq[-1]) + 1]
    assert res.execution.itineraries[0].hops == []
