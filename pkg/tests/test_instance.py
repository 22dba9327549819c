import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import instance, rect
from mrta.errors import ParseError, ValidationError
from mrta.instance import (
    Point,
    dumps_instance,
    line_of_sight,
    load_instance,
    loads_instance,
    pad_instance,
    save_instance,
    validate_instance,
)


def _doc(**over):
    doc = {
        "workspace": {"xmin": 0, "ymin": 0, "xmax": 10, "ymax": 10},
        "robot_radius": 0.5,
        "obstacles": [],
        "robots": [[1, 1]],
        "tasks": [[8, 8]],
    }
    doc.update(over)
    return json.dumps(doc)


def test_minimal_file_loads(tmp_path):
    p = tmp_path / "i.json"
    p.write_text(_doc())
    inst = load_instance(p)
    assert (inst.n_robots, inst.n_tasks) == (1, 1)
    assert inst.robots == [Point(1.0, 1.0)]


def test_robot_inside_obstacle_rejected():
    with pytest.raises(ValidationError, match="inside obstacle"):
        loads_instance(_doc(obstacles=[{"vertices": [[0.5, 0.5], [3, 0.5], [3, 3], [0.5, 3]]}]))


def test_unequal_counts_are_padded_with_dummy_robot():
    inst = loads_instance(_doc(robots=[[1, 1], [2, 5]], tasks=[[8, 8], [5, 5], [1, 2]]))
    assert len(inst.robots) == len(inst.tasks) == 3
    assert (inst.n_robots, inst.dummy_robots, inst.dummy_tasks) == (2, 1, 0)
    assert inst.is_dummy_robot(2)
    # the dummy sits on the task a Euclidean assignment leaves over
    assert inst.robots[2] == Point(8.0, 8.0)


def test_dummy_tasks_sit_on_unmatched_robots():
    inst = pad_instance(instance([(1, 1), (9, 9), (5, 1)], [(1, 2)]))
    assert inst.dummy_tasks == 2
    assert sorted(inst.tasks[1:]) == sorted([Point(9.0, 9.0), Point(5.0, 1.0)])


@pytest.mark.parametrize(
    "text",
    ["not json", "[]", _doc(robots="x"), _doc(robots=[[1, "a"]]), json.dumps({"robots": []})],
)
def test_malformed_files(text):
    with pytest.raises(ParseError):
        loads_instance(text)


def test_missing_file(tmp_path):
    with pytest.raises(ParseError):
        load_instance(tmp_path / "nope.json")


def test_line_of_sight_cases():
    sq = [rect(4, 4, 6, 6)]
    assert line_of_sight((1, 1), (1, 1), sq)
    assert not line_of_sight((3, 5), (7, 5), sq)
    assert not line_of_sight((3, 3), (7, 7), sq)
    # grazing the corner (6, 4) counts as contact
    assert not line_of_sight((5, 3), (7, 5), sq)
    assert line_of_sight((1, 1), (9, 1), sq)


def test_validate_reports_violations():
    ok = instance([(1, 1), (3, 3)], [(8, 8), (6, 1)], [rect(4, 4, 5, 5)])
    assert validate_instance(ok) == []
    dup = instance([(1, 1), (1, 1)], [(8, 8), (6, 1)])
    assert "duplicate robot position" in validate_instance(dup)
    near = instance([(1, 1)], [(4.1, 3.8)], [rect(4, 4, 5, 5)], r=0.5)
    probs = validate_instance(near)
    assert len(probs) == 1 and "task 0" in probs[0] and "obstacle 0" in probs[0]
    wall = instance([(0.1, 5)], [(5, 5)], r=0.5)
    assert any("boundary" in p for p in validate_instance(wall))
    bad = instance([(1, 1)], [(5, 5)], [rect(4, 4, 4, 5)])
    assert validate_instance(bad) and validate_instance(bad)[0].startswith("obstacle 0")


def test_save_load_roundtrip_is_byte_stable(tmp_path):
    inst = instance([(1.123456789012345, 2)], [(7, 7.5)], [rect(4, 4, 5, 5)])
    p = tmp_path / "a.json"
    save_instance(inst, p)
    again = load_instance(p)
    assert dumps_instance(again) == p.read_text()
    key_order = list(json.loads(p.read_text()))
    assert key_order == ["workspace", "robot_radius", "obstacles", "robots", "tasks"]


def test_clearance_and_visibility_agree_with_shapely():
    inst = instance([(1, 1)], [(2, 2)], [rect(4, 4, 6, 6), rect(7, 1, 8, 3)])
    pts = np.array([[5, 2], [1, 1], [6.5, 6.5], [7.5, 4]])
    c = inst.field.clearance(pts)
    assert c == pytest.approx([2.0, 1.0, np.hypot(0.5, 0.5), 1.0])
    a = np.array([[3, 5], [1, 1], [5, 3]])
    b = np.array([[7, 5], [9, 1], [7, 5]])
    vis = inst.field.visible(a, b)
    assert list(vis) == [line_of_sight(p, q, inst.obstacles) for p, q in zip(a, b)]


coord = st.floats(0, 10, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(coord, coord, coord, coord)
def test_line_of_sight_is_symmetric(ax, ay, bx, by):
    obs = [rect(4, 4, 6, 6), rect(1, 7, 2, 9)]
    assert line_of_sight((ax, ay), (bx, by), obs) == line_of_sight((bx, by), (ax, ay), obs)
