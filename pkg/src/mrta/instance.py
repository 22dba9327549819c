"""Problem instances: geometry primitives, JSON I/O, validation and visibility."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
import shapely
from shapely.geometry import LineString, Polygon
from shapely.geometry import Point as _ShapelyPoint

from .errors import ParseError, ValidationError
from .hungarian import hungarian

EPS_GEO = 1e-9


class Point(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Workspace:
    xmin: float
    ymin: float
    xmax: float
    ymax: float

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    def corners(self) -> list[Point]:
        # counter-clockwise from (xmin, ymin); side k runs corners[k] -> corners[k+1]
        return [
            Point(self.xmin, self.ymin),
            Point(self.xmax, self.ymin),
            Point(self.xmax, self.ymax),
            Point(self.xmin, self.ymax),
        ]

    def contains(self, p: Sequence[float]) -> bool:
        return self.xmin <= p[0] <= self.xmax and self.ymin <= p[1] <= self.ymax

    def boundary_distance(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        return np.minimum.reduce([
            pts[:, 0] - self.xmin,
            self.xmax - pts[:, 0],
            pts[:, 1] - self.ymin,
            self.ymax - pts[:, 1],
        ])


@dataclass(frozen=True)
class Obstacle:
    vertices: tuple[Point, ...]

    @cached_property
    def polygon(self) -> Polygon:
        return Polygon(self.vertices)


@dataclass
class Instance:
    """A workspace with obstacles, robot starts and task locations.

    After padding, the last ``dummy_robots`` robots and the last
    ``dummy_tasks`` tasks are placeholders so that ``len(robots) == len(tasks)``.
    """

    workspace: Workspace
    robot_radius: float
    obstacles: list[Obstacle]
    robots: list[Point]
    tasks: list[Point]
    dummy_robots: int = 0
    dummy_tasks: int = 0

    @property
    def n_robots(self) -> int:
        return len(self.robots) - self.dummy_robots

    @property
    def n_tasks(self) -> int:
        return len(self.tasks) - self.dummy_tasks

    def is_dummy_robot(self, i: int) -> bool:
        return i >= self.n_robots

    def is_dummy_task(self, j: int) -> bool:
        return j >= self.n_tasks

    @cached_property
    def field(self) -> "ObstacleField":
        return ObstacleField(self.workspace, self.obstacles)

    def real(self) -> "Instance":
        """The instance without padding entities."""
        return replace(
            self,
            robots=list(self.robots[: self.n_robots]),
            tasks=list(self.tasks[: self.n_tasks]),
            dummy_robots=0,
            dummy_tasks=0,
        )


# ---------------------------------------------------------------- geometry


class ObstacleField:
    """Vectorised clearance and visibility queries against a fixed obstacle set."""

    def __init__(self, workspace: Workspace, obstacles: Sequence[Obstacle]):
        self.workspace = workspace
        self.polygons = [o.polygon for o in obstacles]
        self.tree = shapely.STRtree(self.polygons) if self.polygons else None

    def obstacle_distance(self, geoms) -> np.ndarray:
        geoms = np.asarray(geoms, dtype=object)
        if self.tree is None or len(geoms) == 0:
            return np.full(len(geoms), np.inf)
        idx, dist = self.tree.query_nearest(geoms, return_distance=True, all_matches=False)
        out = np.full(len(geoms), np.inf)
        np.minimum.at(out, idx[0], dist)
        return out

    def clearance(self, pts) -> np.ndarray:
        """Distance from each point to the nearest obstacle or workspace side (0 inside)."""
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        wall = np.maximum(self.workspace.boundary_distance(pts), 0.0)
        return np.minimum(wall, self.obstacle_distance(shapely.points(pts)))

    def segment_clearance(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=float).reshape(-1, 2)
        b = np.asarray(b, dtype=float).reshape(-1, 2)
        # workspace is convex, so the segment minimum is at an endpoint
        wall = np.minimum(self.workspace.boundary_distance(a), self.workspace.boundary_distance(b))
        lines = shapely.linestrings(np.stack([a, b], axis=1))
        return np.minimum(np.maximum(wall, 0.0), self.obstacle_distance(lines))

    def visible(self, a, b) -> np.ndarray:
        """Pairwise line of sight; touching an obstacle boundary blocks the view."""
        a = np.asarray(a, dtype=float).reshape(-1, 2)
        b = np.asarray(b, dtype=float).reshape(-1, 2)
        out = np.ones(len(a), dtype=bool)
        if self.tree is None or len(a) == 0:
            return out
        same = np.all(np.abs(a - b) <= EPS_GEO, axis=1)
        geoms = np.empty(len(a), dtype=object)
        if same.any():
            geoms[same] = shapely.points(a[same])
        if (~same).any():
            geoms[~same] = shapely.linestrings(np.stack([a[~same], b[~same]], axis=1))
        hit, _ = self.tree.query(geoms, predicate="intersects")
        out[hit] = False
        return out


def line_of_sight(a: Sequence[float], b: Sequence[float], obstacles: Sequence[Obstacle]) -> bool:
    """True iff segment ``ab`` touches no obstacle (interior or boundary)."""
    if math.dist(a, b) <= EPS_GEO:
        geom = _ShapelyPoint(a)
    else:
        geom = LineString([tuple(a), tuple(b)])
    return not any(o.polygon.intersects(geom) for o in obstacles)


# ---------------------------------------------------------------- validation


def validate_instance(inst: Instance) -> list[str]:
    """Return a description of every violated invariant (empty when valid)."""
    problems: list[str] = []
    ws = inst.workspace
    r = inst.robot_radius
    if not all(map(math.isfinite, (ws.xmin, ws.ymin, ws.xmax, ws.ymax))):
        problems.append("workspace bounds are not finite")
        return problems
    if ws.width <= 0 or ws.height <= 0:
        problems.append("workspace has non-positive extent")
    if not (math.isfinite(r) and r > 0):
        problems.append("robot_radius must be positive")
        return problems

    good_polys: list[tuple[int, Polygon]] = []
    for k, ob in enumerate(inst.obstacles):
        if len(ob.vertices) < 3:
            problems.append(f"obstacle {k} has fewer than 3 vertices")
            continue
        if not all(math.isfinite(c) for v in ob.vertices for c in v):
            problems.append(f"obstacle {k} has non-finite vertices")
            continue
        poly = ob.polygon
        if not poly.is_valid:
            problems.append(f"obstacle {k} is self-intersecting")
            continue
        if poly.area <= EPS_GEO:
            problems.append(f"obstacle {k} has zero area")
            continue
        good_polys.append((k, poly))

    def check_entities(kind: str, pts: Sequence[Point], count: int) -> None:
        for i in range(count):
            p = pts[i]
            if not (math.isfinite(p[0]) and math.isfinite(p[1])):
                problems.append(f"{kind} {i} has non-finite coordinates")
                continue
            if any(math.dist(p, pts[j]) <= EPS_GEO for j in range(i)):
                problems.append(f"duplicate {kind} position")
            if not ws.contains(p):
                problems.append(f"{kind} {i} outside workspace")
                continue
            if float(ws.boundary_distance(np.array(p))[0]) < r - EPS_GEO:
                problems.append(f"{kind} {i} closer than robot_radius to workspace boundary")
            sp = _ShapelyPoint(p)
            for k, poly in good_polys:
                if poly.intersects(sp):
                    problems.append(f"{kind} {i} inside obstacle {k}")
                    break
                if poly.distance(sp) < r - EPS_GEO:
                    problems.append(f"{kind} {i} closer than robot_radius to obstacle {k}")
                    break

    check_entities("robot", inst.robots, inst.n_robots)
    check_entities("task", inst.tasks, inst.n_tasks)
    return problems


def pad_instance(inst: Instance) -> Instance:
    """Add co-located dummies so that robots and tasks have equal counts.

    Dummy robots sit on the tasks left unmatched by a Euclidean assignment of
    the real robots (and dummy tasks on the unmatched robots), so their costs
    are zero.
    """
    inst = inst.real()
    n, m = len(inst.robots), len(inst.tasks)
    if n == m:
        return inst
    size = max(n, m)
    cost = np.zeros((size, size))
    if n and m:
        r = np.asarray(inst.robots, dtype=float)
        t = np.asarray(inst.tasks, dtype=float)
        cost[:n, :m] = np.linalg.norm(r[:, None, :] - t[None, :, :], axis=2)
    match = hungarian(cost)
    if n < m:
        free = sorted(int(match[i]) for i in range(n, size))
        extra = [inst.tasks[j] for j in free]
        return replace(inst, robots=inst.robots + extra, dummy_robots=len(extra))
    inv = {int(c): i for i, c in enumerate(match)}
    free = sorted(inv[j] for j in range(m, size))
    extra = [inst.robots[i] for i in free]
    return replace(inst, tasks=inst.tasks + extra, dummy_tasks=len(extra))


# ---------------------------------------------------------------- JSON I/O


def _num(x: float) -> float:
    return float(f"{float(x):.12g}")


def instance_to_dict(inst: Instance) -> dict:
    inst = inst.real()
    ws = inst.workspace
    return {
        "workspace": {"xmin": _num(ws.xmin), "ymin": _num(ws.ymin), "xmax": _num(ws.xmax), "ymax": _num(ws.ymax)},
        "robot_radius": _num(inst.robot_radius),
        "obstacles": [{"vertices": [[_num(x), _num(y)] for x, y in o.vertices]} for o in inst.obstacles],
        "robots": [[_num(x), _num(y)] for x, y in inst.robots],
        "tasks": [[_num(x), _num(y)] for x, y in inst.tasks],
    }


def dumps_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst)) + "\n"


def save_instance(inst: Instance, path) -> None:
    Path(path).write_text(dumps_instance(inst), encoding="utf-8")


def _points(raw, what: str) -> list[Point]:
    if not isinstance(raw, list):
        raise ParseError(f"{what} must be a list")
    out = []
    for k, p in enumerate(raw):
        if not (isinstance(p, list) and len(p) == 2 and all(isinstance(c, (int, float)) for c in p)):
            raise ParseError(f"{what}[{k}] must be an [x, y] pair")
        out.append(Point(float(p[0]), float(p[1])))
    return out


def instance_from_dict(data) -> Instance:
    """Build an unvalidated, unpadded instance from decoded JSON."""
    if not isinstance(data, dict):
        raise ParseError("instance must be a JSON object")
    try:
        ws = data["workspace"]
        workspace = Workspace(*(float(ws[k]) for k in ("xmin", "ymin", "xmax", "ymax")))
        radius = float(data["robot_radius"])
        obstacles = []
        for k, ob in enumerate(data.get("obstacles", [])):
            obstacles.append(Obstacle(tuple(_points(ob["vertices"], f"obstacles[{k}].vertices"))))
        robots = _points(data["robots"], "robots")
        tasks = _points(data["tasks"], "tasks")
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed instance: {exc!r}") from exc
    return Instance(workspace, radius, obstacles, robots, tasks)


def loads_instance(text: str) -> Instance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    inst = instance_from_dict(data)
    problems = validate_instance(inst)
    if problems:
        raise ValidationError(problems[0])
    return pad_instance(inst)


def load_instance(path) -> Instance:
    """Read, validate and pad an instance file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    return loads_instance(text)
