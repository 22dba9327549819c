"""Seeded random maps and instances for tests and benchmarks."""
from __future__ import annotations

import math

import numpy as np

from .demand import NodeLocator
from .errors import NoVisibleNode, PlacementFailure
from .instance import Instance, Obstacle, Point, Workspace, _num, pad_instance
from .roadmap import gen_roadmap

MAP_KINDS = ("corridor", "rooms", "random-polygons")
RADIUS = 0.25


def _rect(x0: float, y0: float, x1: float, y1: float) -> Obstacle:
    return Obstacle(tuple(Point(_num(x), _num(y)) for x, y in ((x0, y0), (x1, y0), (x1, y1), (x0, y1))))


def _scale(n: int) -> float:
    """Linear map scale so that free area grows with the entity count."""
    return max(1.0, math.sqrt(n / 50))


def corridor_map(n: int, rng: np.random.Generator) -> tuple[Workspace, list[Obstacle]]:
    """Two long hallways separated by a row of blocks with cross passages between them."""
    s = _scale(n)
    width, height = round(36 * s), 9.0
    rows = max(1, round(s))
    height = 9.0 * rows
    obstacles = []
    for row in range(rows):
        y0 = row * 9.0 + 3.5
        x = 3.0 + rng.uniform(0, 1.5)
        while x < width - 4:
            w = rng.uniform(3.0, 6.0)
            obstacles.append(_rect(x, y0, min(x + w, width - 3), y0 + 2.0))
            x += w + rng.uniform(1.6, 2.4)
    return Workspace(0.0, 0.0, float(width), float(height)), obstacles


def rooms_map(n: int, rng: np.random.Generator) -> tuple[Workspace, list[Obstacle]]:
    """A grid of rooms; walls are thin blocks with one door per shared wall."""
    s = _scale(n)
    nx = max(2, round(3 * s))
    ny = max(2, round(2 * s))
    room, t, door = 7.0, 0.4, 1.8
    width, height = nx * room, ny * room
    obstacles = []
    for i in range(1, nx):  # vertical walls
        x = i * room
        for j in range(ny):
            y0, y1 = j * room, (j + 1) * room
            d = rng.uniform(y0 + 1.5, y1 - 1.5 - door)
            if d - y0 > 0.2:
                obstacles.append(_rect(x - t / 2, y0, x + t / 2, d))
            if y1 - (d + door) > 0.2:
                obstacles.append(_rect(x - t / 2, d + door, x + t / 2, y1))
    for j in range(1, ny):  # horizontal walls, split around the vertical ones
        y = j * room
        for i in range(nx):
            x0 = i * room + (t / 2 if i else 0.0)
            x1 = (i + 1) * room - (t / 2 if i < nx - 1 else 0.0)
            d = rng.uniform(x0 + 1.5, x1 - 1.5 - door)
            obstacles.append(_rect(x0, y - t / 2, d, y + t / 2))
            obstacles.append(_rect(d + door, y - t / 2, x1, y + t / 2))
    return Workspace(0.0, 0.0, width, height), obstacles


def random_polygons_map(n: int, rng: np.random.Generator) -> tuple[Workspace, list[Obstacle]]:
    """Convex polygons scattered with a minimum gap that keeps passages open."""
    s = _scale(n)
    width, height = 24.0 * s, 18.0 * s
    count = round(10 * s * s)
    gap = 4 * RADIUS + 0.3
    placed: list[tuple[np.ndarray, float]] = []
    obstacles = []
    tries = 0
    while len(obstacles) < count and tries < 200 * count:
        tries += 1
        rad = rng.uniform(0.8, 2.0)
        c = rng.uniform([rad + gap, rad + gap], [width - rad - gap, height - rad - gap])
        if any(np.hypot(*(c - q)) < rad + rq + gap for q, rq in placed):
            continue
        k = int(rng.integers(3, 8))
        ang = np.sort(rng.uniform(0, 2 * np.pi, k))
        if np.max(np.diff(np.concatenate([ang, [ang[0] + 2 * np.pi]]))) > np.pi * 0.9:
            continue
        pts = c + rad * np.column_stack([np.cos(ang), np.sin(ang)])
        obstacles.append(Obstacle(tuple(Point(_num(x), _num(y)) for x, y in pts)))
        placed.append((c, rad))
    return Workspace(0.0, 0.0, float(_num(width)), float(_num(height))), obstacles


_BUILDERS = {"corridor": corridor_map, "rooms": rooms_map, "random-polygons": random_polygons_map}


def gen_instance(map_kind: str, n: int, m: int, seed: int, radius: float = RADIUS) -> Instance:
    """Random instance on a map of the given kind.

    Robots, then tasks, are drawn uniformly from the free space, keeping at
    least ``radius`` from obstacles and walls, more than ``2 * radius`` from
    every other entity, and seeing a roadmap node in the largest roadmap
    component so that every entity can reach every other.
    """
    if n < 1 or m < 1:
        raise ValueError("need at least one robot and one task")
    if map_kind not in _BUILDERS:
        raise ValueError(f"unknown map kind {map_kind!r}; choose from {', '.join(MAP_KINDS)}")
    rng = np.random.default_rng(seed)
    ws, obstacles = _BUILDERS[map_kind](max(n, m), rng)
    base = Instance(ws, radius, obstacles, [], [])
    roadmap = gen_roadmap(base)
    locator = NodeLocator(roadmap, base.field)
    inner = np.array(sorted(roadmap.node_location))
    labels = roadmap.components
    main = np.bincount(labels[inner]).argmax()

    total = n + m
    placed = np.zeros((0, 2))
    points: list[Point] = []
    budget = 500 * total
    drawn = 0
    margin = 1e-6
    while len(points) < total:
        if drawn >= budget:
            raise PlacementFailure(f"placed only {len(points)} of {total} entities on the {map_kind} map")
        batch = rng.uniform([ws.xmin + radius, ws.ymin + radius], [ws.xmax - radius, ws.ymax - radius], size=(256, 2))
        batch = np.round(batch, 6)
        drawn += len(batch)
        ok = base.field.clearance(batch) >= radius + margin
        for p in batch[ok]:
            if len(placed) and np.min(np.hypot(*(placed - p).T)) <= 2 * radius + margin:
                continue
            try:
                node = locator.nearest(p)
            except NoVisibleNode:
                continue
            if labels[node] != main:
                continue
            placed = np.vstack([placed, p])
            points.append(Point(float(p[0]), float(p[1])))
            if len(points) == total:
                break
    return pad_instance(Instance(ws, radius, obstacles, points[:n], points[n:]))
