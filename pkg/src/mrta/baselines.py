"""Reference allocators realized on the same roadmap as the main planner."""
from __future__ import annotations

import numpy as np

from .demand import NodeLocator
from .errors import Unreachable
from .hungarian import hungarian
from .instance import Instance
from .plan import FinalPlan, assemble_plan
from .roadmap import Roadmap, gen_roadmap


class _Routes:
    """Nearest nodes of every entity plus roadmap distances between them."""

    def __init__(self, inst: Instance, roadmap: Roadmap):
        self.roadmap = roadmap
        locator = NodeLocator(roadmap, inst.field)
        self.robot_node = [locator.nearest(p) for p in inst.robots]
        self.task_node = [locator.nearest(p) for p in inst.tasks]
        pos = roadmap.positions
        self.robot_leg = np.linalg.norm(np.asarray(inst.robots, dtype=float) - pos[self.robot_node], axis=1)
        self.task_leg = np.linalg.norm(np.asarray(inst.tasks, dtype=float) - pos[self.task_node], axis=1)
        self.sources = sorted(set(self.robot_node))
        self.row = {u: k for k, u in enumerate(self.sources)}
        self.dist = roadmap.distances(self.sources)
        self._task_rows: dict[int, np.ndarray] = {}

    def cost(self) -> np.ndarray:
        """Start leg + roadmap distance + final leg for every robot and task pair."""
        d = self.dist[[self.row[u] for u in self.robot_node]][:, self.task_node]
        return self.robot_leg[:, None] + d + self.task_leg[None, :]

    def node_path(self, i: int, j: int) -> list[int]:
        a, b = self.robot_node[i], self.task_node[j]
        if a == b:
            return [a]
        if b not in self._task_rows:
            self._task_rows[b] = self.roadmap.distances([b])[0]
        seq, _ = self.roadmap.path_between(a, b, self.dist[self.row[a]], self._task_rows[b])
        return seq


def _realize(inst: Instance, roadmap: Roadmap, routes: _Routes, perm) -> FinalPlan:
    allocation = {i: int(j) for i, j in enumerate(perm)}
    node_paths = {i: routes.node_path(i, j) for i, j in allocation.items()}
    return assemble_plan(inst, roadmap, allocation, node_paths)


def _checked(cost: np.ndarray, perm) -> None:
    if not np.isfinite(cost[np.arange(len(perm)), perm]).all():
        raise Unreachable("a robot and its task lie in different roadmap components")


def _finite(cost: np.ndarray) -> np.ndarray:
    big = (np.nanmax(cost[np.isfinite(cost)]) + 1.0) * (len(cost) + 1) if np.isfinite(cost).any() else 1.0
    return np.where(np.isfinite(cost), cost, big)


def hungarian_euclidean(inst: Instance, roadmap: Roadmap | None = None) -> FinalPlan:
    """Optimal assignment under straight-line distance, driven along roadmap shortest paths."""
    roadmap = roadmap or gen_roadmap(inst)
    routes = _Routes(inst, roadmap)
    r = np.asarray(inst.robots, dtype=float)
    t = np.asarray(inst.tasks, dtype=float)
    perm = hungarian(np.linalg.norm(r[:, None, :] - t[None, :, :], axis=2))
    _checked(routes.cost(), perm)
    return _realize(inst, roadmap, routes, perm)


def hungarian_roadmap(inst: Instance, roadmap: Roadmap | None = None) -> FinalPlan:
    """Optimal assignment under the length of each robot's own roadmap route."""
    roadmap = roadmap or gen_roadmap(inst)
    routes = _Routes(inst, roadmap)
    cost = routes.cost()
    perm = hungarian(_finite(cost))
    _checked(cost, perm)
    return _realize(inst, roadmap, routes, perm)


def greedy_nearest(inst: Instance, roadmap: Roadmap | None = None) -> FinalPlan:
    """Robots in id order each take the closest task nobody has claimed yet."""
    roadmap = roadmap or gen_roadmap(inst)
    routes = _Routes(inst, roadmap)
    cost = routes.cost()
    free = np.ones(len(inst.tasks), dtype=bool)
    perm = []
    for i in range(len(inst.robots)):
        row = np.where(free, cost[i], np.inf)
        j = int(np.argmin(row))
        if not np.isfinite(row[j]):
            raise Unreachable(f"robot {i} cannot reach any free task")
        free[j] = False
        perm.append(j)
    return _realize(inst, roadmap, routes, perm)


BASELINES = {
    "hungarian-euclid": hungarian_euclidean,
    "hungarian-roadmap": hungarian_roadmap,
    "greedy": greedy_nearest,
}
