"""Section association of robots and tasks, and the per-section supply balance."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import NoVisibleNode
from .instance import EPS_GEO, Instance, ObstacleField
from .roadmap import Roadmap


class NodeLocator:
    """Nearest visible non-JC node queries against one roadmap."""

    def __init__(self, roadmap: Roadmap, field: ObstacleField):
        self.roadmap = roadmap
        self.field = field
        self.ids = np.array(sorted(roadmap.node_location), dtype=np.int64)
        self.pos = roadmap.positions[self.ids] if len(self.ids) else np.zeros((0, 2))
        self.tree = cKDTree(self.pos) if len(self.ids) else None

    def nearest(self, p) -> int:
        n = len(self.ids)
        if n == 0:
            raise NoVisibleNode("roadmap has no inner nodes")
        p = np.asarray(p, dtype=float)
        k = min(8, n)
        while True:
            dist, idx = self.tree.query(p, k=k)
            dist, idx = np.atleast_1d(dist), np.atleast_1d(idx)
            vis = self.field.visible(np.repeat(p[None, :], len(idx), axis=0), self.pos[idx])
            if vis.any():
                best = dist[vis][0]
                # all candidates tied with the best must be inside the queried set
                if k == n or dist[-1] > best + EPS_GEO:
                    tied = vis & (dist <= best + EPS_GEO)
                    return int(self.ids[idx[tied]].min())
            elif k == n:
                raise NoVisibleNode(f"no inner roadmap node is visible from {tuple(p)}")
            k = min(2 * k, n)


def nearest_node(p, roadmap: Roadmap, field: ObstacleField) -> int:
    """Closest non-JC node with a clear line of sight from ``p``; ties go to the lower id."""
    return NodeLocator(roadmap, field).nearest(p)


@dataclass
class SectionAssociation:
    robot_nearest: list[int]
    task_nearest: list[int]
    robots_by_section: dict[int, list[int]]
    tasks_by_section: dict[int, list[int]]

    def robot_section(self, roadmap: Roadmap, i: int) -> int:
        return roadmap.node_location[self.robot_nearest[i]][0]

    def task_section(self, roadmap: Roadmap, j: int) -> int:
        return roadmap.node_location[self.task_nearest[j]][0]


def _group(points, nearest: list[int], roadmap: Roadmap) -> dict[int, list[int]]:
    out: dict[int, list[int]] = {s.id: [] for s in roadmap.sections}
    keys = {}
    for i, node in enumerate(nearest):
        sid, k = roadmap.node_location[node]
        first = roadmap.positions[roadmap.sections[sid].jc_endpoints[0]]
        keys[i] = (k, float(np.hypot(*(np.asarray(points[i]) - first))), i)
        out[sid].append(i)
    for sid in out:
        out[sid].sort(key=keys.__getitem__)
    return out


def associate(inst: Instance, roadmap: Roadmap, locator: NodeLocator | None = None) -> SectionAssociation:
    """Map every robot and task to its nearest visible inner node and hence one section."""
    locator = locator or NodeLocator(roadmap, inst.field)
    robot_nearest, task_nearest = [], []
    for kind, pts, out in (("robot", inst.robots, robot_nearest), ("task", inst.tasks, task_nearest)):
        for i, p in enumerate(pts):
            try:
                out.append(locator.nearest(p))
            except NoVisibleNode as exc:
                raise NoVisibleNode(f"{kind} {i}: {exc}") from exc
    return SectionAssociation(
        robot_nearest,
        task_nearest,
        _group(inst.robots, robot_nearest, roadmap),
        _group(inst.tasks, task_nearest, roadmap),
    )


@dataclass
class DemandReport:
    robots: dict[int, int]  # N_s
    tasks: dict[int, int]  # M_s

    @property
    def balance(self) -> dict[int, int]:
        return {s: self.robots[s] - self.tasks[s] for s in self.robots}

    @property
    def oversupplied(self) -> list[int]:
        return [s for s, d in sorted(self.balance.items()) if d > 0]

    @property
    def undersupplied(self) -> list[int]:
        return [s for s, d in sorted(self.balance.items()) if d < 0]

    @property
    def balanced(self) -> list[int]:
        return [s for s, d in sorted(self.balance.items()) if d == 0]

    def to_dict(self) -> dict:
        bal = self.balance
        return {
            "sections": [
                {"id": s, "robots": self.robots[s], "tasks": self.tasks[s], "balance": bal[s]}
                for s in sorted(self.robots)
            ],
            "oversupplied": self.oversupplied,
            "undersupplied": self.undersupplied,
            "balanced": self.balanced,
        }


def analyze(assoc: SectionAssociation, roadmap: Roadmap) -> DemandReport:
    ids = [s.id for s in roadmap.sections]
    return DemandReport(
        {s: len(assoc.robots_by_section.get(s, [])) for s in ids},
        {s: len(assoc.tasks_by_section.get(s, [])) for s in ids},
    )
