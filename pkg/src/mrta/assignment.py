"""Section-level cost matrix, Hungarian assignment and the initial redistribution plan."""
from __future__ import annotations

import io
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .demand import DemandReport
from .errors import Unreachable
from .hungarian import hungarian
from .roadmap import Roadmap


class PathCache:
    """Center-to-center shortest paths, computed lazily from per-source Dijkstra rows."""

    def __init__(self, roadmap: Roadmap, sections: list[int]):
        self.roadmap = roadmap
        centers = sorted({roadmap.sections[s].center_node for s in sections})
        self._row = {c: k for k, c in enumerate(centers)}
        self.dist = roadmap.distances(centers)
        self._paths: dict[tuple[int, int], tuple[list[int], float]] = {}

    def center(self, s: int) -> int:
        return self.roadmap.sections[s].center_node

    def length(self, i: int, j: int) -> float:
        return float(self.dist[self._row[self.center(i)], self.center(j)])

    def path(self, i: int, j: int) -> tuple[list[int], float]:
        key = (i, j)
        if key not in self._paths:
            a, b = self.center(i), self.center(j)
            if a == b:
                self._paths[key] = ([a], 0.0)
            else:
                self._paths[key] = self.roadmap.path_between(
                    a, b, self.dist[self._row[a]], self.dist[self._row[b]]
                )
        return self._paths[key]


@dataclass
class CostMatrix:
    row_slots: list[tuple[int, int]]
    col_slots: list[tuple[int, int]]
    cost: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(["slot"] + [f"s{s}:{k}" for s, k in self.col_slots]) + "\n")
        for (s, k), row in zip(self.row_slots, self.cost):
            buf.write(",".join([f"s{s}:{k}"] + [repr(float(c)) for c in row]) + "\n")
        return buf.getvalue()


def build_cost_matrix(report: DemandReport, roadmap: Roadmap) -> tuple[CostMatrix, PathCache]:
    """One row per surplus robot and one column per missing robot, priced by center path length."""
    bal = report.balance
    over, under = report.oversupplied, report.undersupplied
    rows = [(s, k) for s in over for k in range(bal[s])]
    cols = [(s, k) for s in under for k in range(-bal[s])]
    if len(rows) != len(cols):
        raise ValueError(f"unbalanced supply: {len(rows)} surplus vs {len(cols)} deficit")
    cache = PathCache(roadmap, over + under)
    block = np.array([[cache.length(i, j) for j in under] for i in over]).reshape(len(over), len(under))
    reps_r = [bal[s] for s in over]
    reps_c = [-bal[s] for s in under]
    cost = np.repeat(np.repeat(block, reps_r, axis=0), reps_c, axis=1)
    for c, (s, _) in enumerate(cols):
        if rows and not np.isfinite(cost[:, c]).any():
            raise Unreachable(f"section {s} cannot be reached from any oversupplied section")
    return CostMatrix(rows, cols, cost), cache


def solve_assignment(cm: CostMatrix) -> np.ndarray:
    """Hungarian assignment of surplus rows to deficit columns; infinite entries are forbidden."""
    cost = cm.cost
    if cost.size == 0:
        return np.zeros(0, dtype=np.int64)
    finite = np.isfinite(cost)
    big = (float(cost[finite].max()) + 1.0) * (len(cost) + 1) if finite.any() else 1.0
    perm = hungarian(np.where(finite, cost, big))
    bad = ~finite[np.arange(len(perm)), perm]
    if bad.any():
        r = int(np.nonzero(bad)[0][0])
        raise Unreachable(
            f"surplus of section {cm.row_slots[r][0]} cannot reach section {cm.col_slots[perm[r]][0]}"
        )
    return perm


@dataclass(frozen=True)
class Flow:
    start: int
    end: int
    count: int


@dataclass
class InitialPlan:
    flows: list[Flow] = field(default_factory=list)

    def as_lists(self) -> list[list[int]]:
        return [[f.start, f.end, f.count] for f in self.flows]


def redistribution_planning(perm, cm: CostMatrix) -> InitialPlan:
    counts = Counter((cm.row_slots[r][0], cm.col_slots[int(c)][0]) for r, c in enumerate(perm))
    return InitialPlan([Flow(a, b, n) for (a, b), n in sorted(counts.items())])
