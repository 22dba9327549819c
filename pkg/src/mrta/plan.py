"""The final allocation plus reference paths shared by every allocator and the simulator."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .instance import Instance, _num
from .roadmap import Roadmap


@dataclass
class FinalPlan:
    """Robot to task allocation with one roadmap path per robot.

    ``paths[i]`` is the start position, the positions of ``node_paths[i]`` and
    the task position, in that order, so waypoint ``k + 1`` sits on node
    ``node_paths[i][k]``.
    """

    allocation: dict[int, int]
    node_paths: dict[int, list[int]]
    paths: dict[int, np.ndarray]
    dummy_robots: frozenset[int] = frozenset()
    dummy_tasks: frozenset[int] = frozenset()
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def lengths(self) -> dict[int, float]:
        return {i: path_length(p) for i, p in self.paths.items()}

    def robots(self) -> list[int]:
        """Robots that physically exist, in id order."""
        return [i for i in sorted(self.paths) if i not in self.dummy_robots]

    def directed_edges(self) -> set[tuple[int, int]]:
        out = set()
        for i in self.robots():
            seq = self.node_paths[i]
            out.update((a, b) for a, b in zip(seq, seq[1:]) if a != b)
        return out

    def to_dict(self) -> dict:
        real = self.robots()
        return {
            "allocation": [[i, self.allocation[i]] for i in real],
            "paths": {str(i): [[_num(x), _num(y)] for x, y in self.paths[i]] for i in real},
            "lengths": {str(i): _num(path_length(self.paths[i])) for i in real},
            "node_paths": {str(i): list(self.node_paths[i]) for i in real},
            "dummy_robots": sorted(self.dummy_robots),
            "dummy_tasks": sorted(self.dummy_tasks),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict()) + "\n"


def path_length(path: np.ndarray) -> float:
    path = np.asarray(path, dtype=float)
    if len(path) < 2:
        return 0.0
    return float(np.linalg.norm(np.diff(path, axis=0), axis=1).sum())


def assemble_plan(
    inst: Instance, roadmap: Roadmap, allocation: dict[int, int], node_paths: dict[int, list[int]]
) -> FinalPlan:
    pos = roadmap.positions
    paths = {}
    for i, seq in node_paths.items():
        j = allocation[i]
        paths[i] = np.vstack([np.asarray(inst.robots[i], dtype=float), pos[seq], np.asarray(inst.tasks[j], dtype=float)])
    n, m = inst.n_robots, inst.n_tasks
    return FinalPlan(
        dict(sorted(allocation.items())),
        dict(sorted(node_paths.items())),
        dict(sorted(paths.items())),
        frozenset(range(n, len(inst.robots))),
        frozenset(range(m, len(inst.tasks))),
    )


def check_bijection(plan: FinalPlan, n: int) -> bool:
    """Every robot has one task and every task one robot (x_ij row and column sums are 1)."""
    x = np.zeros((n, n), dtype=int)
    for i, j in plan.allocation.items():
        x[i, j] += 1
    return bool((x.sum(axis=0) == 1).all() and (x.sum(axis=1) == 1).all())


def plan_from_dict(data) -> FinalPlan:
    """Rebuild the real-robot part of a plan written by ``FinalPlan.dumps``."""
    from .errors import ParseError

    try:
        allocation = {int(i): int(j) for i, j in data["allocation"]}
        paths = {int(k): np.asarray(v, dtype=float).reshape(-1, 2) for k, v in data["paths"].items()}
        node_paths = {int(k): [int(u) for u in v] for k, v in data["node_paths"].items()}
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed plan: {exc!r}") from exc
    if set(paths) != set(allocation) or set(node_paths) != set(allocation):
        raise ParseError("plan lists different robots in allocation, paths and node_paths")
    for i, seq in node_paths.items():
        if len(paths[i]) != len(seq) + 2:
            raise ParseError(f"robot {i}: path has {len(paths[i])} points for {len(seq)} nodes")
    return FinalPlan(
        dict(sorted(allocation.items())),
        dict(sorted(node_paths.items())),
        dict(sorted(paths.items())),
        frozenset(int(i) for i in data.get("dummy_robots", [])),
        frozenset(int(j) for j in data.get("dummy_tasks", [])),
    )
