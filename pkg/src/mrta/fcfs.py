"""First-come-first-serve matching of robots to tasks and exits along one section.

Positions are node indices along the section (0 = first JC endpoint). Every
robot has a start index and the travel distance ``tau`` at which it is there.
A destination is either a task at an inner index or an exit through one of
the section ends.

The matching starts from the order-preserving assignment, which never sends
two robots over an edge in opposite directions. Robots that move towards the
second end (or stay) are then re-matched among themselves so that the
earliest one takes the furthest destination, and likewise for robots moving
towards the first end. Re-matching inside a group keeps every robot moving
the same way and leaves the set of used edges unchanged, so the first
property survives while parked robots no longer sit in front of later ones.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

EXIT = -1  # task id used for exit slots


@dataclass(frozen=True)
class Mover:
    robot: int
    index: int
    tau: float


@dataclass(frozen=True)
class Target:
    task: int  # EXIT for an exit slot
    index: float  # -inf / +inf for exits through the first / second end


@dataclass
class SectionMatch:
    tasks: dict[int, int]  # robot -> task
    exits: dict[int, list[int]]  # end -> robots, earliest first


def _feasible(starts: list[int], ends: list[float], forward: bool) -> bool:
    starts, ends = sorted(starts), sorted(ends)
    if forward:
        return all(s <= e for s, e in zip(starts, ends))
    return all(s >= e for s, e in zip(starts, ends))


def _greedy(group: list[tuple[Mover, Target]], arc: np.ndarray, forward: bool) -> list[tuple[Mover, Target]]:
    if len(group) < 2:
        return group
    movers = [m for m, _ in group]
    targets = sorted((t for _, t in group), key=lambda t: t.index, reverse=forward)
    if forward:
        key = {m.robot: m.tau - arc[m.index] for m in movers}
    else:
        key = {m.robot: m.tau + arc[m.index] for m in movers}
    left = sorted(movers, key=lambda m: (key[m.robot], m.robot))
    out = []
    for k, t in enumerate(targets):
        rest_targets = [u.index for u in targets[k + 1 :]]
        for m in left:
            reach = m.index <= t.index if forward else m.index >= t.index
            if not reach:
                continue
            others = [o.index for o in left if o is not m]
            if _feasible(others, rest_targets, forward):
                out.append((m, t))
                left.remove(m)
                break
        else:  # pragma: no cover - the starting assignment is itself feasible
            raise AssertionError("no feasible robot for target")
    return out


def match_section(
    movers: Sequence[Mover],
    tasks: Sequence[tuple[int, int]],
    exits: tuple[int, int],
    arc: np.ndarray,
) -> SectionMatch:
    """Match robots on a section to its tasks plus ``exits[e]`` departures through end ``e``.

    ``tasks`` holds ``(task id, node index)`` pairs in section order and
    ``arc`` the arc length at every node index.
    """
    targets = (
        [Target(EXIT, -np.inf)] * exits[0]
        + [Target(t, float(q)) for t, q in tasks]
        + [Target(EXIT, np.inf)] * exits[1]
    )
    if len(targets) != len(movers):
        raise ValueError(f"{len(movers)} robots for {len(targets)} destinations")
    order = sorted(movers, key=lambda m: (m.index, m.tau, m.robot))
    base = list(zip(order, targets))
    fwd = [(m, t) for m, t in base if t.index >= m.index]
    bwd = [(m, t) for m, t in base if t.index < m.index]
    tasks_out: dict[int, int] = {}
    leaving: dict[int, list[tuple[float, int]]] = {0: [], 1: []}
    for forward, group in ((True, fwd), (False, bwd)):
        for m, t in _greedy(group, arc, forward):
            if t.task != EXIT:
                tasks_out[m.robot] = t.task
            else:
                end = 1 if forward else 0
                when = m.tau + (arc[-1] - arc[m.index] if forward else arc[m.index])
                leaving[end].append((when, m.robot))
    return SectionMatch(tasks_out, {e: [r for _, r in sorted(v)] for e, v in leaving.items()})
