"""First-come-first-serve task allocation inside each destination section."""
from __future__ import annotations

from typing import Sequence

from .demand import SectionAssociation
from .errors import CountMismatch
from .instance import Instance
from .plan import FinalPlan, assemble_plan
from .roadmap import Roadmap
from .scheduler import Execution, walk


def estimate_arrivals(execution: Execution) -> dict[int, float]:
    """Distance each robot travels before entering its final section (0 if it never moves)."""
    return {it.robot: (it.traveled if it.transferred else 0.0) for it in execution.itineraries}


def allocate_section(
    incoming_left: Sequence[int],
    incoming_right: Sequence[int],
    inner: Sequence[int],
    tasks: Sequence[int],
) -> dict[int, int]:
    """Split the ordered tasks into left, inner and right groups.

    ``tasks`` run from the first JC endpoint to the second, incoming robots
    are listed by arrival and inner robots by position. On each side the
    earliest arrival takes the task furthest from its entry, so parked robots
    never sit in front of later ones.
    """
    nl, nr, ni = len(incoming_left), len(incoming_right), len(inner)
    if nl + nr + ni != len(tasks):
        raise CountMismatch(f"{nl + nr + ni} robots for {len(tasks)} tasks")
    out = {}
    for k, rid in enumerate(incoming_left):
        out[rid] = tasks[nl - 1 - k]
    for k, rid in enumerate(inner):
        out[rid] = tasks[nl + k]
    base = len(tasks) - nr
    for k, rid in enumerate(incoming_right):
        out[rid] = tasks[base + k]
    return out


def build_final_plan(
    execution: Execution,
    assoc: SectionAssociation,
    roadmap: Roadmap,
    inst: Instance,
) -> FinalPlan:
    allocation: dict[int, int] = {}
    for s in roadmap.sections:
        roster = len(execution.natives[s.id]) + len(execution.received[s.id])
        tasks = assoc.tasks_by_section.get(s.id, [])
        if roster != len(tasks) or s.id not in execution.matches:
            raise CountMismatch(f"section {s.id}: {roster} robots for {len(tasks)} tasks")
        allocation.update(execution.matches[s.id].tasks)
    node_paths = {}
    loc = roadmap.node_location
    for it in execution.itineraries:
        sec = roadmap.sections[it.section]
        seq = sec.nodes
        goal = loc[assoc.task_nearest[allocation[it.robot]]][1]
        if it.transferred:
            here = len(seq) - 1 if it.entry_end == 1 else 0
        else:
            here = loc[it.waypoints[-1]][1]
        node_paths[it.robot] = list(it.waypoints) + walk(seq, here, goal)[1:]
    return assemble_plan(inst, roadmap, allocation, node_paths)
