"""Section categories, flow ordering and the hypothetical execution of the revised plan."""
from __future__ import annotations

import bisect
import heapq
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .demand import SectionAssociation
from .errors import CyclicDependency, InsufficientRobots
from .fcfs import Mover, SectionMatch, match_section
from .instance import Instance
from .revision import Hop, RevisedPlan
from .roadmap import Roadmap

C1, C2, C3, C4 = "C1", "C2", "C3", "C4"


def categorize(plan: RevisedPlan, section_ids: Sequence[int]) -> dict[int, str]:
    out_ = {f.start for f in plan.flows}
    in_ = {f.end for f in plan.flows}
    cats = {}
    for s in section_ids:
        cats[s] = {(False, False): C1, (True, False): C2, (False, True): C3, (True, True): C4}[
            (s in out_, s in in_)
        ]
    return cats


def order_flows(
    plan: RevisedPlan,
    categories: Mapping[int, str],
    supply: Mapping[int, int] | None = None,
) -> list[Hop]:
    """Execution order: C2->C4, C2->C3, C4->C4 once the sender is full, then C4->C3.

    C4->C4 flows follow a topological order of their dependency graph. If that
    graph has a cycle, flows are released greedily whenever the sender already
    holds enough robots (``supply`` gives the native counts); with no such flow
    left, :class:`CyclicDependency` is raised.
    """
    flows = sorted(plan.flows, key=lambda f: f.key)
    phase = defaultdict(list)
    for f in flows:
        phase[(categories[f.start], categories[f.end])].append(f)
    ordered = phase[(C2, C4)] + phase[(C2, C3)]
    mid = phase[(C4, C4)]
    # inbound C4->C4 flows each sender still waits for
    waiting = defaultdict(int)
    for f in mid:
        waiting[f.end] += 1
    heap = [(f.key, k) for k, f in enumerate(mid) if waiting[f.start] == 0]
    heapq.heapify(heap)
    done = [False] * len(mid)
    held = defaultdict(int)
    if supply is not None:
        held.update(supply)
        for f in ordered:
            held[f.start] -= f.count
            held[f.end] += f.count
    left = len(mid)
    while left:
        if not heap:
            k = _greedy_release(mid, done, held, supply)
        else:
            _, k = heapq.heappop(heap)
            if done[k]:
                continue
        f = mid[k]
        done[k] = True
        left -= 1
        ordered.append(f)
        held[f.start] -= f.count
        held[f.end] += f.count
        waiting[f.end] -= 1
        if waiting[f.end] == 0:
            for j, g in enumerate(mid):
                if g.start == f.end and not done[j]:
                    heapq.heappush(heap, (g.key, j))
    return ordered + phase[(C4, C3)]


def _greedy_release(mid: list[Hop], done: list[bool], held, supply) -> int:
    if supply is not None:
        for k, f in sorted(enumerate(mid), key=lambda kf: kf[1].key):
            if not done[k] and held[f.start] >= f.count:
                return k
    raise CyclicDependency("C4 sections wait on each other and none can send yet")


# ---------------------------------------------------------------- execution


@dataclass
class RobotItinerary:
    robot: int
    origin: int
    hops: list[tuple[int, int]] = field(default_factory=list)  # (section, entering JC)
    waypoints: list[int] = field(default_factory=list)
    traveled: float = 0.0  # off-roadmap leg + roadmap arc so far
    entry_end: int | None = None  # end of the final section it came in through
    # (jc, from section, exit end, to section, entry end) for every JC passed
    crossings: list[tuple[int, int, int, int, int]] = field(default_factory=list)

    @property
    def section(self) -> int:
        return self.hops[-1][0] if self.hops else self.origin

    @property
    def transferred(self) -> bool:
        return bool(self.hops)

    def to_dict(self) -> dict:
        return {
            "robot": self.robot,
            "origin": self.origin,
            "hops": [[s, j] for s, j in self.hops],
            "waypoints": list(self.waypoints),
            "traveled": self.traveled,
        }


@dataclass(frozen=True, order=True)
class LedgerEntry:
    arrival: float
    robot: int
    jc: int
    end: int


@dataclass
class ArrivalLedger:
    entries: dict[int, list[LedgerEntry]] = field(default_factory=lambda: defaultdict(list))

    def add(self, section: int, entry: LedgerEntry) -> None:
        bisect.insort(self.entries[section], entry)

    def to_dict(self) -> dict:
        return {
            str(s): [[e.robot, e.jc, e.arrival] for e in self.entries[s]]
            for s in sorted(self.entries)
            if self.entries[s]
        }


def arc_prefix(roadmap: Roadmap, sid: int) -> np.ndarray:
    seq = roadmap.sections[sid].nodes
    w = [roadmap.weights[(a, b)] for a, b in zip(seq, seq[1:])]
    return np.concatenate([[0.0], np.cumsum(w)])


def walk(seq: Sequence[int], i: int, j: int) -> list[int]:
    """Node ids from index i to index j inclusive, in travel order."""
    if i <= j:
        return list(seq[i : j + 1])
    return list(seq[j : i + 1])[::-1]


@dataclass
class Execution:
    itineraries: list[RobotItinerary]
    ledger: ArrivalLedger
    natives: dict[int, list[int]]  # robots that never left, in section order
    received: dict[int, list[LedgerEntry]]  # transferred robots that stay, by arrival
    matches: dict[int, SectionMatch] = field(default_factory=dict)  # final task per robot

    def roster_sizes(self) -> dict[int, int]:
        return {s: len(self.natives[s]) + len(self.received[s]) for s in self.natives}


def execute_flows(
    flows: Sequence[Hop],
    assoc: SectionAssociation,
    roadmap: Roadmap,
    inst: Instance,
) -> Execution:
    """Move robots hypothetically along the ordered hop flows.

    When a section sends its first robot it has already received everything
    it will get, so all its robots, tasks and departures are matched at once
    by travel distance (see :mod:`.fcfs`). Departures leave earliest first;
    natives usually go before received robots, which are forwarded only
    when the section runs short.
    """
    secs = roadmap.sections
    loc = roadmap.node_location
    prefix = {s.id: arc_prefix(roadmap, s.id) for s in secs}
    robots = np.asarray(inst.robots, dtype=float).reshape(-1, 2)
    its = []
    for i, node in enumerate(assoc.robot_nearest):
        leg = float(np.linalg.norm(robots[i] - roadmap.positions[node]))
        its.append(RobotItinerary(i, loc[node][0], [], [node], leg))
    natives = {s.id: list(assoc.robots_by_section.get(s.id, [])) for s in secs}
    pending: dict[int, list[LedgerEntry]] = {s.id: [] for s in secs}
    ledger = ArrivalLedger()
    due_in: dict[int, int] = defaultdict(int)
    due_out: dict[int, list[int]] = defaultdict(lambda: [0, 0])
    for f in flows:
        due_in[f.end] += f.count
        due_out[f.start][f.exit_end] += f.count
    matches: dict[int, SectionMatch] = {}
    queues: dict[int, dict[int, list[int]]] = {}

    def movers(sid: int) -> list[Mover]:
        last = len(secs[sid].nodes) - 1
        out = [Mover(r, loc[its[r].waypoints[-1]][1], its[r].traveled) for r in natives[sid]]
        out += [Mover(e.robot, last if e.end == 1 else 0, e.arrival) for e in pending[sid]]
        return out

    def tasks_of(sid: int) -> list[tuple[int, int]]:
        return [(t, loc[assoc.task_nearest[t]][1]) for t in assoc.tasks_by_section.get(sid, [])]

    def pick(sid: int, end: int) -> int | None:
        if sid not in queues and due_in[sid] == 0:
            try:
                m = match_section(movers(sid), tasks_of(sid), tuple(due_out[sid]), prefix[sid])
            except ValueError as exc:
                raise InsufficientRobots(f"section {sid}: {exc}") from exc
            matches[sid] = m
            queues[sid] = {e: list(v) for e, v in m.exits.items()}
        if sid in queues:
            q = queues[sid][end]
            return q.pop(0) if q else None
        # released before all inflows arrived (cyclic fallback): nearest native, then earliest arrival
        if natives[sid]:
            return natives[sid][-1] if end == 1 else natives[sid][0]
        return pending[sid][0].robot if pending[sid] else None

    for f in flows:
        seq = secs[f.start].nodes
        last = len(seq) - 1
        exit_idx = last if f.exit_end == 1 else 0
        pre = prefix[f.start]
        for _ in range(f.count):
            rid = pick(f.start, f.exit_end)
            if rid is None:
                raise InsufficientRobots(f"section {f.start} has no robot left for flow to {f.end}")
            it = its[rid]
            if rid in natives[f.start]:
                natives[f.start].remove(rid)
                k = loc[it.waypoints[-1]][1]
            else:
                e = next(e for e in pending[f.start] if e.robot == rid)
                pending[f.start].remove(e)
                k = last if e.end == 1 else 0
            it.waypoints.extend(walk(seq, k, exit_idx)[1:])
            it.traveled += abs(float(pre[exit_idx] - pre[k]))
            it.hops.append((f.end, f.jc))
            it.entry_end = f.entry_end
            it.crossings.append((f.jc, f.start, f.exit_end, f.end, f.entry_end))
            entry = LedgerEntry(it.traveled, rid, f.jc, f.entry_end)
            bisect.insort(pending[f.end], entry)
            ledger.add(f.end, entry)
            due_in[f.end] -= 1
    for s in secs:
        stale = s.id in matches and set(matches[s.id].tasks) != set(natives[s.id]) | {e.robot for e in pending[s.id]}
        if s.id not in matches or stale:
            try:
                matches[s.id] = match_section(movers(s.id), tasks_of(s.id), (0, 0), prefix[s.id])
            except ValueError:
                matches.pop(s.id, None)  # left for allocation to report
    return Execution(its, ledger, natives, pending, dict(sorted(matches.items())))
