"""Discrete-time replay of a plan with reactive waiting, plus static plan checks."""
from __future__ import annotations

import io
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import StepLimit
from .plan import FinalPlan, path_length
from .scheduler import RobotItinerary

EVENT_TYPES = ("edge-swap", "node-conflict", "blocking", "wait", "done")


@dataclass(frozen=True)
class SimConfig:
    speed: float = 1.0
    dt: float = 0.1
    conflict_radius: float = 0.5
    max_steps: int | None = None  # None: derived from the longest path
    record_trace: bool = False

    def __post_init__(self):
        if not (self.speed > 0 and self.dt > 0):
            raise ValueError("speed and dt must be positive")

    @classmethod
    def for_radius(cls, r: float, speed: float = 1.0, dt: float | None = None, **kw) -> "SimConfig":
        return cls(speed=speed, dt=dt if dt is not None else r / (2 * speed), conflict_radius=2 * r, **kw)

    def step_limit(self, longest: float) -> int:
        if self.max_steps is not None:
            return self.max_steps
        return max(10, math.ceil(10 * longest / (self.speed * self.dt)))


@dataclass
class Event:
    type: str
    time: float
    robots: list[int]
    location: list[float]

    def to_dict(self) -> dict:
        return {"type": self.type, "time": self.time, "robots": self.robots, "location": self.location}


@dataclass
class Metrics:
    makespan: float | None
    sum_of_costs: float
    conflicts: dict[str, int]
    deadlock: bool
    completion_rate: float
    completion_times: dict[int, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "makespan": self.makespan,
            "sum_of_costs": self.sum_of_costs,
            "conflicts": dict(self.conflicts),
            "deadlock": self.deadlock,
            "completion_rate": self.completion_rate,
        }


@dataclass
class SimTrace:
    dt: float
    rows: list[tuple[int, int, float, float, str]]
    events: list[Event]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("step,robot,x,y,state\n")
        for step, rid, x, y, state in self.rows:
            buf.write(f"{step},{rid},{x:.9g},{y:.9g},{state}\n")
        return buf.getvalue()

    def events_json(self) -> str:
        return json.dumps([e.to_dict() for e in self.events]) + "\n"


class _Robot:
    __slots__ = ("id", "path", "seglen", "nodes", "k", "offset", "done", "finish", "waiting")

    def __init__(self, rid: int, path: np.ndarray, nodes: Sequence[int]):
        self.id = rid
        self.path = np.asarray(path, dtype=float)
        self.seglen = np.linalg.norm(np.diff(self.path, axis=0), axis=1)
        # waypoint k+1 sits on nodes[k]; waypoint 0 is the start, the last one the task
        self.nodes = list(nodes)
        self.k = 0
        self.offset = 0.0
        self.done = len(self.seglen) == 0
        self.finish = 0.0 if self.done else None
        self.waiting: str | None = None

    def position(self) -> np.ndarray:
        if self.done:
            return self.path[-1]
        L = self.seglen[self.k]
        if L <= 0:
            return self.path[self.k]
        return self.path[self.k] + (self.path[self.k + 1] - self.path[self.k]) * (self.offset / L)

    def node_at(self, w: int) -> int | None:
        return self.nodes[w - 1] if 1 <= w <= len(self.nodes) else None

    def edge(self) -> tuple[int, int] | None:
        a, b = self.node_at(self.k), self.node_at(self.k + 1)
        if a is None or b is None or a == b:
            return None
        return (a, b)

    @property
    def destination(self) -> int | None:
        return self.nodes[-1] if self.nodes else None


def simulate(plan: FinalPlan, cfg: SimConfig) -> tuple[SimTrace, Metrics]:
    """Step every real robot along its path at ``cfg.speed``.

    A robot holds still for the rest of a step when another robot is on its
    edge in the opposite direction (edge-swap), or when an active robot closer
    to its next waypoint is within ``cfg.conflict_radius`` (node-conflict).
    Proximity waits are soft: if they alone stall every robot, the lowest id
    among the waiting robots moves anyway. Finished robots park at their task
    positions; reaching a node where one of them ended its roadmap path is
    recorded as a blocking event. A step in which nobody moves ends the run
    as a deadlock.
    """
    robots = [_Robot(i, plan.paths[i], plan.node_paths[i]) for i in plan.robots()]
    longest = max((path_length(r.path) for r in robots), default=0.0)
    limit = cfg.step_limit(longest)
    step_len = cfg.speed * cfg.dt
    events: list[Event] = []
    rows: list[tuple[int, int, float, float, str]] = []
    counts = {t: 0 for t in EVENT_TYPES if t != "done"}
    wait_start: dict[int, float] = {}
    parked: dict[int, int] = {}
    for r in robots:
        if r.done and r.destination is not None:
            parked.setdefault(r.destination, r.id)

    def record(step: int) -> None:
        if cfg.record_trace:
            for r in robots:
                p = r.position()
                state = "done" if r.done else (r.waiting or "moving")
                rows.append((step, r.id, float(p[0]), float(p[1]), state))

    record(0)
    step = 0
    deadlock = False
    R = cfg.conflict_radius
    while not all(r.done for r in robots):
        if step >= limit:
            raise StepLimit(f"simulation exceeded {limit} steps")
        active = [r for r in robots if not r.done]
        pos0 = np.array([r.position() for r in active])
        ids0 = np.array([r.id for r in active])
        edges0: dict[tuple[int, int], int] = {}
        for r in active:
            e = r.edge()
            if e is not None:
                edges0.setdefault(e, r.id)
        parked0 = dict(parked)
        t0 = step * cfg.dt

        def blocker(r: _Robot, here: np.ndarray, soft: bool) -> tuple[str, int, np.ndarray] | None:
            w = r.k + 1
            node = r.node_at(w)
            target = r.path[w]
            e = r.edge()
            if e is not None and (e[1], e[0]) in edges0:
                return "edge-swap", edges0[(e[1], e[0])], target
            if not soft:
                return None
            d = np.hypot(*(pos0 - target).T)
            mine = float(np.hypot(*(here - target)))
            close = (d < R) & (ids0 != r.id) & ((d < mine) | ((d == mine) & (ids0 < r.id)))
            if close.any():
                cand = np.nonzero(close)[0]
                j = cand[np.lexsort((ids0[cand], d[cand]))[0]]
                return "node-conflict", int(ids0[j]), target
            return None

        def advance(r: _Robot, soft: bool = True):
            budget = step_len
            here = r.position()
            why = None
            moved = False
            while budget > 0 and not r.done:
                why = blocker(r, here, soft)
                if why is not None:
                    break
                rest = r.seglen[r.k] - r.offset
                moved = True
                if rest > budget:
                    r.offset += budget
                    budget = 0.0
                else:
                    budget -= rest
                    r.k += 1
                    r.offset = 0.0
                    node = r.node_at(r.k)
                    if node is not None and node in parked0 and node != r.destination:
                        # parked robots sit off the roadmap; passing one is a conflict, not a stop
                        counts["blocking"] += 1
                        events.append(Event("blocking", t0, [r.id, parked0[node]], [float(x) for x in r.path[r.k]]))
                    if r.k == len(r.seglen):
                        r.done = True
                        r.finish = t0 + (step_len - budget) / cfg.speed
                        events.append(Event("done", r.finish, [r.id], [float(x) for x in r.path[-1]]))
                here = r.position()
            if why is not None and budget > 0:
                kind, other, where = why
                if r.waiting != kind:
                    if r.waiting is None:
                        wait_start[r.id] = t0
                    counts[kind] += 1
                    events.append(Event(kind, t0, [r.id, other], [float(x) for x in where]))
                r.waiting = kind
            elif r.waiting is not None:
                counts["wait"] += 1
                events.append(Event("wait", t0, [r.id], [float(t0 - wait_start.pop(r.id))]))
                r.waiting = None
            return moved

        moved = False
        for r in active:
            moved = advance(r) or moved
        if not moved:
            # proximity waits are soft: on a stalemate the lowest id goes first
            soft_wait = [r for r in active if r.waiting == "node-conflict"]
            if soft_wait:
                moved = advance(soft_wait[0], soft=False)
        for r in active:
            if r.done and r.destination is not None:
                parked.setdefault(r.destination, r.id)
        step += 1
        record(step)
        if not moved:
            deadlock = True
            break
    done = [r for r in robots if r.done]
    times = {r.id: float(r.finish) for r in done}
    complete = len(done) / len(robots) if robots else 1.0
    metrics = Metrics(
        makespan=max(times.values(), default=0.0) if complete == 1.0 else None,
        sum_of_costs=float(sum(times.values())),
        conflicts=counts,
        deadlock=deadlock,
        completion_rate=complete,
        completion_times=times,
    )
    return SimTrace(cfg.dt, rows, events), metrics


# ---------------------------------------------------------------- static checks


def check_property1(plan: FinalPlan) -> list[tuple[int, int]]:
    """Roadmap edges that some paths use in one direction and others in the other."""
    used = plan.directed_edges()
    return sorted({(min(a, b), max(a, b)) for a, b in used if (b, a) in used})


def _node_times(plan: FinalPlan, i: int, speed: float) -> np.ndarray:
    path = plan.paths[i]
    cum = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(path, axis=0), axis=1))])
    return cum[1 : 1 + len(plan.node_paths[i])] / speed


def check_property2(plan: FinalPlan, cfg: SimConfig) -> list[dict]:
    """Parked robots sitting on a node that another robot has not yet passed.

    Robot ``i`` occupies its last roadmap node from the moment it reaches it.
    Every other robot whose path goes through that node must get there
    strictly earlier, assuming everyone moves at ``cfg.speed`` without waiting.
    """
    passes: dict[int, list[tuple[int, float]]] = defaultdict(list)
    arrive = {}
    for i in plan.robots():
        seq = plan.node_paths[i]
        if not seq:
            continue
        t = _node_times(plan, i, cfg.speed)
        last: dict[int, float] = {}
        for node, tk in zip(seq[:-1], t[:-1]):
            if node != seq[-1]:
                last[node] = float(tk)
        for node, tk in last.items():
            passes[node].append((i, tk))
        arrive[i] = (seq[-1], float(t[-1]))
    out = []
    for i, (node, t_park) in sorted(arrive.items()):
        for j, t_pass in passes.get(node, []):
            if j != i and t_pass >= t_park:
                out.append({"parked": i, "blocked": j, "node": node, "t_park": t_park, "t_pass": t_pass})
    return out


def check_jc_direction(itineraries: Iterable[RobotItinerary]) -> list[int]:
    """JC nodes where some section end is used both to enter and to leave the node."""
    ports: dict[int, dict[tuple[int, int], set[str]]] = defaultdict(lambda: defaultdict(set))
    for it in itineraries:
        for jc, a, a_end, b, b_end in it.crossings:
            ports[jc][(a, a_end)].add("in")
            ports[jc][(b, b_end)].add("out")
    return sorted(jc for jc, p in ports.items() if any(len(v) == 2 for v in p.values()))
