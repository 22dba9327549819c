"""Planner dispatch and benchmark sweeps with CSV output."""
from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .baselines import BASELINES
from .errors import MRTAError, StepLimit
from .generator import MAP_KINDS, RADIUS, gen_instance
from .instance import Instance, _num
from .pipeline import STAGES, RMResult, plan_rm
from .plan import FinalPlan
from .roadmap import Roadmap, gen_roadmap
from .simulator import SimConfig, check_property1, simulate

ALGOS = ("rm", *BASELINES)


@dataclass
class Planned:
    plan: FinalPlan
    roadmap: Roadmap
    timings: dict[str, float]
    rm: RMResult | None = None


def run_planner(inst: Instance, algo: str = "rm", roadmap: Roadmap | None = None) -> Planned:
    if algo == "rm":
        res = plan_rm(inst, roadmap)
        return Planned(res.plan, res.roadmap, dict(res.timings), res)
    if algo not in BASELINES:
        raise ValueError(f"unknown algorithm {algo!r}; choose from {', '.join(ALGOS)}")
    t0 = time.perf_counter()
    roadmap = roadmap or gen_roadmap(inst)
    t1 = time.perf_counter()
    plan = BASELINES[algo](inst, roadmap)
    t2 = time.perf_counter()
    return Planned(plan, roadmap, {"roadmap": t1 - t0, "assignment": t2 - t1})


@dataclass(frozen=True)
class Run:
    map: str
    n: int
    m: int
    seed: int
    algo: str
    radius: float = RADIUS


def load_suite(data) -> list[Run]:
    """Expand ``{"runs": [{"map", "N", "M", "seeds", "algos", "radius"}, ...]}`` into runs, in file order.

    ``M`` defaults to ``N``, ``algos`` to ``["rm"]`` and ``radius`` to the generator default.
    """
    if isinstance(data, str):
        data = json.loads(data)
    groups = data["runs"] if isinstance(data, dict) and "runs" in data else data
    if isinstance(groups, dict):
        groups = [groups]
    runs = []
    for g in groups:
        kind = g["map"]
        if kind not in MAP_KINDS:
            raise ValueError(f"unknown map kind {kind!r}")
        algos = g.get("algos", ["rm"])
        for a in algos:
            if a not in ALGOS:
                raise ValueError(f"unknown algorithm {a!r}")
        for seed in g["seeds"]:
            for a in algos:
                runs.append(Run(kind, int(g["N"]), int(g.get("M", g["N"])), int(seed), a, float(g.get("radius", RADIUS))))
    return runs


CONFLICTS = ("edge-swap", "node-conflict", "blocking")
BASE_COLUMNS = [
    "algo", "map", "N", "M", "seed", "status", "makespan", "sum_of_costs",
    *(f"conflicts_{c.replace('-', '_')}" for c in CONFLICTS),
    "deadlock", "completion_rate", "property1_violations",
]


def run_one(run: Run, speed: float = 1.0, dt: float | None = None) -> dict:
    row: dict = {"algo": run.algo, "map": run.map, "N": run.n, "M": run.m, "seed": run.seed}
    try:
        inst = gen_instance(run.map, run.n, run.m, run.seed, run.radius)
        planned = run_planner(inst, run.algo)
        cfg = SimConfig.for_radius(inst.robot_radius, speed, dt)
        _, metrics = simulate(planned.plan, cfg)
    except StepLimit as e:
        row["status"] = f"step-limit: {e}"
        return row
    except MRTAError as e:
        row["status"] = f"{type(e).__name__}: {e}"
        return row
    row.update(
        status="ok" if not metrics.deadlock else "deadlock",
        makespan="" if metrics.makespan is None else _num(metrics.makespan),
        sum_of_costs=_num(metrics.sum_of_costs),
        deadlock=int(metrics.deadlock),
        completion_rate=_num(metrics.completion_rate),
        property1_violations=len(check_property1(planned.plan)),
    )
    for c in CONFLICTS:
        row[f"conflicts_{c.replace('-', '_')}"] = metrics.conflicts[c]
    for s in STAGES:
        row[f"t_{s}"] = planned.timings.get(s, 0.0)
    return row


def _star(args):
    return run_one(*args)


def bench(runs: list[Run], speed: float = 1.0, dt: float | None = None, timings: bool = False, jobs: int = 1) -> str:
    """One CSV row per run, in suite order.

    Wall-clock columns change from run to run, so they are only written when
    ``timings`` is set; without them repeated sweeps give identical bytes.
    """
    args = [(r, speed, dt) for r in runs]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            rows = list(pool.map(_star, args))
    else:
        rows = [_star(a) for a in args]
    cols = BASE_COLUMNS + ([f"t_{s}" for s in STAGES] if timings else [])
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for row in rows:
        if timings:
            row = {k: (f"{v:.6f}" if k.startswith("t_") and isinstance(v, float) else v) for k, v in row.items()}
        w.writerow(row)
    return buf.getvalue()
