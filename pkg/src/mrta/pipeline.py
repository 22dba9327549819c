"""End-to-end planner with per-stage timings."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

from .allocation import build_final_plan
from .assignment import (
    CostMatrix,
    InitialPlan,
    PathCache,
    build_cost_matrix,
    redistribution_planning,
    solve_assignment,
)
from .demand import DemandReport, SectionAssociation, analyze, associate
from .instance import Instance
from .plan import FinalPlan
from .revision import RevisedPlan, revise
from .roadmap import Roadmap, gen_roadmap
from .scheduler import Execution, categorize, execute_flows, order_flows

STAGES = ("roadmap", "analysis", "assignment", "revision", "scheduling", "allocation")


@dataclass
class RMResult:
    roadmap: Roadmap
    assoc: SectionAssociation
    report: DemandReport
    costs: CostMatrix
    cache: PathCache
    initial: InitialPlan
    revised: RevisedPlan
    categories: dict[int, str]
    execution: Execution
    plan: FinalPlan
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def post_roadmap_time(self) -> float:
        return sum(v for k, v in self.timings.items() if k != "roadmap")


class _Clock:
    def __init__(self):
        self.timings: dict[str, float] = {}
        self._t = time.perf_counter()

    def lap(self, name: str) -> None:
        now = time.perf_counter()
        self.timings[name] = now - self._t
        self._t = now


def plan_rm(inst: Instance, roadmap: Roadmap | None = None) -> RMResult:
    """Run the roadmap-based redistribution planner on a padded instance."""
    clock = _Clock()
    if roadmap is None:
        roadmap = gen_roadmap(inst)
    clock.lap("roadmap")
    assoc = associate(inst, roadmap)
    report = analyze(assoc, roadmap)
    clock.lap("analysis")
    costs, cache = build_cost_matrix(report, roadmap)
    initial = redistribution_planning(solve_assignment(costs), costs)
    clock.lap("assignment")
    revised = revise(initial, cache, roadmap)
    clock.lap("revision")
    cats = categorize(revised, [s.id for s in roadmap.sections])
    ordered = order_flows(revised, cats, report.robots)
    execution = execute_flows(ordered, assoc, roadmap, inst)
    clock.lap("scheduling")
    plan = build_final_plan(execution, assoc, roadmap, inst)
    clock.lap("allocation")
    plan.timings = dict(clock.timings)
    return RMResult(roadmap, assoc, report, costs, cache, initial, revised, cats, execution, plan, clock.timings)
