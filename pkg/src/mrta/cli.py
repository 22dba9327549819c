"""``mrta`` command: gen, plan, sim, render and bench."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import ALGOS, bench, load_suite, run_planner
from .errors import ParseError, PlanningError, StepLimit, ValidationError
from .generator import MAP_KINDS, RADIUS, gen_instance
from .instance import dumps_instance, load_instance
from .plan import plan_from_dict
from .render import render
from .simulator import SimConfig, check_property1, check_property2, simulate

EXIT_OK, EXIT_INVALID, EXIT_PLANNING, EXIT_STEPS = 0, 2, 3, 4


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _json(obj) -> str:
    return json.dumps(obj, indent=1) + "\n"


def _load_plan(path: str):
    try:
        return plan_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read plan {path}: {exc}") from exc


def cmd_gen(a) -> int:
    inst = gen_instance(a.map, a.N, a.M if a.M is not None else a.N, a.seed, a.radius)
    _write(a.output, dumps_instance(inst.real()))
    return EXIT_OK


def cmd_plan(a) -> int:
    inst = load_instance(a.input)
    planned = run_planner(inst, a.algo)
    res = planned.rm
    dumps = (a.dump_analysis, a.dump_costs, a.dump_flows, a.dump_itineraries)
    if res is None and any(dumps):
        print("warning: --dump-* options only apply to --algo rm", file=sys.stderr)
    if res is not None:
        if a.dump_analysis:
            _write(a.dump_analysis, _json(res.report.to_dict()))
        if a.dump_costs:
            _write(a.dump_costs, res.costs.to_csv())
        if a.dump_flows:
            _write(a.dump_flows, _json({"X_init": res.initial.as_lists(), "X": res.revised.as_lists()}))
        if a.dump_itineraries:
            its = {"itineraries": [it.to_dict() for it in res.execution.itineraries], "ledger": res.execution.ledger.to_dict()}
            _write(a.dump_itineraries, _json(its))
    if a.dump_roadmap:
        _write(a.dump_roadmap, _json(planned.roadmap.to_dict()))
    _write(a.output, planned.plan.dumps())
    for stage, t in planned.timings.items():
        print(f"{stage}: {t:.4f} s", file=sys.stderr)
    print(f"property 1 violations: {len(check_property1(planned.plan))}", file=sys.stderr)
    return EXIT_OK


def _plan_for(a, inst):
    if a.plan:
        return _load_plan(a.plan)
    return run_planner(inst, a.algo).plan


def cmd_sim(a) -> int:
    inst = load_instance(a.input)
    plan = _plan_for(a, inst)
    cfg = SimConfig.for_radius(inst.robot_radius, a.speed, a.dt, record_trace=bool(a.trace), max_steps=a.max_steps)
    trace, metrics = simulate(plan, cfg)
    out = metrics.to_dict()
    out["property1_violations"] = len(check_property1(plan))
    out["property2_incidents"] = len(check_property2(plan, cfg))
    _write(a.output, _json(out))
    if a.trace:
        _write(a.trace, trace.to_csv())
    if a.events:
        _write(a.events, trace.events_json())
    return EXIT_OK


def cmd_render(a) -> int:
    inst = load_instance(a.input)
    plan = flows = None
    if a.roadmap_only:
        from .roadmap import gen_roadmap

        roadmap = gen_roadmap(inst)
    elif a.plan:
        from .roadmap import gen_roadmap

        roadmap, plan = gen_roadmap(inst), _load_plan(a.plan)
    else:
        planned = run_planner(inst, a.algo)
        roadmap, plan = planned.roadmap, planned.plan
        if a.flows and planned.rm is not None:
            flows = planned.rm.revised.as_lists()
    _write(a.output, render(inst, roadmap, plan, flows))
    return EXIT_OK


def cmd_bench(a) -> int:
    try:
        runs = load_suite(Path(a.input).read_text(encoding="utf-8"))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ParseError(f"bad suite file {a.input}: {exc}") from exc
    _write(a.output, bench(runs, a.speed, a.dt, a.timings, a.jobs))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mrta", description="Roadmap-based multi-robot task allocation.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a random instance")
    g.add_argument("--map", choices=MAP_KINDS, default="rooms")
    g.add_argument("-N", type=int, default=10, help="robots")
    g.add_argument("-M", type=int, default=None, help="tasks (default: N)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--radius", type=float, default=RADIUS)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    def algo(q):
        q.add_argument("--algo", choices=ALGOS, default="rm")
        q.add_argument("--seed", type=int, default=0, help="accepted for symmetry; planning has no randomness")

    pl = sub.add_parser("plan", help="plan an instance")
    pl.add_argument("-i", "--input", required=True)
    pl.add_argument("-o", "--output")
    algo(pl)
    pl.add_argument("--dump-analysis", metavar="PATH")
    pl.add_argument("--dump-costs", metavar="PATH")
    pl.add_argument("--dump-flows", metavar="PATH")
    pl.add_argument("--dump-itineraries", metavar="PATH")
    pl.add_argument("--dump-roadmap", metavar="PATH")
    pl.set_defaults(func=cmd_plan)

    def motion(q):
        q.add_argument("--speed", type=float, default=1.0)
        q.add_argument("--dt", type=float, default=None, help="default r / (2 speed)")

    sm = sub.add_parser("sim", help="simulate a plan")
    sm.add_argument("-i", "--input", required=True)
    sm.add_argument("-o", "--output", help="metrics JSON")
    sm.add_argument("--plan", help="plan JSON (default: plan with --algo)")
    algo(sm)
    motion(sm)
    sm.add_argument("--max-steps", type=int, default=None)
    sm.add_argument("--trace", metavar="CSV")
    sm.add_argument("--events", metavar="JSON")
    sm.set_defaults(func=cmd_sim)

    rd = sub.add_parser("render", help="draw an SVG")
    rd.add_argument("-i", "--input", required=True)
    rd.add_argument("-o", "--output")
    rd.add_argument("--plan", help="plan JSON to overlay")
    rd.add_argument("--roadmap-only", action="store_true")
    rd.add_argument("--flows", action="store_true", help="draw section flows (rm only)")
    algo(rd)
    rd.set_defaults(func=cmd_render)

    b = sub.add_parser("bench", help="run a benchmark suite")
    b.add_argument("-i", "--input", required=True, help="suite JSON")
    b.add_argument("-o", "--output")
    motion(b)
    b.add_argument("--timings", action="store_true", help="add wall-clock columns")
    b.add_argument("--jobs", type=int, default=1)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    a = build_parser().parse_args(argv)
    try:
        return a.func(a)
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except PlanningError as exc:
        print(f"planning failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PLANNING
    except StepLimit as exc:
        print(f"simulation stopped: {exc}", file=sys.stderr)
        return EXIT_STEPS


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
