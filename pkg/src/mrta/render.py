"""SVG views of an instance, its roadmap, section flows and robot paths."""
from __future__ import annotations

import colorsys
from typing import Iterable, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .instance import Instance
from .plan import FinalPlan
from .roadmap import Roadmap

SCALE = 40.0  # pixels per meter


def _color(k: int, n: int) -> str:
    r, g, b = colorsys.hsv_to_rgb((k * 0.618034) % 1.0, 0.75, 0.85)
    return f"#{int(r * 255):02x}{int(g * 255):02x}{int(b * 255):02x}"


class _Canvas:
    def __init__(self, inst: Instance):
        ws = inst.workspace
        self.ws = ws
        self.w = ws.width * SCALE
        self.h = ws.height * SCALE
        self.parts: list[str] = []

    def xy(self, p) -> tuple[float, float]:
        return (p[0] - self.ws.xmin) * SCALE, (self.ws.ymax - p[1]) * SCALE

    def pts(self, seq: Iterable) -> str:
        return " ".join("{:.2f},{:.2f}".format(*self.xy(p)) for p in seq)

    def add(self, s: str) -> None:
        self.parts.append(s)

    def svg(self) -> str:
        head = (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.w:.0f}" height="{self.h:.0f}" '
            f'viewBox="0 0 {self.w:.2f} {self.h:.2f}">\n'
            '<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="6" markerHeight="6" '
            'orient="auto-start-reverse"><path d="M0,0 L10,5 L0,10 z" fill="#c0392b"/></marker></defs>\n'
            f'<rect x="0" y="0" width="{self.w:.2f}" height="{self.h:.2f}" fill="white" stroke="black"/>\n'
        )
        return head + "\n".join(self.parts) + "\n</svg>\n"


def render(
    inst: Instance,
    roadmap: Roadmap | None = None,
    plan: FinalPlan | None = None,
    flows: Sequence | None = None,
    trace_positions: dict[int, np.ndarray] | None = None,
) -> str:
    """Layered SVG: obstacles, roadmap, flow arrows, planned paths and entities.

    ``flows`` holds ``(start, end, count)`` section flows, drawn between section
    centers. ``trace_positions`` maps robots to simulated positions over time
    and is drawn dashed on top of the planned paths.
    """
    c = _Canvas(inst)
    c.add('<g id="obstacles" fill="#7f8c8d" stroke="none">')
    for ob in inst.obstacles:
        c.add(f'<polygon points="{c.pts(ob.vertices)}"/>')
    c.add("</g>")
    if roadmap is not None:
        pos = roadmap.positions
        c.add('<g id="roadmap" stroke="#95a5a6" stroke-width="1" fill="none">')
        for e in roadmap.edges:
            (x1, y1), (x2, y2) = c.xy(pos[e.u]), c.xy(pos[e.v])
            c.add(f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}"/>')
        c.add("</g>")
        c.add('<g id="nodes">')
        for n in roadmap.nodes:
            x, y = c.xy(n.position)
            if n.kind == "JC":
                c.add(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="4" fill="#e67e22"/>')
            else:
                c.add(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="1.5" fill="#95a5a6"/>')
        c.add("</g>")
        if flows:
            centers = {s.id: pos[s.center_node] for s in roadmap.sections}
            c.add('<g id="flows" stroke="#c0392b" stroke-width="2" fill="#c0392b" font-size="12">')
            for start, end, count in flows:
                (x1, y1), (x2, y2) = c.xy(centers[start]), c.xy(centers[end])
                c.add(f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" marker-end="url(#arrow)"/>')
                c.add(f'<text x="{(x1 + x2) / 2:.2f}" y="{(y1 + y2) / 2 - 3:.2f}" stroke="none">{int(count)}</text>')
            c.add("</g>")
    if plan is not None:
        ids = plan.robots()
        c.add('<g id="paths" fill="none" stroke-width="1.5">')
        for k, i in enumerate(ids):
            c.add(f'<polyline data-robot="{i}" stroke="{_color(k, len(ids))}" points="{c.pts(plan.paths[i])}"/>')
        c.add("</g>")
    if trace_positions:
        c.add('<g id="trace" fill="none" stroke-width="1" stroke-dasharray="3,2">')
        for k, (i, pts) in enumerate(sorted(trace_positions.items())):
            c.add(f'<polyline data-robot="{i}" stroke="{_color(k, len(trace_positions))}" points="{c.pts(pts)}"/>')
        c.add("</g>")
    rr = inst.robot_radius * SCALE
    c.add('<g id="entities">')
    for i, p in enumerate(inst.robots[: inst.n_robots]):
        x, y = c.xy(p)
        c.add(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{rr:.2f}" fill="#2980b9"><title>{escape(f"robot {i}")}</title></circle>')
    for j, p in enumerate(inst.tasks[: inst.n_tasks]):
        x, y = c.xy(p)
        c.add(
            f'<rect x="{x - rr:.2f}" y="{y - rr:.2f}" width="{2 * rr:.2f}" height="{2 * rr:.2f}" fill="none" '
            f'stroke="#27ae60" stroke-width="2"><title>{escape(f"task {j}")}</title></rect>'
        )
    c.add("</g>")
    return c.svg()
