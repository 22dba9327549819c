"""Roadmap construction from an approximate generalized Voronoi diagram.

The pipeline is: sample obstacle boundaries, take the Voronoi diagram of the
samples and keep ridges separating different obstacles, prune what a robot of
radius ``r`` cannot reach, split the graph into sections at junction (JC)
nodes and regularize every section to evenly spaced nodes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra
from scipy.spatial import Voronoi, cKDTree

from .errors import DegenerateInput, EmptyRoadmap, Unreachable
from .instance import Instance, Obstacle, ObstacleField, Point, Workspace

# workspace sides carry their own negative ids so open areas still have a skeleton
SIDE_IDS = (-1, -2, -3, -4)
PATH_TOL = 1e-9


# ---------------------------------------------------------------- raw graph


@dataclass
class Graph:
    """Undirected geometric graph used before sections exist."""

    pos: np.ndarray
    adj: dict[int, dict[int, float]] = field(default_factory=dict)

    def add_edge(self, u: int, v: int) -> None:
        if u == v:
            return
        w = float(np.linalg.norm(self.pos[u] - self.pos[v]))
        self.adj.setdefault(u, {})[v] = w
        self.adj.setdefault(v, {})[u] = w

    def remove_node(self, u: int) -> None:
        for v in self.adj.pop(u, {}):
            del self.adj[v][u]

    def nodes(self) -> list[int]:
        return sorted(self.adj)

    def edges(self) -> list[tuple[int, int]]:
        return sorted((u, v) for u in self.adj for v in self.adj[u] if u < v)

    def degree(self, u: int) -> int:
        return len(self.adj[u])

    def drop_isolated(self) -> None:
        for u in [u for u, nb in self.adj.items() if not nb]:
            del self.adj[u]


def sample_obstacle_boundaries(
    obstacles: Sequence[Obstacle], workspace: Workspace, spacing: float
) -> list[tuple[Point, int]]:
    """Points along every boundary, at most ``spacing`` apart, vertices included.

    Obstacle ``k`` is tagged ``k``; the four workspace sides are tagged -1..-4
    (bottom, right, top, left).
    """
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    out: list[tuple[Point, int]] = []

    def ring(vertices: Sequence[Sequence[float]], tags: Sequence[int]) -> None:
        m = len(vertices)
        for k in range(m):
            a = np.asarray(vertices[k], dtype=float)
            b = np.asarray(vertices[(k + 1) % m], dtype=float)
            steps = max(1, math.ceil(np.linalg.norm(b - a) / spacing - 1e-12))
            for s in range(steps):
                p = a + (b - a) * (s / steps)
                out.append((Point(float(p[0]), float(p[1])), tags[k]))

    ring(workspace.corners(), SIDE_IDS)
    for k, ob in enumerate(obstacles):
        ring(ob.vertices, [k] * len(ob.vertices))
    return out


def build_gvd(samples: Sequence[tuple[Point, int]], workspace: Workspace) -> Graph:
    """Voronoi ridges whose two generating samples belong to different obstacles."""
    ids = np.array([t for _, t in samples])
    if len(np.unique(ids)) < 2:
        raise DegenerateInput("all boundary samples belong to one obstacle")
    pts = np.array([p for p, _ in samples], dtype=float)
    vor = Voronoi(pts)
    rp = vor.ridge_points
    rv = np.array([rv if len(rv) == 2 else [-1, -1] for rv in vor.ridge_vertices])
    keep = (ids[rp[:, 0]] != ids[rp[:, 1]]) & (rv[:, 0] >= 0) & (rv[:, 1] >= 0)
    rv = rv[keep]
    verts = vor.vertices
    tol = 1e-9 * max(workspace.width, workspace.height)
    inside = (
        (verts[:, 0] >= workspace.xmin - tol) & (verts[:, 0] <= workspace.xmax + tol)
        & (verts[:, 1] >= workspace.ymin - tol) & (verts[:, 1] <= workspace.ymax + tol)
    )
    rv = rv[inside[rv[:, 0]] & inside[rv[:, 1]]]
    used = np.unique(rv)
    # collapse numerically coincident Voronoi vertices
    rep = {int(u): int(u) for u in used}
    for a, b in sorted(cKDTree(verts[used]).query_pairs(tol)):
        ra, rb = rep[int(used[a])], rep[int(used[b])]
        lo, hi = min(ra, rb), max(ra, rb)
        for k, v in rep.items():
            if v == hi:
                rep[k] = lo
    keep_ids = sorted(set(rep.values()))
    new_id = {old: i for i, old in enumerate(keep_ids)}
    g = Graph(verts[keep_ids].copy())
    for a, b in rv:
        u, v = new_id[rep[int(a)]], new_id[rep[int(b)]]
        if u != v:
            g.add_edge(u, v)
    return g


def prune_inaccessible(graph: Graph, field_: ObstacleField, r: float) -> Graph:
    """Drop nodes with clearance below ``r`` and edges whose segment passes closer than ``r``."""
    nodes = graph.nodes()
    if nodes:
        clear = field_.clearance(graph.pos[nodes])
        for u, c in zip(nodes, clear):
            if c < r:
                graph.remove_node(u)
    edges = graph.edges()
    if edges:
        e = np.array(edges)
        clear = field_.segment_clearance(graph.pos[e[:, 0]], graph.pos[e[:, 1]])
        for (u, v), c in zip(edges, clear):
            if c < r:
                del graph.adj[u][v]
                del graph.adj[v][u]
    graph.drop_isolated()
    if not graph.adj:
        raise EmptyRoadmap("no part of the free space is wide enough for the robots")
    return graph


def _branch(graph: Graph, leaf: int) -> tuple[list[int], float]:
    """Walk from a leaf through degree-2 nodes; return visited nodes and length."""
    chain = [leaf]
    length = 0.0
    prev, cur = None, leaf
    while True:
        nxt = [v for v in graph.adj[cur] if v != prev]
        if not nxt or (cur != leaf and graph.degree(cur) != 2):
            return chain, length
        step = nxt[0]
        length += graph.adj[cur][step]
        prev, cur = cur, step
        chain.append(cur)
        if cur == leaf:
            return chain, length


def prune_spurs(graph: Graph, min_length: float) -> Graph:
    """Remove leaf branches shorter than ``min_length`` that hang off a junction."""
    changed = True
    while changed:
        changed = False
        cands = []
        for u in graph.nodes():
            if graph.degree(u) == 1:
                chain, length = _branch(graph, u)
                if length < min_length and graph.degree(chain[-1]) >= 3:
                    cands.append((length, u, chain))
        for length, u, chain in sorted(cands):
            if u not in graph.adj or graph.degree(chain[-1]) < 3:
                continue
            if any(c not in graph.adj for c in chain):
                continue
            for c in chain[:-1]:
                graph.remove_node(c)
            changed = True
        graph.drop_isolated()
    return graph


def find_jc_nodes(graph: Graph) -> list[int]:
    """Terminal and branching nodes, plus the lowest node of every pure cycle."""
    jc = {u for u in graph.adj if graph.degree(u) != 2}
    seen: set[int] = set()
    for u in graph.nodes():
        if u in seen:
            continue
        comp, stack = [], [u]
        seen.add(u)
        while stack:
            x = stack.pop()
            comp.append(x)
            for y in graph.adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        if not any(x in jc for x in comp):
            jc.add(min(comp))
    return sorted(jc)


@dataclass
class RawSection:
    a: int
    b: int
    inner: list[int]
    length: float


def find_sections(graph: Graph, jc: Sequence[int]) -> list[RawSection]:
    """Split the graph into maximal JC-free chains between JC nodes."""
    jcs = set(jc)
    done: set[tuple[int, int]] = set()
    found: list[RawSection] = []
    for a in sorted(jcs):
        for nb in sorted(graph.adj[a]):
            if (a, nb) in done:
                continue
            chain, length = [], 0.0
            prev, cur = a, nb
            done.add((a, nb))
            done.add((nb, a))
            length += graph.adj[a][nb]
            while cur not in jcs:
                chain.append(cur)
                nxt = next(v for v in graph.adj[cur] if v != prev)
                done.add((cur, nxt))
                done.add((nxt, cur))
                length += graph.adj[cur][nxt]
                prev, cur = cur, nxt
            b = cur
            # canonical orientation: smaller JC first; loops start on the smaller inner id
            if b < a or (a == b and chain and chain[-1] < chain[0]):
                a_, b_, chain = b, a, chain[::-1]
            else:
                a_, b_ = a, b
            found.append(RawSection(a_, b_, chain, length))
    found.sort(key=lambda s: (min(s.a, s.b), max(s.a, s.b), s.inner[0] if s.inner else -1))
    return found


# ---------------------------------------------------------------- regularization


def node_count(length: float, r: float) -> int:
    return int(math.floor(length / (2.0 * r))) + 2


def _walk(poly: np.ndarray, cum: np.ndarray, chord: float, steps: int):
    """Step along the polyline with fixed Euclidean chord; None if it runs off the end."""
    out = []
    seg, t0 = 0, 0.0
    p = poly[0]
    for _ in range(steps):
        hit = None
        k = seg
        while k < len(poly) - 1:
            a, b = poly[k], poly[k + 1]
            d = b - a
            f = a - p
            qa = float(d @ d)
            qb = 2.0 * float(f @ d)
            qc = float(f @ f) - chord * chord
            disc = qb * qb - 4 * qa * qc
            if qa > 0 and disc >= 0:
                sq = math.sqrt(disc)
                lo = t0 if k == seg else 0.0
                for t in sorted(((-qb - sq) / (2 * qa), (-qb + sq) / (2 * qa))):
                    if lo - 1e-12 <= t <= 1.0 + 1e-12 and (k != seg or t > t0 + 1e-15):
                        hit = (k, min(max(t, 0.0), 1.0))
                        break
            if hit:
                break
            k += 1
        if hit is None:
            return None
        seg, t0 = hit
        p = poly[seg] + (poly[seg + 1] - poly[seg]) * t0
        out.append(p)
    return out


def regularize_polyline(poly: np.ndarray, r: float) -> tuple[np.ndarray, float]:
    """Resample a polyline to ``floor(L/2r)+2`` nodes with equal straight-line spacing.

    Endpoints are kept. Returns the node positions and the common spacing.
    """
    poly = np.asarray(poly, dtype=float)
    seglen = np.linalg.norm(np.diff(poly, axis=0), axis=1)
    keep = np.concatenate([[True], seglen > 0])
    poly = poly[keep]
    cum = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(poly, axis=0), axis=1))])
    length = float(cum[-1])
    if length <= 0:
        raise ValueError("section length must be positive")
    n = node_count(length, r)
    end = poly[-1]
    if n == 2:
        return np.array([poly[0], end]), float(np.linalg.norm(end - poly[0]))

    def residual(c: float) -> float:
        pts = _walk(poly, cum, c, n - 2)
        if pts is None:
            return -c
        return float(np.linalg.norm(end - pts[-1])) - c

    # the residual is not monotone on curved or closed chains: scan downward from the
    # arc-length spacing and refine the first (largest) chord that closes the chain
    hi = length / (n - 1)
    grid = hi * np.linspace(1.0, 1e-3, 60)
    vals = [residual(c) for c in grid]
    chord = None
    for k in range(len(grid)):
        if abs(vals[k]) <= 1e-13 * hi:
            chord = float(grid[k])
            break
        if k and (vals[k - 1] < 0) != (vals[k] < 0):
            chord = brentq(residual, grid[k], grid[k - 1], xtol=1e-14 * hi, rtol=4 * np.finfo(float).eps, maxiter=500)
            break
    if chord is None:
        raise ValueError("could not place evenly spaced nodes on section")
    inner = _walk(poly, cum, chord, n - 2)
    nodes = np.vstack([poly[0], np.array(inner), end])
    return nodes, chord


# ---------------------------------------------------------------- roadmap


@dataclass
class RoadmapNode:
    id: int
    position: Point
    kind: str  # "JC" or "inner"
    section_ids: list[int]


@dataclass
class RoadmapEdge:
    u: int
    v: int
    weight: float


@dataclass
class Section:
    id: int
    jc_endpoints: tuple[int, int]
    inner_nodes: list[int]
    length: float
    center_node: int
    spacing: float

    @property
    def nodes(self) -> list[int]:
        return [self.jc_endpoints[0], *self.inner_nodes, self.jc_endpoints[1]]

    @property
    def is_loop(self) -> bool:
        return self.jc_endpoints[0] == self.jc_endpoints[1]


def section_center(section: Section) -> int:
    seq = section.nodes
    return seq[(len(seq) - 1) // 2]


@dataclass
class Roadmap:
    nodes: list[RoadmapNode]
    edges: list[RoadmapEdge]
    sections: list[Section]
    jc_ids: list[int]
    radius: float

    @cached_property
    def positions(self) -> np.ndarray:
        return np.array([n.position for n in self.nodes], dtype=float).reshape(-1, 2)

    @cached_property
    def adjacency(self) -> dict[int, list[tuple[int, float]]]:
        adj: dict[int, list[tuple[int, float]]] = {n.id: [] for n in self.nodes}
        for e in self.edges:
            adj[e.u].append((e.v, e.weight))
            adj[e.v].append((e.u, e.weight))
        for k in adj:
            adj[k].sort()
        return adj

    @cached_property
    def weights(self) -> dict[tuple[int, int], float]:
        w = {}
        for e in self.edges:
            w[(e.u, e.v)] = e.weight
            w[(e.v, e.u)] = e.weight
        return w

    @cached_property
    def edge_section(self) -> dict[tuple[int, int], int]:
        out = {}
        for s in self.sections:
            seq = s.nodes
            for a, b in zip(seq, seq[1:]):
                out.setdefault((a, b), s.id)
                out.setdefault((b, a), s.id)
        return out

    @cached_property
    def node_location(self) -> dict[int, tuple[int, int]]:
        """Inner node id -> (section id, index along the section's node sequence)."""
        out = {}
        for s in self.sections:
            for k, u in enumerate(s.inner_nodes, start=1):
                out[u] = (s.id, k)
        return out

    @cached_property
    def is_jc(self) -> np.ndarray:
        mask = np.zeros(len(self.nodes), dtype=bool)
        mask[self.jc_ids] = True
        return mask

    @cached_property
    def matrix(self) -> csr_matrix:
        n = len(self.nodes)
        if not self.edges:
            return csr_matrix((n, n))
        u = np.array([e.u for e in self.edges] + [e.v for e in self.edges])
        v = np.array([e.v for e in self.edges] + [e.u for e in self.edges])
        w = np.array([e.weight for e in self.edges] * 2)
        return csr_matrix((w, (u, v)), shape=(n, n))

    @cached_property
    def components(self) -> np.ndarray:
        return connected_components(self.matrix, directed=False)[1]

    def distances(self, sources: Sequence[int]) -> np.ndarray:
        """Dijkstra distances from each source to every node (rows follow ``sources``)."""
        src = np.asarray(sources, dtype=np.int64)
        if src.size == 0:
            return np.zeros((0, len(self.nodes)))
        return np.atleast_2d(dijkstra(self.matrix, directed=False, indices=src))

    def path_between(self, a: int, b: int, da: np.ndarray, db: np.ndarray) -> tuple[list[int], float]:
        """Lexicographically smallest shortest path, given distance rows from a and b."""
        total = float(da[b])
        if not math.isfinite(total):
            raise Unreachable(f"nodes {a} and {b} are in different roadmap components")
        tol = PATH_TOL * max(1.0, total)
        seq = [a]
        cur = a
        while cur != b:
            for nb, w in self.adjacency[cur]:
                if abs(da[cur] + w + db[nb] - total) <= tol and da[cur] + w <= da[nb] + tol:
                    cur = nb
                    break
            else:  # pragma: no cover - distances come from the same graph
                raise Unreachable(f"no shortest path from {a} to {b}")
            seq.append(cur)
        length = float(sum(self.weights[(x, y)] for x, y in zip(seq, seq[1:])))
        return seq, length

    def shortest_path(self, a: int, b: int) -> tuple[list[int], float]:
        if a == b:
            return [a], 0.0
        d = self.distances([a, b])
        return self.path_between(a, b, d[0], d[1])

    def to_dict(self) -> dict:
        return {
            "nodes": [
                {"id": n.id, "x": float(n.position[0]), "y": float(n.position[1]), "kind": n.kind}
                for n in self.nodes
            ],
            "edges": [{"u": e.u, "v": e.v, "w": e.weight} for e in self.edges],
            "sections": [
                {
                    "id": s.id,
                    "jc": list(s.jc_endpoints),
                    "inner": list(s.inner_nodes),
                    "length": s.length,
                    "center": s.center_node,
                }
                for s in self.sections
            ],
        }


def regularize(raw: RawSection, graph: Graph, r: float) -> tuple[np.ndarray, float]:
    poly = graph.pos[[raw.a, *raw.inner, raw.b]]
    return regularize_polyline(poly, r)


def assemble(graph: Graph, jc: Sequence[int], raw_sections: Sequence[RawSection], r: float) -> Roadmap:
    """Regularize every section and number the result (JC nodes first)."""
    jc_new = {old: i for i, old in enumerate(sorted(jc))}
    positions: list[np.ndarray] = [graph.pos[old] for old in sorted(jc)]
    nodes_sections: dict[int, list[int]] = {i: [] for i in range(len(jc_new))}
    sections: list[Section] = []
    edges: dict[tuple[int, int], float] = {}
    for sid, raw in enumerate(raw_sections):
        pts, spacing = regularize(raw, graph, r)
        a, b = jc_new[raw.a], jc_new[raw.b]
        if len(pts) == 2 and (min(a, b), max(a, b)) in edges:
            continue
        inner = []
        for p in pts[1:-1]:
            inner.append(len(positions))
            positions.append(p)
            nodes_sections[inner[-1]] = []
        seq = [a, *inner, b]
        sid = len(sections)
        for u in seq:
            if sid not in nodes_sections[u]:
                nodes_sections[u].append(sid)
        for x, y in zip(seq, seq[1:]):
            edges[(min(x, y), max(x, y))] = float(np.linalg.norm(positions[x] - positions[y]))
        sec = Section(sid, (a, b), inner, raw.length, -1, spacing)
        sec.center_node = section_center(sec)
        sections.append(sec)
    nodes = [
        RoadmapNode(i, Point(float(p[0]), float(p[1])), "JC" if i < len(jc_new) else "inner", nodes_sections[i])
        for i, p in enumerate(positions)
    ]
    edge_list = [RoadmapEdge(u, v, w) for (u, v), w in sorted(edges.items())]
    return Roadmap(nodes, edge_list, sections, list(range(len(jc_new))), r)


@dataclass
class RoadmapParams:
    spacing: float | None = None  # boundary sampling, default r/2
    spur_length: float | None = None  # default 2r


def gen_roadmap(inst: Instance, params: RoadmapParams | None = None) -> Roadmap:
    """Build the regularized roadmap of an instance's free space."""
    params = params or RoadmapParams()
    r = inst.robot_radius
    spacing = params.spacing if params.spacing is not None else r / 2
    spur = params.spur_length if params.spur_length is not None else 2 * r
    samples = sample_obstacle_boundaries(inst.obstacles, inst.workspace, spacing)
    graph = build_gvd(samples, inst.workspace)
    graph = prune_inaccessible(graph, inst.field, r)
    graph = prune_spurs(graph, spur)
    jc = find_jc_nodes(graph)
    raw = find_sections(graph, jc)
    return assemble(graph, jc, raw, r)
