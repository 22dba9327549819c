"""Hand-built roadmaps and instances shared by the tests."""
from __future__ import annotations

import numpy as np

from mrta.instance import Instance, Obstacle, Point, Workspace
from mrta.roadmap import Graph, assemble, find_jc_nodes, find_sections


def rect(x0, y0, x1, y1) -> Obstacle:
    return Obstacle((Point(x0, y0), Point(x1, y0), Point(x1, y1), Point(x0, y1)))


def instance(robots, tasks, obstacles=(), ws=(0.0, 0.0, 10.0, 10.0), r=0.25) -> Instance:
    return Instance(
        Workspace(*map(float, ws)),
        r,
        list(obstacles),
        [Point(*map(float, p)) for p in robots],
        [Point(*map(float, p)) for p in tasks],
    )


def graph_from_polylines(polylines) -> Graph:
    """Union of polylines; points with equal coordinates become one node."""
    index: dict[tuple[float, float], int] = {}
    for line in polylines:
        for p in line:
            index.setdefault((float(p[0]), float(p[1])), len(index))
    g = Graph(np.array(list(index), dtype=float))
    for line in polylines:
        for a, b in zip(line, line[1:]):
            g.add_edge(index[tuple(map(float, a))], index[tuple(map(float, b))])
    return g


def roadmap_from_polylines(polylines, r, order=None):
    """Roadmap over the given polylines; ``order`` permutes the raw sections to fix section ids."""
    g = graph_from_polylines(polylines)
    jc = find_jc_nodes(g)
    raw = find_sections(g, jc)
    if order is not None:
        raw = [raw[k] for k in order]
    return assemble(g, jc, raw, r)


def comb(r=0.5):
    """A line y=0 from x=0 to x=40 with upward teeth at x=10, 20, 30.

    Section ids: 2 = [10, 20], 3 = [20, 30], 4 = [30, 40] along the line,
    the rest are the left stub and the teeth.
    """
    lines = [[(x, 0.0) for x in range(0, 41)]]
    for x in (10, 20, 30):
        lines.append([(x, 0.0), (x, 5.0)])
    rm = roadmap_from_polylines(lines, r)
    pos = rm.positions

    def span(s):
        xs = pos[s.nodes][:, 0]
        ys = pos[s.nodes][:, 1]
        return (round(xs.min()), round(xs.max()), round(ys.max()))

    want = [(0, 10, 0), (10, 10, 5), (10, 20, 0), (20, 30, 0), (30, 40, 0), (20, 20, 5), (30, 30, 5)]
    spans = {span(s): k for k, s in enumerate(rm.sections)}
    g = graph_from_polylines(lines)
    jc = find_jc_nodes(g)
    raw = find_sections(g, jc)
    return assemble(g, jc, [raw[spans[w]] for w in want], r)


def on_line(rm, sid, frac, dy=0.05):
    """A point just above the straight section ``sid`` at fraction ``frac`` of its length."""
    s = rm.sections[sid]
    a, b = rm.positions[s.jc_endpoints[0]], rm.positions[s.jc_endpoints[1]]
    p = a + (b - a) * frac
    return (float(p[0]), float(p[1]) + dy)


def edt_clearance(inst: Instance, points, h: float = 0.05) -> np.ndarray:
    """Grid oracle for clearance: distance from each point's cell to the nearest blocked cell.

    Cells whose centers fall inside an obstacle are blocked, and a blocked
    ring surrounds the workspace. The result is never below the true
    clearance by more than half a cell diagonal.
    """
    import shapely
    from scipy.ndimage import distance_transform_edt

    ws = inst.workspace
    nx = int(np.ceil(ws.width / h))
    ny = int(np.ceil(ws.height / h))
    xs = ws.xmin + (np.arange(nx) + 0.5) * h
    ys = ws.ymin + (np.arange(ny) + 0.5) * h
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    free = np.ones((nx + 2, ny + 2), dtype=bool)
    free[0, :] = free[-1, :] = free[:, 0] = free[:, -1] = False
    for ob in inst.obstacles:
        inside = shapely.contains_xy(ob.polygon, gx, gy) | shapely.intersects_xy(ob.polygon.boundary, gx, gy)
        free[1:-1, 1:-1] &= ~inside
    dist = distance_transform_edt(free) * h
    # the blocked ring sits one cell outside the workspace: measure to its inner edge
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    i = np.clip(((pts[:, 0] - ws.xmin) / h).astype(int), 0, nx - 1) + 1
    j = np.clip(((pts[:, 1] - ws.ymin) / h).astype(int), 0, ny - 1) + 1
    return dist[i, j]


def grid_gvd(inst: Instance, h: float):
    """Grid oracle for the GVD: free cell centers whose nearest-boundary label differs from a neighbor's.

    Each obstacle and each workspace side carries its own label. Returns the
    oracle points and the clearance of every returned point.
    """
    import shapely

    ws = inst.workspace
    xs = np.arange(ws.xmin + h / 2, ws.xmax, h)
    ys = np.arange(ws.ymin + h / 2, ws.ymax, h)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    flat = np.column_stack([gx.ravel(), gy.ravel()])
    dists = [flat[:, 1] - ws.ymin, ws.xmax - flat[:, 0], ws.ymax - flat[:, 1], flat[:, 0] - ws.xmin]
    pts = shapely.points(flat)
    for ob in inst.obstacles:
        dists.append(shapely.distance(ob.polygon, pts))
    d = np.vstack(dists)
    label = d.argmin(axis=0).reshape(gx.shape)
    clear = d.min(axis=0).reshape(gx.shape)
    edge = np.zeros(gx.shape, dtype=bool)
    edge[:-1, :] |= label[:-1, :] != label[1:, :]
    edge[1:, :] |= label[:-1, :] != label[1:, :]
    edge[:, :-1] |= label[:, :-1] != label[:, 1:]
    edge[:, 1:] |= label[:, :-1] != label[:, 1:]
    edge &= clear > 0
    return np.column_stack([gx[edge], gy[edge]]), clear[edge]
