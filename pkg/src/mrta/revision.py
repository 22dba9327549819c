"""Split center-to-center flows into hops between adjacent sections and merge them."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Sequence

from .assignment import InitialPlan, PathCache
from .roadmap import Roadmap, Section


@dataclass(frozen=True)
class Hop:
    """A move from one section into an adjacent one.

    ``exit_end``/``entry_end`` say which end (0 = first JC endpoint, 1 = second)
    of each section the move uses, which matters for loops and parallel sections.
    """

    start: int
    end: int
    count: int
    jc: int
    exit_end: int
    entry_end: int

    @property
    def key(self) -> tuple[int, int, int, int]:
        return (self.start, self.end, self.exit_end, self.entry_end)


@dataclass
class RevisedPlan:
    flows: list[Hop]

    def as_lists(self) -> list[list[int]]:
        return [[f.start, f.end, f.count] for f in self.flows]


def _end_of(section: Section, jc: int, inner: int | None) -> int:
    seq = section.nodes
    if inner is None:
        return 0 if seq[0] == jc else 1
    if seq[0] == jc and seq[1] == inner:
        return 0
    return 1


def crossings(path: Sequence[int], roadmap: Roadmap, first: int, last: int) -> list[tuple[int, int, int, int, int]]:
    """Section runs of ``path`` as (from, to, jc, exit_end, entry_end) tuples."""
    runs: list[list] = []  # [section, first edge, last edge]
    for x, y in zip(path, path[1:]):
        s = roadmap.edge_section[(x, y)]
        if runs and runs[-1][0] == s:
            runs[-1][2] = (x, y)
        else:
            runs.append([s, (x, y), (x, y)])
    secs = roadmap.sections
    if not runs or runs[0][0] != first:
        runs.insert(0, [first, None, None])
    if runs[-1][0] != last:
        runs.append([last, None, None])
    out = []
    for (s, _, s_last), (t, t_first, _) in zip(runs, runs[1:]):
        if s_last is not None:
            jc = s_last[1]
            exit_end = _end_of(secs[s], jc, s_last[0])
        else:
            jc = t_first[0] if t_first is not None else path[0]
            exit_end = _end_of(secs[s], jc, None)
        if t_first is not None:
            entry_end = _end_of(secs[t], t_first[0], t_first[1])
        else:
            entry_end = _end_of(secs[t], jc, None)
        out.append((s, t, jc, exit_end, entry_end))
    return out


def decompose(path: Sequence[int], roadmap: Roadmap, first: int, last: int) -> list[int]:
    """Ordered sections visited by a center-to-center path, from ``first`` to ``last``."""
    if first == last:
        return [first]
    hops = crossings(path, roadmap, first, last)
    return [hops[0][0]] + [h[1] for h in hops]


def revise(init: InitialPlan, cache: PathCache, roadmap: Roadmap) -> RevisedPlan:
    """Replace each flow by unit hops along its path, keeping its count, then merge equal hops."""
    total: dict[tuple[int, int, int, int], int] = defaultdict(int)
    jcs: dict[tuple[int, int, int, int], int] = {}
    for f in init.flows:
        path, _ = cache.path(f.start, f.end)
        for s, t, jc, xe, ne in crossings(path, roadmap, f.start, f.end):
            total[(s, t, xe, ne)] += f.count
            jcs[(s, t, xe, ne)] = jc
    return RevisedPlan([Hop(k[0], k[1], n, jcs[k], k[2], k[3]) for k, n in sorted(total.items())])
