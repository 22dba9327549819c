"""Hungarian method (shortest augmenting path form) with deterministic tie-breaking."""
from __future__ import annotations

import numpy as np


def _solve(cost: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (row->col, row potentials, col potentials) for a square matrix."""
    n = cost.shape[0]
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.int64)  # p[j]: row (1-based) matched to column j
    way = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used
            free[0] = False
            cur = cost[i0 - 1] - u[i0] - v[1:]
            better = free[1:] & (cur < minv[1:])
            minv[1:][better] = cur[better]
            way[1:][better] = j0
            cand = np.where(free[1:], minv[1:], np.inf)
            j1 = int(np.argmin(cand)) + 1
            delta = cand[j1 - 1]
            u[p[used]] += delta
            v[used] -= delta
            minv[free] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    row_to_col = np.empty(n, dtype=np.int64)
    row_to_col[p[1:] - 1] = np.arange(n)
    return row_to_col, u[1:], v[1:]


def _lexicographic(match: np.ndarray, tight: np.ndarray) -> np.ndarray:
    """Rewrite a perfect matching inside ``tight`` into the lexicographically smallest one.

    Rows are fixed in order; row ``i`` moves to the smallest tight column from
    which an alternating path leads back to its current column.
    """
    n = len(match)
    match = match.copy()
    owner = np.empty(n, dtype=np.int64)
    owner[match] = np.arange(n)
    for i in range(n):
        target = match[i]
        if not tight[i, :target].any():
            continue
        parent = np.full(n, -1, dtype=np.int64)
        reach = np.zeros(n, dtype=bool)
        reach[target] = True
        frontier = np.array([target])
        open_rows = np.zeros(n, dtype=bool)
        open_rows[i + 1:] = True
        while frontier.size:
            sub = tight[:, frontier] & open_rows[:, None]
            rows = np.nonzero(sub.any(axis=1))[0]
            if rows.size == 0:
                break
            open_rows[rows] = False
            cols = match[rows]
            new = ~reach[cols]
            rows, cols = rows[new], cols[new]
            # each row moves to the first frontier column it is tight with
            parent[cols] = frontier[np.argmax(sub[rows], axis=1)]
            reach[cols] = True
            frontier = cols
        options = np.nonzero(tight[i] & reach)[0]
        j = int(options[0])
        if j == target:
            continue
        chain = []
        col = j
        while col != target:
            chain.append((owner[col], parent[col]))
            col = parent[col]
        for k, c in chain:
            match[k] = c
            owner[c] = k
        match[i] = j
        owner[j] = i
    return match


def hungarian(cost, tie_tol: float = 1e-9) -> np.ndarray:
    """Minimum-cost perfect assignment of a square matrix.

    Returns ``perm`` with ``perm[row] = col``. Among optimal assignments (up to
    ``tie_tol`` relative to the matrix scale) the lexicographically smallest
    row->column mapping is returned.
    """
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise ValueError("cost matrix must be square")
    n = cost.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    if not np.all(np.isfinite(cost)):
        raise ValueError("cost matrix must be finite")
    match, u, v = _solve(cost)
    scale = max(1.0, float(np.abs(cost).max()))
    reduced = cost - u[:, None] - v[None, :]
    tight = reduced <= tie_tol * scale
    tight[np.arange(n), match] = True
    return _lexicographic(match, tight)


def assignment_cost(cost, perm) -> float:
    cost = np.asarray(cost, dtype=float)
    return float(cost[np.arange(len(perm)), perm].sum())
