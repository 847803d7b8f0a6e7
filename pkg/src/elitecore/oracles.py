"""Brute-force reference computations used to check the fast graph routines.

These are deliberately literal restatements of the definitions and share no
code with the production paths.
"""

from __future__ import annotations

import numpy as np

from .graph import CoBoardGraph, ReachGraph
from .kcore import CorenessTable
from .graph import HalfUnits

KCORE_LIMIT = 2000
EXHAUSTIVE_LIMIT = 12
BETWEENNESS_LIMIT = 200


class OracleSizeError(ValueError):
    pass


def _dense(g) -> np.ndarray:
    return np.asarray(g.adj.toarray(), dtype=np.int64)


def oracle_kcore_iterated(rg: ReachGraph) -> list[int]:
    """Coreness by repeated deletion at every half-unit threshold, starting afresh each time."""
    n = rg.n
    if n > KCORE_LIMIT:
        raise OracleSizeError(f"oracle_kcore supports n <= {KCORE_LIMIT}")
    w = _dense(rg)
    core = [0] * n
    k = 1
    while True:
        alive = np.ones(n, dtype=bool)
        while True:
            deg = w @ alive.astype(np.int64)
            drop = alive & (deg < k)
            if not drop.any():
                break
            alive &= ~drop
        if not alive.any():
            break
        for i in np.flatnonzero(alive):
            core[i] = k
        k += 1
    return core


def oracle_kcore_exhaustive(rg: ReachGraph) -> list[int]:
    """Coreness as the best minimum induced degree over all node subsets containing the node."""
    n = rg.n
    if n > EXHAUSTIVE_LIMIT:
        raise OracleSizeError(f"exhaustive check supports n <= {EXHAUSTIVE_LIMIT}")
    if n == 0:
        return []
    w = _dense(rg)
    masks = np.arange(1, 2**n, dtype=np.int64)
    member = ((masks[:, None] >> np.arange(n)) & 1).astype(np.int64)
    deg = member @ w  # induced degree of every node for every subset
    big = np.iinfo(np.int64).max
    min_deg = np.where(member == 1, deg, big).min(axis=1)
    best = np.where(member == 1, min_deg[:, None], -1).max(axis=0)
    return [int(b) for b in best]


def oracle_kcore(rg: ReachGraph) -> CorenessTable:
    core = oracle_kcore_iterated(rg)
    if rg.n <= EXHAUSTIVE_LIMIT:
        exhaustive = oracle_kcore_exhaustive(rg)
        if exhaustive != core:
            raise AssertionError("iterated-deletion and exhaustive coreness disagree")
    return CorenessTable(tuple(rg.ids), tuple(core), HalfUnits(max(core, default=0)))


def oracle_local_betweenness(g: CoBoardGraph, node: str, mode: str = "middleman") -> int:
    """Count two-paths by enumerating every ordered pair of other nodes."""
    n = g.n
    if n > BETWEENNESS_LIMIT:
        raise OracleSizeError(f"oracle_local_betweenness supports n <= {BETWEENNESS_LIMIT}")
    a = _dense(g).astype(bool)
    i = g.position(node)
    not_i = np.ones(n, dtype=bool)
    not_i[i] = False
    distinct = ~np.eye(n, dtype=bool)
    if mode == "middleman":
        # ordered (j, h): j - i - h with j, h not adjacent; each unordered pair twice
        hits = a[i][:, None] & a[i][None, :] & ~a & distinct
        hits &= not_i[:, None] & not_i[None, :]
        return int(hits.sum()) // 2
    if mode == "reach":
        # (j, h): i - j - h, h != i, h not adjacent to i
        hits = a[i][:, None] & a & ~a[i][None, :] & not_i[None, :] & distinct
        return int(hits.sum())
    raise ValueError(f"unknown mode {mode!r}")


def oracle_components(g: CoBoardGraph) -> list[set[str]]:
    """Connected components via union-find over the edge list."""
    parent = list(range(g.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    coo = g.adj.tocoo()
    for a, b in zip(coo.row, coo.col):
        ra, rb = find(int(a)), find(int(b))
        if ra != rb:
            parent[ra] = rb
    comps: dict[int, set[str]] = {}
    for v in range(g.n):
        comps.setdefault(find(v), set()).add(g.ids[v])
    return list(comps.values())


def oracle_distances(g: CoBoardGraph, source: str) -> dict[str, int]:
    """Breadth-first hop distances from ``source``."""
    adj = {d: g.neighbors(d) for d in g.ids}
    dist = {source: 0}
    frontier = [source]
    while frontier:
        nxt = []
        for u in frontier:
            for v in adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    nxt.append(v)
        frontier = nxt
    return dist
