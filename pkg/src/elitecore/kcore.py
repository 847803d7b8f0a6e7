"""Weighted k-core peeling on the half-unit lattice and the four-level elite classification."""

from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import AbstractSet, Mapping

import numpy as np

from .graph import HalfUnits, ReachGraph
from .registry import MonthIndex


class EliteCategory(enum.IntEnum):
    NOT_IN_LARGEST_COMPONENT = 1
    LARGEST_COMPONENT_ONLY = 2
    LOCAL_BROKER = 3
    NETWORK_CORE = 4


@dataclass(frozen=True)
class CorenessTable:
    """Coreness per node in half-units, plus the peel order that produced it."""

    ids: tuple[str, ...]
    coreness: tuple[int, ...]
    degeneracy: HalfUnits
    order: tuple[str, ...] = field(repr=False, default=())
    month: MonthIndex | None = None

    def __len__(self) -> int:
        return len(self.ids)

    def as_dict(self) -> dict[str, HalfUnits]:
        return {d: HalfUnits(c) for d, c in zip(self.ids, self.coreness)}

    def __getitem__(self, node: str) -> HalfUnits:
        try:
            return HalfUnits(self.coreness[self.ids.index(node)])
        except ValueError:
            raise KeyError(node) from None

    @property
    def max_core(self) -> frozenset[str]:
        return frozenset(d for d, c in zip(self.ids, self.coreness) if c == self.degeneracy)

    def core_members(self, k_halfunits: int) -> frozenset[str]:
        """Node set of the k-core for a threshold given in half-units."""
        return frozenset(d for d, c in zip(self.ids, self.coreness) if c >= k_halfunits)


def weighted_kcore(rg: ReachGraph, month: MonthIndex | None = None) -> CorenessTable:
    """Coreness by min-degree peeling with a bucket queue keyed on half-unit degree.

    Buckets hold lazy min-heaps of node positions, so among nodes of equal
    current degree the smallest id leaves first. A neighbour's degree is never
    lowered below the running core level, which keeps every bucket index at or
    above the scan pointer.
    """
    n = rg.n
    if n == 0:
        return CorenessTable((), (), HalfUnits(0), (), month)
    indptr = rg.adj.indptr.tolist()
    indices = rg.adj.indices.tolist()
    weights = rg.adj.data.tolist()
    deg = [sum(weights[indptr[v]:indptr[v + 1]]) for v in range(n)]
    buckets: list[list[int]] = [[] for _ in range(max(deg) + 1)]
    for v in range(n):
        buckets[deg[v]].append(v)  # ascending v, already a valid heap
    removed = bytearray(n)
    core = [0] * n
    order = []
    level = 0
    d = 0
    for _ in range(n):
        while True:
            bucket = buckets[d]
            while bucket:
                v = heapq.heappop(bucket)
                if not removed[v] and deg[v] == d:
                    break
            else:
                d += 1
                continue
            break
        if d > level:
            level = d
        core[v] = level
        removed[v] = 1
        order.append(v)
        for e in range(indptr[v], indptr[v + 1]):
            u = indices[e]
            if removed[u]:
                continue
            du = deg[u]
            if du > level:
                nd = du - weights[e]
                if nd < level:
                    nd = level
                deg[u] = nd
                heapq.heappush(buckets[nd], u)
                if nd < d:
                    d = nd
    ids = rg.ids
    return CorenessTable(
        ids=tuple(ids),
        coreness=tuple(core),
        degeneracy=HalfUnits(level),
        order=tuple(ids[v] for v in order),
        month=month,
    )


def standardized_coreness(table: CorenessTable, directors=None, mode: str = "ratio") -> dict[str, Fraction]:
    """Coreness scaled into [0, 1] within the month.

    ``ratio`` divides by the degeneracy; ``minmax`` maps the weakest broker to
    0 and the strongest to 1. Any id in ``directors`` without a coreness value
    (outside the broker set) gets 0.
    """
    out: dict[str, Fraction] = {}
    if directors is not None:
        out.update((d, Fraction(0)) for d in directors)
    if not len(table):
        return out
    top = int(table.degeneracy)
    if mode == "ratio":
        for d, c in zip(table.ids, table.coreness):
            out[d] = Fraction(c, top) if top else Fraction(0)
    elif mode == "minmax":
        low = min(table.coreness)
        span = top - low
        for d, c in zip(table.ids, table.coreness):
            out[d] = Fraction(c - low, span) if span else Fraction(1 if top else 0)
    else:
        raise ValueError(f"unknown standardization {mode!r}")
    return out


def classify_elite(director: str, lc: AbstractSet[str], survivors: AbstractSet[str],
                   table: CorenessTable | Mapping[str, int]) -> EliteCategory:
    if director not in lc:
        return EliteCategory.NOT_IN_LARGEST_COMPONENT
    if director not in survivors:
        return EliteCategory.LARGEST_COMPONENT_ONLY
    if isinstance(table, CorenessTable):
        core = table.as_dict()
        top = int(table.degeneracy)
    else:
        core = table
        top = max(core.values(), default=0)
    if top > 0 and core.get(director) == top:
        return EliteCategory.NETWORK_CORE
    return EliteCategory.LOCAL_BROKER


def classify_all(directors, lc: AbstractSet[str], survivors: AbstractSet[str],
                 table: CorenessTable) -> dict[str, EliteCategory]:
    core = table.as_dict()
    top = int(table.degeneracy)
    out = {}
    for d in directors:
        if d not in lc:
            out[d] = EliteCategory.NOT_IN_LARGEST_COMPONENT
        elif d not in survivors:
            out[d] = EliteCategory.LARGEST_COMPONENT_ONLY
        elif top > 0 and core.get(d) == top:
            out[d] = EliteCategory.NETWORK_CORE
        else:
            out[d] = EliteCategory.LOCAL_BROKER
    return out


def core_profile(table: CorenessTable) -> list[tuple[int, int]]:
    """(threshold in half-units, nodes remaining) for every lattice step up to the degeneracy."""
    if not len(table):
        return []
    counts = np.bincount(np.asarray(table.coreness, dtype=np.int64), minlength=int(table.degeneracy) + 1)
    remaining = np.cumsum(counts[::-1])[::-1]
    return [(k, int(remaining[k])) for k in range(int(table.degeneracy) + 1)]
