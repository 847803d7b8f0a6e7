"""Local betweenness, local brokerage and iterative broker pruning.

Two readings of the two-path count are supported:

``middleman``
    pairs {j, h} of i's neighbours that are not adjacent to each other, i.e.
    two-paths j - i - h that i sits in the middle of.
``reach``
    two-paths i - j - h ending at a node h that is not adjacent to i,
    counted once per intermediate j.

Everything is integer arithmetic; scores are exact fractions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .graph import CoBoardGraph

MODES = ("middleman", "reach")
_ROW_BLOCK = 16384


def _check_mode(mode: str) -> str:
    mode = mode.lower()
    if mode not in MODES:
        raise ValueError(f"unknown brokerage mode {mode!r}; expected one of {MODES}")
    return mode


def closed_triangle_counts(adj: sp.csr_matrix) -> np.ndarray:
    """Twice the number of edges among each node's neighbours.

    Computed in row blocks in a fixed order so memory stays bounded.
    """
    n = adj.shape[0]
    out = np.zeros(n, dtype=np.int64)
    for lo in range(0, n, _ROW_BLOCK):
        block = adj[lo:lo + _ROW_BLOCK]
        paths = block @ adj
        out[lo:lo + block.shape[0]] = np.asarray(paths.multiply(block).sum(axis=1)).ravel()
    return out


def local_betweenness_all(g: CoBoardGraph, mode: str = "middleman") -> np.ndarray:
    """Local betweenness for every node, in ``g.ids`` order."""
    mode = _check_mode(mode)
    deg = g.degree()
    tri2 = closed_triangle_counts(g.adj)
    if mode == "middleman":
        return deg * (deg - 1) // 2 - tri2 // 2
    # sum over neighbours j of |N(j) minus N(i) minus {i}|
    nbr_deg = g.adj @ deg
    return nbr_deg - deg - tri2


def local_betweenness(g: CoBoardGraph, node: str, mode: str = "middleman") -> int:
    mode = _check_mode(mode)
    i = g.position(node)
    adj = g.adj
    nbrs = adj.indices[adj.indptr[i]:adj.indptr[i + 1]]
    k = nbrs.size
    if k == 0:
        return 0
    sub = adj[nbrs]
    inside = np.asarray(sub[:, nbrs].sum()).item()  # twice the edges among neighbours
    if mode == "middleman":
        return k * (k - 1) // 2 - inside // 2
    return int(np.diff(sub.indptr).sum()) - k - inside


def brokerage_scores(g: CoBoardGraph, mode: str = "middleman") -> dict[str, Fraction]:
    """Local betweenness over degree per node; degree-0 nodes score 0."""
    bet = local_betweenness_all(g, mode)
    deg = g.degree()
    return {d: (Fraction(int(b), int(k)) if k else Fraction(0)) for d, b, k in zip(g.ids, bet, deg)}


@dataclass(frozen=True)
class BrokerageRound:
    index: int
    removed: int
    remaining: int
    initial: int
    before: int  # node count of the graph the round ran on
    removed_ids: tuple[str, ...] = field(repr=False, default=())

    @property
    def remaining_fraction(self) -> Fraction:
        return Fraction(self.remaining, self.initial)

    @property
    def removed_of_initial(self) -> Fraction:
        return Fraction(self.removed, self.initial)

    @property
    def removed_of_previous(self) -> Fraction:
        return Fraction(self.removed, self.before)


@dataclass(frozen=True)
class BrokerageReport:
    survivors: frozenset[str]
    rounds: tuple[BrokerageRound, ...]
    scores: dict[str, Fraction]
    initial: int
    threshold: Fraction
    mode: str

    @property
    def round_one_survivors(self) -> int:
        if not self.rounds:
            return self.initial
        return self.initial - self.rounds[0].removed


def _as_fraction(threshold) -> Fraction:
    if isinstance(threshold, Fraction):
        return threshold
    if isinstance(threshold, str):
        return Fraction(threshold)
    if isinstance(threshold, float):
        return Fraction(threshold).limit_denominator(10**6)
    return Fraction(threshold)


def prune_brokers(g: CoBoardGraph, threshold=Fraction(1), mode: str = "middleman") -> BrokerageReport:
    """Iteratively drop every node whose brokerage is below ``threshold``.

    Each round scores the current induced subgraph and removes all failing
    nodes at once; the loop stops when a round removes nothing.
    """
    mode = _check_mode(mode)
    thr = _as_fraction(threshold)
    num, den = thr.numerator, thr.denominator
    n0 = g.n
    alive = np.arange(n0, dtype=np.int64)
    current = g
    rounds: list[BrokerageRound] = []
    bet = deg = np.zeros(0, dtype=np.int64)
    while alive.size:
        bet = local_betweenness_all(current, mode)
        deg = current.degree()
        # score < thr  <=>  bet * den < num * deg  (degree-0 nodes score 0)
        fail = np.where(deg > 0, bet * den < num * deg, 0 < thr)
        if not fail.any():
            break
        keep = np.flatnonzero(~fail)
        rounds.append(BrokerageRound(
            index=len(rounds) + 1,
            removed=int(fail.sum()),
            remaining=int(keep.size),
            initial=n0,
            before=int(alive.size),
            removed_ids=tuple(current.ids[i] for i in np.flatnonzero(fail)),
        ))
        alive = alive[keep]
        current = current.subgraph_indices(keep)
    scores = {}
    if alive.size:
        for d, b, k in zip(current.ids, bet, deg):
            scores[d] = Fraction(int(b), int(k)) if k else Fraction(0)
    return BrokerageReport(
        survivors=frozenset(current.ids) if alive.size else frozenset(),
        rounds=tuple(rounds),
        scores=scores,
        initial=n0,
        threshold=thr,
        mode=mode,
    )


def format_ratio(value: Fraction, digits: int = 6) -> str:
    """Fixed-point decimal rendering of a fraction by integer rounding (half up)."""
    scale = 10**digits
    q = (value.numerator * scale * 2 + value.denominator) // (2 * value.denominator)
    sign = "-" if q < 0 else ""
    q = abs(q)
    return f"{sign}{q // scale}.{q % scale:0{digits}d}"


def rounds_csv_rows(report: BrokerageReport) -> list[list[str]]:
    """Rows for ``round,removed,remaining_fraction``."""
    return [[str(r.index), str(r.removed), format_ratio(r.remaining_fraction)] for r in report.rounds]
