"""Director co-board projection, largest component and the half-unit reach graph.

Weights and degrees are integer counts of half-units throughout: a
first-neighbourhood tie is 2, a second-neighbourhood tie is 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .registry import Snapshot

FIRST = 2  # half-units for a shared board
SECOND = 1  # half-units for a distance-2 pair


class HalfUnits(int):
    """Non-negative integer count of half-units; ``str`` shows the real value."""

    def __new__(cls, count: int):
        count = int(count)
        if count < 0:
            raise ValueError("half-unit count must be non-negative")
        return super().__new__(cls, count)

    @classmethod
    def from_value(cls, value) -> "HalfUnits":
        doubled = 2 * value
        if int(doubled) != doubled:
            raise ValueError(f"{value} is not on the half-unit lattice")
        return cls(int(doubled))

    @property
    def value(self):
        from fractions import Fraction
        return Fraction(int(self), 2)

    def __str__(self) -> str:
        return f"{int(self) // 2}.{5 if int(self) % 2 else 0}"

    def __repr__(self) -> str:
        return f"HalfUnits({int(self)})"


def _as_csr(matrix, dtype=np.int64) -> sp.csr_matrix:
    m = sp.csr_matrix(matrix, dtype=dtype)
    m.sum_duplicates()
    m.eliminate_zeros()
    m.sort_indices()
    return m


class _IndexedGraph:
    """Shared node bookkeeping for the two graph types."""

    ids: tuple[str, ...]
    adj: sp.csr_matrix

    def __init__(self, ids: Sequence[str], adj):
        self.ids = tuple(ids)
        self.adj = _as_csr(adj)
        self._pos: dict[str, int] | None = None
        if self.adj.shape != (len(self.ids), len(self.ids)):
            raise ValueError("adjacency shape does not match node count")

    @property
    def index(self) -> dict[str, int]:
        if self._pos is None:
            self._pos = {d: i for i, d in enumerate(self.ids)}
        return self._pos

    @property
    def n(self) -> int:
        return len(self.ids)

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, node) -> bool:
        return node in self.index

    def position(self, node: str) -> int:
        try:
            return self.index[node]
        except KeyError:
            raise KeyError(f"unknown node {node!r}") from None

    def neighbors(self, node: str) -> list[str]:
        i = self.position(node)
        cols = self.adj.indices[self.adj.indptr[i]:self.adj.indptr[i + 1]]
        return [self.ids[j] for j in cols]

    def edges(self) -> list[tuple[str, str, int]]:
        coo = sp.triu(self.adj, k=1).tocoo()
        order = np.lexsort((coo.col, coo.row))
        return [(self.ids[coo.row[k]], self.ids[coo.col[k]], int(coo.data[k])) for k in order]

    def num_edges(self) -> int:
        return int(sp.triu(self.adj, k=1).nnz)


class CoBoardGraph(_IndexedGraph):
    """Unweighted simple graph; ``adj`` is a symmetric 0/1 CSR matrix.

    ``shared`` optionally keeps the number of boards each pair shares.
    """

    def __init__(self, ids: Sequence[str], adj, shared=None):
        super().__init__(ids, adj)
        self.adj.data[:] = 1
        self.shared = _as_csr(shared) if shared is not None else None

    def degree(self) -> np.ndarray:
        return np.diff(self.adj.indptr).astype(np.int64)

    def subgraph_indices(self, idx: np.ndarray) -> "CoBoardGraph":
        idx = np.asarray(idx, dtype=np.int64)
        sub = self.adj[idx][:, idx]
        shared = self.shared[idx][:, idx] if self.shared is not None else None
        return CoBoardGraph([self.ids[i] for i in idx], sub, shared)

    def subgraph(self, nodes: Iterable[str]) -> "CoBoardGraph":
        pos = self.index
        idx = np.array(sorted(pos[n] for n in set(nodes)), dtype=np.int64)
        return self.subgraph_indices(idx)

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[str, str]], nodes: Iterable[str] = ()) -> "CoBoardGraph":
        edges = [(a, b) for a, b in edges if a != b]
        ids = sorted(set(nodes) | {a for a, _ in edges} | {b for _, b in edges})
        pos = {d: i for i, d in enumerate(ids)}
        rows = [pos[a] for a, _ in edges] + [pos[b] for _, b in edges]
        cols = [pos[b] for _, b in edges] + [pos[a] for a, _ in edges]
        n = len(ids)
        adj = sp.csr_matrix((np.ones(len(rows), dtype=np.int64), (rows, cols)), shape=(n, n))
        adj.data[:] = 1
        return cls(ids, (adj > 0).astype(np.int64))


class ReachGraph(_IndexedGraph):
    """Weighted graph with integer half-unit edge weights."""

    def degree(self) -> np.ndarray:
        return np.asarray(self.adj.sum(axis=1)).ravel().astype(np.int64)

    def weight(self, a: str, b: str) -> int:
        return int(self.adj[self.position(a), self.position(b)])

    @classmethod
    def from_weighted_edges(cls, edges: Iterable[tuple[str, str, int]], nodes: Iterable[str] = ()) -> "ReachGraph":
        edges = [(a, b, int(w)) for a, b, w in edges if a != b]
        ids = sorted(set(nodes) | {a for a, _, _ in edges} | {b for _, b, _ in edges})
        pos = {d: i for i, d in enumerate(ids)}
        seen = {}
        for a, b, w in edges:
            if w <= 0:
                raise ValueError("edge weights must be positive half-unit counts")
            key = (min(pos[a], pos[b]), max(pos[a], pos[b]))
            if key in seen and seen[key] != w:
                raise ValueError(f"pair {a}-{b} given two weights")
            seen[key] = w
        rows = [i for i, _ in seen] + [j for _, j in seen]
        cols = [j for _, j in seen] + [i for i, _ in seen]
        data = list(seen.values()) * 2
        n = len(ids)
        return cls(ids, sp.csr_matrix((np.array(data, dtype=np.int64), (rows, cols)), shape=(n, n)))


def incidence(snapshot: Snapshot) -> tuple[list[str], list[str], sp.csr_matrix]:
    """Director x board 0/1 incidence of the snapshot (multiple roles collapse)."""
    directors = snapshot.directors
    companies = snapshot.companies
    dpos = {d: i for i, d in enumerate(directors)}
    cpos = {c: i for i, c in enumerate(companies)}
    rows = np.fromiter((dpos[p.director_id] for p in snapshot.active_positions), dtype=np.int64)
    cols = np.fromiter((cpos[p.company_id] for p in snapshot.active_positions), dtype=np.int64)
    inc = sp.csr_matrix((np.ones(rows.size, dtype=np.int64), (rows, cols)),
                        shape=(len(directors), len(companies)))
    inc.sum_duplicates()
    inc.data[:] = 1
    return directors, companies, inc


def project_coboard(snapshot: Snapshot, multiplicity: bool = False) -> CoBoardGraph:
    """Directors adjacent iff they share at least one active board.

    With ``multiplicity`` the graph also records the number of shared boards.
    """
    directors, _, inc = incidence(snapshot)
    return project_incidence(directors, inc, multiplicity)


def project_incidence(directors: Sequence[str], inc: sp.csr_matrix, multiplicity: bool = False) -> CoBoardGraph:
    shared = (inc @ inc.T).tocsr()
    shared.setdiag(0)
    shared.eliminate_zeros()
    adj = shared.copy()
    adj.data[:] = 1
    return CoBoardGraph(directors, adj, shared if multiplicity else None)


def largest_component(g: CoBoardGraph) -> frozenset[str]:
    idx = largest_component_indices(g)
    return frozenset(g.ids[i] for i in idx)


def largest_component_indices(g: CoBoardGraph) -> np.ndarray:
    """Node positions of the biggest component; ties go to the one holding the smallest id."""
    if g.n == 0:
        return np.zeros(0, dtype=np.int64)
    _, labels = connected_components(g.adj, directed=False)
    sizes = np.bincount(labels)
    best = sizes.max()
    # ids are sorted, so the lowest position in a max-size component holds its smallest id
    winner = labels[np.flatnonzero(sizes[labels] == best)[0]]
    return np.flatnonzero(labels == winner)


def build_reach_graph(g: CoBoardGraph, nodes: Iterable[str] | None = None, mediation: str = "induced",
                      multiplicity: bool = False) -> ReachGraph:
    """Reach graph over ``nodes``: weight 1 for co-board pairs, 0.5 for pairs at distance 2.

    ``mediation="induced"`` measures distance on the subgraph induced by
    ``nodes``; ``"ambient"`` measures it in ``g`` itself.
    """
    if nodes is None:
        idx = np.arange(g.n, dtype=np.int64)
    else:
        pos = g.index
        idx = np.array(sorted(pos[n] for n in set(nodes)), dtype=np.int64)
    return build_reach_graph_indices(g, idx, mediation, multiplicity)


def build_reach_graph_indices(g: CoBoardGraph, idx: np.ndarray, mediation: str = "induced",
                              multiplicity: bool = False) -> ReachGraph:
    if mediation not in ("induced", "ambient"):
        raise ValueError(f"unknown mediation mode {mediation!r}")
    ids = [g.ids[i] for i in idx]
    if idx.size == 0:
        return ReachGraph(ids, sp.csr_matrix((0, 0), dtype=np.int64))
    rows = g.adj[idx]
    a = rows[:, idx]
    if mediation == "induced":
        two = a @ a
    else:
        two = rows @ g.adj[:, idx]
    two = two.tocsr()
    two.setdiag(0)
    two.eliminate_zeros()
    two.data[:] = 1
    # distance exactly 2: two-path exists and no direct tie
    second = two - two.multiply(a)
    second.eliminate_zeros()
    if multiplicity and g.shared is not None:
        first = g.shared[idx][:, idx] * FIRST
    else:
        first = a * FIRST
    return ReachGraph(ids, first + second * SECOND)


def reach_degree(rg: ReachGraph, node: str) -> HalfUnits:
    i = rg.position(node)
    return HalfUnits(int(rg.adj.data[rg.adj.indptr[i]:rg.adj.indptr[i + 1]].sum()))


@dataclass(frozen=True)
class InnerCircle:
    graph: CoBoardGraph
    linkers: dict[str, bool]
    top_companies: frozenset[str]


def extract_inner_circle(snapshot: Snapshot, ranks: Mapping[str, int], n: int) -> InnerCircle:
    """Co-board network of directors on the boards of the ``n`` best-ranked companies.

    ``ranks`` maps company_id to rank (1 = largest). A linker holds seats on
    at least two distinct top-``n`` boards.
    """
    if n > len(ranks):
        raise ValueError(f"top-{n} cutoff exceeds the {len(ranks)} ranked companies")
    top = frozenset(c for c, r in ranks.items() if r <= n)
    kept = tuple(p for p in snapshot.active_positions if p.company_id in top)
    sub = Snapshot(snapshot.month, kept)
    graph = project_coboard(sub)
    boards: dict[str, set[str]] = {}
    for p in kept:
        boards.setdefault(p.director_id, set()).add(p.company_id)
    linkers = {d: len(boards[d]) >= 2 for d in graph.ids}
    return InnerCircle(graph, linkers, top)


def write_edgelist(g: _IndexedGraph, path: str | Path) -> None:
    """TSV ``node_a<TAB>node_b<TAB>weight_halfunits``, one line per undirected edge."""
    weight_scale = FIRST if isinstance(g, CoBoardGraph) else 1
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for a, b, w in g.edges():
            fh.write(f"{a}\t{b}\t{w * weight_scale}\n")


def read_edgelist(path: str | Path) -> ReachGraph:
    edges = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            a, b, w = line.split("\t")
            edges.append((a, b, int(w)))
    return ReachGraph.from_weighted_edges(edges)
