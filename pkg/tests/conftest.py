import itertools
import sys
from datetime import date

import numpy as np
import pytest

from elitecore.graph import CoBoardGraph, ReachGraph
from elitecore.registry import MonthIndex, PositionRecord, Role, Snapshot


def clique(n, prefix="v"):
    nodes = [f"{prefix}{i:02d}" for i in range(n)]
    return CoBoardGraph.from_edges(itertools.combinations(nodes, 2), nodes)


def bowtie():
    return CoBoardGraph.from_edges([("A", "B"), ("A", "m"), ("B", "m"), ("C", "D"), ("C", "m"), ("D", "m")])


def petersen():
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return CoBoardGraph.from_edges([(f"p{a}", f"p{b}") for a, b in outer + spokes + inner])


def path(n, prefix="x"):
    nodes = [f"{prefix}{i:02d}" for i in range(n)]
    return CoBoardGraph.from_edges(zip(nodes, nodes[1:]), nodes)


def random_coboard(rng, n, p):
    nodes = [f"n{i:04d}" for i in range(n)]
    a = np.triu(rng.random((n, n)) < p, 1)
    rows, cols = np.nonzero(a)
    return CoBoardGraph.from_edges(((nodes[i], nodes[j]) for i, j in zip(rows, cols)), nodes)


def random_reach(rng, n, p, max_w=4):
    """Random graph with positive half-unit weights in 1..max_w."""
    nodes = [f"n{i:04d}" for i in range(n)]
    a = np.triu(rng.random((n, n)) < p, 1)
    rows, cols = np.nonzero(a)
    w = rng.integers(1, max_w + 1, size=rows.size)
    return ReachGraph.from_weighted_edges(((nodes[i], nodes[j], int(k)) for i, j, k in zip(rows, cols, w)), nodes)


def snapshot_of(boards, month="2013-01"):
    """Snapshot from {company: [directors]} with every seat active all month."""
    m = MonthIndex.parse(month)
    recs = [PositionRecord(d, c, Role.ORDINARY, date(2000, 1, 1)) for c, ds in boards.items() for d in ds]
    return Snapshot(m, tuple(sorted(recs)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, detail = results[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")
