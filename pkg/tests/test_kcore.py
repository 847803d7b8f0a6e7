from fractions import Fraction

import numpy as np
import pytest

from conftest import bowtie, clique, path, random_reach
from elitecore.graph import HalfUnits, ReachGraph, build_reach_graph
from elitecore.kcore import (
    CorenessTable,
    EliteCategory,
    classify_all,
    classify_elite,
    core_profile,
    standardized_coreness,
    weighted_kcore,
)
from elitecore.oracles import OracleSizeError, oracle_kcore, oracle_kcore_exhaustive, oracle_kcore_iterated


def unit_k4():
    return ReachGraph.from_weighted_edges([(a, b, 2) for a, b in
                                           [("a", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d"), ("c", "d")]])


def test_examples():
    t = weighted_kcore(unit_k4())
    assert set(t.coreness) == {6} and str(t.degeneracy) == "3.0"
    p = weighted_kcore(build_reach_graph(path(3, "p")))
    assert set(p.coreness) == {3} and p.degeneracy == HalfUnits(3)
    b = weighted_kcore(build_reach_graph(bowtie()))
    assert set(b.coreness) == {6} and b.max_core == frozenset("ABCDm")
    empty = weighted_kcore(ReachGraph.from_weighted_edges([]))
    assert len(empty) == 0 and empty.degeneracy == 0


def test_oracle_examples():
    assert oracle_kcore(unit_k4()).coreness == (6, 6, 6, 6)
    assert set(oracle_kcore(build_reach_graph(bowtie())).coreness) == {6}
    rng = np.random.default_rng(7)
    g = random_reach(rng, 10, 0.4)
    assert oracle_kcore(g).coreness == weighted_kcore(g).coreness
    with pytest.raises(OracleSizeError):
        oracle_kcore_exhaustive(random_reach(rng, 13, 0.3))
    with pytest.raises(OracleSizeError):
        oracle_kcore_iterated(ReachGraph.from_weighted_edges([], [f"n{i}" for i in range(2001)]))


def test_nesting_and_profile(rng):
    g = random_reach(rng, 60, 0.1)
    t = weighted_kcore(g)
    prev = None
    for k, remaining in core_profile(t):
        members = t.core_members(k)
        assert len(members) == remaining
        if prev is not None:
            assert members <= prev
        prev = members
    assert core_profile(t)[-1][0] == t.degeneracy


def test_order_invariance(rng):
    for _ in range(20):
        g = random_reach(rng, 40, 0.15)
        t = weighted_kcore(g)
        perm = rng.permutation(g.n)
        rename = {d: f"r{int(p):04d}" for d, p in zip(g.ids, perm)}
        g2 = ReachGraph.from_weighted_edges([(rename[a], rename[b], w) for a, b, w in g.edges()], rename.values())
        t2 = weighted_kcore(g2).as_dict()
        assert all(t2[rename[d]] == c for d, c in t.as_dict().items())


def test_edge_addition_monotone(rng):
    for _ in range(30):
        g = random_reach(rng, 25, 0.15)
        before = weighted_kcore(g).as_dict()
        edges = {(a, b): w for a, b, w in g.edges()}
        a, b = rng.choice(g.n, size=2, replace=False)
        key = tuple(sorted((g.ids[a], g.ids[b])))
        edges[key] = edges.get(key, 0) + int(rng.integers(1, 3))
        after = weighted_kcore(ReachGraph.from_weighted_edges([(x, y, w) for (x, y), w in edges.items()], g.ids))
        assert all(after.as_dict()[d] >= c for d, c in before.items())


def test_standardized():
    t = CorenessTable(("a", "b", "c"), (46, 23, 10), HalfUnits(46))
    s = standardized_coreness(t, directors=["a", "b", "c", "z"])
    assert s["a"] == 1 and s["b"] == Fraction(1, 2) and s["z"] == 0
    mm = standardized_coreness(t, mode="minmax")
    assert mm["c"] == 0 and mm["a"] == 1
    zero = CorenessTable(("a",), (0,), HalfUnits(0))
    assert standardized_coreness(zero)["a"] == 0
    with pytest.raises(ValueError):
        standardized_coreness(t, mode="rank")


def test_classification():
    t = CorenessTable(("a", "b"), (6, 4), HalfUnits(6))
    lc, surv = {"a", "b", "x"}, {"a", "b"}
    assert classify_elite("out", lc, surv, t) == EliteCategory.NOT_IN_LARGEST_COMPONENT
    assert classify_elite("x", lc, surv, t) == EliteCategory.LARGEST_COMPONENT_ONLY
    assert classify_elite("a", lc, surv, t) == EliteCategory.NETWORK_CORE
    assert classify_elite("b", lc, surv, t) == EliteCategory.LOCAL_BROKER
    assert classify_all(["out", "x", "a", "b"], lc, surv, t) == {
        "out": 1, "x": 2, "a": 4, "b": 3}


def test_ties_leave_smallest_id_first():
    t = weighted_kcore(build_reach_graph(path(4, "p")))
    assert t.order[0] == "p00"
