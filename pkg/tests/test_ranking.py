from datetime import date

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import snapshot_of
from elitecore.ranking import (
    RankCategory,
    RankingError,
    RankTable,
    aggregate_corporations,
    concentration_curve,
    corporation_rank,
    director_rank_profile,
    pca_company_rank,
    pca_rank_matrix,
    symmetric_eigen,
)
from elitecore.registry import FinancialRecord, MonthIndex, PositionRecord, Role, Snapshot


def rec(c, e, r, a, year=2013):
    return FinancialRecord(c, year, e, r, a)


def random_records(rng, n, year=2013):
    base = rng.lognormal(0, 1, size=n)
    return [rec(f"C{i:03d}", float(base[i] * rng.lognormal(0, .3)), float(base[i] * rng.lognormal(0, .3)),
                float(base[i] * rng.lognormal(0, .3)), year) for i in range(n)]


def test_proportional_indicators():
    t = pca_company_rank([rec("a", 1, 10, 100), rec("b", 3, 30, 300), rec("c", 2, 20, 200)])
    assert t.explained_share == pytest.approx(1.0, abs=1e-12)
    assert t.companies == ("b", "c", "a")


def test_equicorrelation_share():
    lam, v = symmetric_eigen(np.array([[1, .5, .5], [.5, 1, .5], [.5, .5, 1]]))
    assert lam[0] / 3 == pytest.approx(2 / 3, abs=1e-12)
    assert np.allclose(v, np.ones(3) / np.sqrt(3))


def test_eigen_matches_numpy(rng):
    for _ in range(200):
        p = int(rng.integers(1, 4))
        m = rng.normal(size=(p, p))
        s = m @ m.T
        lam, v = symmetric_eigen(s)
        ref = np.linalg.eigvalsh(s)[::-1]
        assert np.allclose(lam, ref, atol=1e-9 * max(1, abs(ref).max()))
        assert np.allclose(s @ v, lam[0] * v, atol=1e-7 * max(1, abs(ref).max()))
        assert v.sum() >= 0


def test_repeated_eigenvalues():
    lam, v = symmetric_eigen(np.eye(3))
    assert np.allclose(lam, 1) and np.allclose(v, np.ones(3) / np.sqrt(3))


def test_order_and_scale_invariance(rng):
    recs = random_records(rng, 40)
    t = pca_company_rank(recs)
    shuffled = [recs[i] for i in rng.permutation(len(recs))]
    assert pca_company_rank(shuffled).companies == t.companies
    scaled = [FinancialRecord(r.company_id, r.year, r.employees * 7.5, r.revenue, r.assets * 0.01) for r in recs]
    assert pca_company_rank(scaled).companies == t.companies
    assert 1 / 3 - 1e-12 <= t.explained_share <= 1 + 1e-12


def test_zero_variance(caplog):
    t = pca_company_rank([rec("a", 5, 1, 3), rec("b", 5, 2, 1), rec("c", 5, 3, 2)])
    assert t.dropped == ("employees",)
    assert "zero variance" in caplog.text
    with pytest.raises(RankingError):
        pca_company_rank([rec("a", 1, 1, 1), rec("b", 1, 1, 1), rec("c", 1, 1, 1)])


def test_missing_imputation():
    recs = [rec("a", None, 10, 10), rec("b", 3, 30, 30), rec("c", 2, 20, 25), rec("d", 1, 1, 2)]
    assert len(pca_company_rank(recs, impute="zero")) == 4
    assert "a" not in pca_company_rank(recs, impute="drop").ranks


def test_categories_partition():
    assert [RankCategory.of(r).value for r in (1, 50, 51, 500, 501, 5000, 5001, None)] == [
        "Top1_50", "Top1_50", "Top51_500", "Top51_500", "Top501_5000", "Top501_5000", "Beyond5000", "Beyond5000"]


def test_corporations():
    recs = [rec("P", 10, 10, 10), rec("S1", 100, 1, 1), rec("S2", 100, 1, 1), rec("X", 5, 5, 5)]
    parents = {"S1": "P", "S2": "P", "P": "P"}
    corp = {r.company_id: r for r in aggregate_corporations(recs, parents)}
    assert corp["P"].employees == 210 and corp["X"].employees == 5
    assert sum(r.revenue for r in corp.values()) == sum(r.revenue for r in recs)


def test_subsidiary_inherits(rng):
    recs = random_records(rng, 30)
    recs.append(rec("tiny", 0.001, 0.001, 0.001))
    top = pca_company_rank(recs).companies[0]
    table, inherited = corporation_rank(recs, {"tiny": top}, 2013)
    assert inherited["tiny"] == inherited[top] == 1


def _snap(seats):
    m = MonthIndex(2013, 1)
    return Snapshot(m, tuple(PositionRecord("d", c, role, date(2000, 1, 1)) for c, role in seats))


def test_director_profiles():
    ranks = {"A": 30, "B": 800, "C": 45, "D": 400}
    p = director_rank_profile(_snap([("A", Role.ORDINARY), ("B", Role.ORDINARY)]), ranks)["d"]
    assert p.best_category is RankCategory.TOP1_50 and not p.top50_linker and not p.top500_linker
    p = director_rank_profile(_snap([("A", Role.ORDINARY), ("C", Role.ORDINARY)]), ranks)["d"]
    assert p.top50_linker and p.board_count == 2
    p = director_rank_profile(_snap([("D", Role.CHAIR)]), ranks)["d"]
    assert p.top500_chair and not p.top50_chair and p.chair


def test_concentration_curve():
    one = RankTable(2013, ("a",), (1.0,), 1.0, (1.0,), ("employees",))
    assert concentration_curve(one, [rec("a", 5, 5, 5)]) == [(1, 1.0, 1.0, 1.0)]
    two = RankTable(2013, ("a", "b"), (1.0, 0.0), 1.0, (1.0,), ("employees",))
    assert [r[1] for r in concentration_curve(two, [rec("a", 5, 5, 5), rec("b", 5, 5, 5)])] == [0.5, 1.0]


def test_concentration_zero_total(caplog):
    two = RankTable(2013, ("a", "b"), (1.0, 0.0), 1.0, (1.0,), ("revenue",))
    curve = concentration_curve(two, [rec("a", 0, 5, 5), rec("b", 0, 5, 5)])
    assert [r[1] for r in curve] == [0.0, 0.0]
    assert "zero" in caplog.text


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 1e6), st.floats(0, 1e6), st.floats(0, 1e6)), min_size=3, max_size=25))
def test_curve_monotone(rows):
    recs = [rec(f"c{i}", *r) for i, r in enumerate(rows)]
    try:
        t = pca_company_rank(recs)
    except RankingError:
        return
    curve = concentration_curve(t, recs)
    for j in (1, 2, 3):
        series = [c[j] for c in curve]
        assert all(b >= a - 1e-12 for a, b in zip(series, series[1:]))
    assert len(set(t.companies)) == len(t.companies)


def test_needs_three_companies():
    with pytest.raises(RankingError):
        pca_rank_matrix(["a", "b"], np.ones((2, 3)), 2013)
