import numpy as np
import pandas as pd
import pytest

from elitecore.kcore import EliteCategory
from elitecore.panel import (
    PANEL_COLUMNS,
    DataQuality,
    MonthNetwork,
    assemble_panel,
    board_bin,
    company_age_cat,
    coreness_concentration_report,
    director_age_cat,
    panel_frame,
    read_panel,
)
from elitecore.ranking import DirectorRankProfile, RankCategory
from elitecore.registry import DirectorAttributes, FinancialRecord, MembershipFlags, MonthIndex


def profile(did, month, company="C1", rank=10):
    cat = RankCategory.of(rank)
    return DirectorRankProfile(did, month, rank, cat, rank, cat, company, False, False, False, False,
                               False, False, False, False, False, True, 2)


def three_months():
    months = [MonthIndex(2013, m) for m in (1, 2, 3)]
    nets = [MonthNetwork(m, {"d1": 4 if m.month == 2 else 2}, {"d1": 1.0 if m.month == 2 else 0.0})
            for m in months]
    profiles = {str(m): {"d1": profile("d1", m)} for m in months}
    attrs = {"d1": DirectorAttributes("d1", female=True, birth_year=1960)}
    flags = {("d1", (2013, 2015)): MembershipFlags(government=True)}
    fin = {("C1", 2013): FinancialRecord("C1", 2013, 10, 10, 10, is_listed=True, founded_year=2000,
                                         industry="Finance")}
    return nets, profiles, attrs, flags, fin


def test_one_row_per_director_month():
    nets, profiles, attrs, flags, fin = three_months()
    rows = list(assemble_panel(nets, profiles, attrs, flags, fin))
    assert len(rows) == 3
    assert [r.elite_category for r in rows] == [2, 4, 2]
    assert rows[1].std_coreness == 1.0
    r = rows[0]
    assert (r.gov_committee, r.female, r.listed, r.age_cat, r.company_age_cat, r.industry) == (
        1, 1, 1, "45-59", "12-25", "Finance")
    assert r.company_rank_cat == "Top1_50" and r.chair == 1 and r.board_bin == "2"


def test_missing_attributes_counted():
    nets, profiles, _, flags, fin = three_months()
    q = DataQuality()
    rows = list(assemble_panel(nets, profiles, {}, flags, fin, quality=q))
    assert q.missing_attributes == 3 and q.rows == 3
    assert rows[0].age_cat == "Missing" and rows[0].female == 0
    assert q.as_dict()["counts"] == {2: 2, 4: 1}


def test_outside_period_map():
    nets, profiles, attrs, flags, fin = three_months()
    q = DataQuality()
    rows = list(assemble_panel(nets, profiles, attrs, flags, fin, period_map=(((2001, 2002), (2003, 2004)),),
                               quality=q))
    assert q.outside_period_map == 3 and all(r.gov_committee == 0 for r in rows)


def test_frame_roundtrip(tmp_path):
    nets, profiles, attrs, flags, fin = three_months()
    df = panel_frame(assemble_panel(nets, profiles, attrs, flags, fin))
    assert list(df.columns) == PANEL_COLUMNS
    df.to_csv(tmp_path / "p.csv", index=False)
    back = read_panel(tmp_path / "p.csv")
    pd.testing.assert_frame_equal(back, df, check_dtype=False)


def test_bins():
    assert [board_bin(c) for c in (0, 1, 9, 10, 30)] == ["1", "1", "9", "10+", "10+"]
    assert [director_age_cat(a) for a in (None, 25, 31, 59, 60, 90)] == [
        "Missing", "18-30", "31-44", "45-59", "60-74", "75+"]
    assert [company_age_cat(a) for a in (None, -1, 0, 11, 12, 51)] == [
        "Missing", "Missing", "1-11", "1-11", "12-25", "50+"]


def broker_frame(flag_fn, n=200, months=("2013-01", "2013-02")):
    rng = np.random.default_rng(0)
    rows = []
    for m in months:
        core = rng.random(n)
        core[:10] = 1.0
        for i, c in enumerate(core):
            rows.append({"month": m, "elite_category": 4 if c == 1.0 else 3, "std_coreness": c,
                         "gov_committee": flag_fn(c), "ba_committee": 1,
                         "ba_leader_cur": 0, "ba_leader_prev": 0, "union_leader_cur": 0,
                         "union_leader_prev": int(i % 3 == 0)})
    return pd.DataFrame(rows)


def test_concentration_uniform_flag():
    rep = coreness_concentration_report(broker_frame(lambda c: 1))
    assert np.allclose(rep[rep.flag == "gov_committee"].ratio, 1.0)
    assert np.allclose(rep[rep.flag == "ba_committee"].ratio, 1.0)


def test_concentration_top_only():
    rep = coreness_concentration_report(broker_frame(lambda c: int(c == 1.0)), flags=("gov_committee",))
    top = rep[rep.bin == rep.bin.max()]
    assert (top.ratio > 1).all()
    assert (rep[rep.bin < rep.bin.max()].ratio == 0).all()


def test_concentration_ignores_non_brokers():
    df = broker_frame(lambda c: 1)
    df.loc[df.index[:5], "elite_category"] = int(EliteCategory.LARGEST_COMPONENT_ONLY)
    df.loc[df.index[:5], "gov_committee"] = 0
    rep = coreness_concentration_report(df, flags=("gov_committee",))
    assert np.allclose(rep.ratio, 1.0)


def test_interest_leader_derived():
    rep = coreness_concentration_report(broker_frame(lambda c: 0), flags=("interest_leader",))
    assert len(rep) > 0 and rep.months.max() == 2
