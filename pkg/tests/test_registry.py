from datetime import date

import pytest
from hypothesis import given, settings, strategies as st

from elitecore.registry import (
    CommitteeEntry,
    CommitteeKind,
    CommitteeRoster,
    DirectorAttributes,
    GroupCycleError,
    MonthIndex,
    PositionIndex,
    PositionRecord,
    RegistryError,
    Role,
    build_snapshot,
    load_company_registry,
    match_committee_members,
    month_range,
    normalize_text,
    parse_committees,
    parse_positions,
    ultimate_parents,
    window_of,
    write_committees,
    write_positions,
)

HEADER = "director_id,company_id,role,start_date,end_date\n"


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_header_only_positions_is_empty(tmp_path):
    assert parse_positions(write(tmp_path, "p.csv", HEADER)) == []


def test_chair_row_maps_directly(tmp_path):
    recs = parse_positions(write(tmp_path, "p.csv", HEADER + "D1,C1,Chair,2010-01-01,2012-06-30\n"))
    assert recs == [PositionRecord("D1", "C1", Role.CHAIR, date(2010, 1, 1), date(2012, 6, 30))]
    assert recs[0].role is Role.CHAIR


@pytest.mark.parametrize("row, fragment", [
    ("D1,C1,Chair,2012-01-01,2010-01-01\n", "inverted interval"),
    ("D1,C1,Chair,2012-13-01,\n", "malformed date"),
    ("D1,C1,Janitor,2012-01-01,\n", "unknown role"),
])
def test_bad_rows_report_row_number(tmp_path, row, fragment):
    path = write(tmp_path, "p.csv", HEADER + "D0,C0,Executive,2009-01-01,\n" + row)
    with pytest.raises(RegistryError) as err:
        parse_positions(path)
    assert err.value.row == 2
    assert fragment in str(err.value)
    assert "row 2" in str(err.value)


def test_duplicates(tmp_path):
    same = "D1,C1,Chair,2010-01-01,2011-01-01\n"
    assert len(parse_positions(write(tmp_path, "a.csv", HEADER + same + same))) == 1
    # differing role is a second position, not a duplicate
    both = HEADER + same + "D1,C1,Executive,2010-01-01,2011-01-01\n"
    assert len(parse_positions(write(tmp_path, "b.csv", both))) == 2
    clash = HEADER + same + "D1,C1,Chair,2010-01-01,2011-06-01\n"
    with pytest.raises(RegistryError, match="duplicate key"):
        parse_positions(write(tmp_path, "c.csv", clash))


def test_role_aliases():
    assert Role.parse("Ordinary Member") is Role.ORDINARY
    assert Role.parse("chairman") is Role.CHAIR


def test_positions_roundtrip(tmp_path):
    recs = [PositionRecord("D1", "C1", Role.CHAIR, date(2010, 1, 1), None),
            PositionRecord("D2", "C1", Role.ORDINARY, date(2011, 5, 3), date(2013, 1, 1))]
    path = tmp_path / "p.csv"
    write_positions(recs, path)
    assert parse_positions(path) == recs


def test_snapshot_overlap_rules():
    m = MonthIndex(2013, 3)
    ends_first = PositionRecord("a", "c", Role.ORDINARY, date(2012, 1, 1), date(2013, 3, 1))
    starts_after = PositionRecord("b", "c", Role.ORDINARY, date(2013, 4, 1), None)
    open_old = PositionRecord("c", "c", Role.ORDINARY, date(1995, 1, 1), None)
    snap = build_snapshot([ends_first, starts_after, open_old], m)
    assert set(snap.directors) == {"a", "c"}
    for later in month_range(MonthIndex(2013, 4), MonthIndex(2016, 12)):
        assert "c" in build_snapshot([open_old], later).directors


def test_open_positions_stop_at_study_end():
    rec = PositionRecord("a", "c", Role.ORDINARY, date(2010, 1, 1), None)
    assert build_snapshot([rec], MonthIndex(2014, 1), study_end=date(2013, 12, 31)).directors == []


def test_month_index():
    m = MonthIndex.parse("2012-12")
    assert str(m.next()) == "2013-01"
    assert m.last_day == date(2012, 12, 31)
    assert MonthIndex(2012, 2).last_day == date(2012, 2, 29)
    with pytest.raises(ValueError):
        MonthIndex(2012, 13)


dates = st.dates(min_value=date(2005, 1, 1), max_value=date(2015, 12, 31))


@settings(max_examples=150, deadline=None)
@given(dates, dates, st.integers(0, 400), st.integers(0, 400))
def test_shrinking_never_adds(d1, d2, cut_lo, cut_hi):
    start, end = min(d1, d2), max(d1, d2)
    from datetime import timedelta

    s2 = min(start + timedelta(days=cut_lo), end)
    e2 = max(end - timedelta(days=cut_hi), s2)
    wide = PositionRecord("a", "c", Role.ORDINARY, start, end)
    narrow = PositionRecord("a", "c", Role.ORDINARY, s2, e2)
    for m in month_range(MonthIndex(2004, 12), MonthIndex(2016, 1)):
        if build_snapshot([narrow], m).active_positions:
            assert build_snapshot([wide], m).active_positions


def test_position_index_matches_snapshot(rng):
    from datetime import timedelta

    recs = []
    for i in range(300):
        s = date(2008, 1, 1) + timedelta(days=int(rng.integers(0, 3000)))
        e = None if rng.random() < 0.3 else s + timedelta(days=int(rng.integers(0, 1500)))
        recs.append(PositionRecord(f"d{i % 90}", f"c{i % 37}", Role.ORDINARY, s, e))
    recs = sorted(set(recs))
    end = date(2014, 12, 31)
    index = PositionIndex(recs, end)
    union = set()
    months = month_range(MonthIndex(2010, 1), MonthIndex(2014, 12))
    for m in months:
        fast = set(index.snapshot(m).active_positions)
        assert fast == set(build_snapshot(recs, m, end).active_positions)
        union |= fast
    first, last = months[0].first_day, months[-1].last_day
    assert union == {r for r in recs if r.overlaps(first, last, end)}


def test_groups(tmp_path):
    assert ultimate_parents({"A": "A"}) == {"A": "A"}
    assert ultimate_parents({"S1": "P", "S2": "S1", "P": "P"}) == {"S1": "P", "S2": "P", "P": "P"}
    with pytest.raises(GroupCycleError, match="'A'|'B'"):
        ultimate_parents({"A": "B", "B": "A"})


@given(st.dictionaries(st.sampled_from("abcdefgh"), st.sampled_from("abcdefgh"), max_size=8))
def test_group_forest_property(links):
    # make it acyclic by only allowing links to alphabetically earlier companies
    links = {c: p if p <= c else c for c, p in links.items()}
    roots = ultimate_parents(links)
    for c, r in roots.items():
        assert roots.get(r, r) == r


def test_missing_employees_retained(tmp_path):
    fin = write(tmp_path, "f.csv", "company_id,year,employees,revenue,assets,is_subsidiary,is_listed,founded_year,nace1\n"
                                  "C1,2013,,100,200,0,1,1990,C\n")
    grp = write(tmp_path, "g.csv", "company_id,ultimate_parent_id\nC1,C1\n")
    table, parents = load_company_registry(fin, grp)
    rec = table[("C1", 2013)]
    assert rec.employees is None and rec.revenue == 100 and rec.is_listed
    assert parents == {"C1": "C1"}


def test_normalize_text():
    assert normalize_text("  Anne-Marie   HANSEN ") == "anne marie hansen"
    assert normalize_text("Åse Müller") == normalize_text("ase muller")


def _dirs():
    return {
        "D1": DirectorAttributes("D1", name="Anne  Jensen", address="Nørregade 1"),
        "D2": DirectorAttributes("D2", name="Lars Nielsen", address="Bredgade 2"),
        "D3": DirectorAttributes("D3", name="Lars Nielsen", address="Havnegade 9"),
    }


def test_committee_matching():
    pm = (((2010, 2012), (2013, 2015)),)
    rosters = [
        CommitteeRoster("G1", CommitteeKind.GOVERNMENT, (CommitteeEntry(director_id="D3"),), (2013, 2015)),
        CommitteeRoster("G2", CommitteeKind.GOVERNMENT,
                        (CommitteeEntry(name="anne jensen", address="NØRREGADE  1"),), (2013, 2015)),
        CommitteeRoster("B1", CommitteeKind.BUSINESS_ASSOCIATION,
                        (CommitteeEntry(name="Lars Nielsen", address="Elsewhere 5"),), (2013, 2015)),
    ]
    flags = match_committee_members(_dirs(), rosters, pm)
    w = (2010, 2012)
    assert flags[("D3", w)].government
    assert flags[("D1", w)].government
    assert not flags[("D2", w)].government and not flags[("D2", w)].business
    # order independent and idempotent
    assert match_committee_members(_dirs(), rosters[::-1], pm) == flags
    assert match_committee_members(_dirs(), rosters + rosters, pm) == flags


def test_uncovered_window_warns(caplog):
    rosters = [CommitteeRoster("G9", CommitteeKind.GOVERNMENT, (CommitteeEntry(director_id="D1"),), (1990, 1991))]
    flags = match_committee_members(_dirs(), rosters)
    assert not any(f.government for f in flags.values())
    assert "not covered" in caplog.text


def test_overlapping_observation_windows_rejected():
    with pytest.raises(ValueError, match="overlap"):
        match_committee_members(_dirs(), [], (((2010, 2012), (2013, 2015)), ((2012, 2014), (2016, 2017))))


def test_window_of():
    assert window_of(2011) == (2010, 2012)
    assert window_of(2014) == (2013, 2015)
    assert window_of(2020) is None


def test_committee_roundtrip(tmp_path):
    rosters = [CommitteeRoster("G1", CommitteeKind.GOVERNMENT,
                               (CommitteeEntry(name="A B", address="X 1"), CommitteeEntry(director_id="D1")),
                               (2013, 2015))]
    path = tmp_path / "c.csv"
    write_committees(rosters, path)
    assert parse_committees(path) == rosters
