"""Director-month panel assembly and the coreness enrichment report."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import asdict, dataclass, field, fields
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np
import pandas as pd

from .kcore import EliteCategory
from .ranking import DirectorRankProfile, RankCategory
from .registry import (
    DEFAULT_PERIOD_MAP,
    DirectorAttributes,
    FinancialRecord,
    MembershipFlags,
    MonthIndex,
    Window,
    window_of,
)

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class PanelRow:
    director_id: str
    month: str
    gov_committee: int
    elite_category: int
    std_coreness: float
    company_rank_cat: str
    corp_rank_cat: str
    top50_linker: int
    top500_linker: int
    top50_corp_linker: int
    top500_corp_linker: int
    top50_executive: int
    top500_executive: int
    top50_chair: int
    top500_chair: int
    executive: int
    chair: int
    board_count: int
    board_bin: str
    ba_committee: int
    ba_leader_cur: int
    ba_leader_prev: int
    union_leader_cur: int
    union_leader_prev: int
    politician_cur: int
    politician_prev: int
    subsidiary: int
    listed: int
    company_age_cat: str
    industry: str
    female: int
    migrant: str
    age_cat: str
    college: int
    master: int
    top_income: int
    top_wealth: int
    class_origin: str


PANEL_COLUMNS = [f.name for f in fields(PanelRow)]


@dataclass(frozen=True)
class MonthNetwork:
    """Per-month elite measures for every active director."""

    month: MonthIndex
    category: Mapping[str, int]
    std_coreness: Mapping[str, float]


@dataclass
class DataQuality:
    rows: int = 0
    missing_attributes: int = 0
    missing_company_financials: int = 0
    outside_period_map: int = 0
    counts: Counter = field(default_factory=Counter)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["counts"] = dict(sorted(self.counts.items()))
        return d


def board_bin(count: int) -> str:
    return "10+" if count >= 10 else str(max(count, 1))


def director_age_cat(age: int | None) -> str:
    if age is None:
        return "Missing"
    if age <= 30:
        return "18-30"
    if age <= 44:
        return "31-44"
    if age <= 59:
        return "45-59"
    if age <= 74:
        return "60-74"
    return "75+"


def company_age_cat(age: int | None) -> str:
    if age is None or age < 0:
        return "Missing"
    if age <= 11:
        return "1-11"
    if age <= 25:
        return "12-25"
    if age <= 50:
        return "26-50"
    return "50+"


def assemble_panel(
    networks: Iterable[MonthNetwork],
    profiles: Mapping[str, Mapping[str, DirectorRankProfile]],
    attributes: Mapping[str, DirectorAttributes],
    committee_flags: Mapping[tuple[str, Window], MembershipFlags],
    financials: Mapping[tuple[str, int], FinancialRecord],
    period_map: Sequence[tuple[Window, Window]] = DEFAULT_PERIOD_MAP,
    quality: DataQuality | None = None,
) -> Iterator[PanelRow]:
    """One row per active director per month.

    ``profiles`` is keyed by month string then director. Company controls come
    from the director's best-ranked board in that calendar year. Missing
    attributes fall back to "Missing" levels and are counted in ``quality``.
    """
    quality = quality if quality is not None else DataQuality()
    for net in networks:
        key = str(net.month)
        month_profiles = profiles.get(key, {})
        window = window_of(net.month.year, period_map)
        for did in sorted(net.category):
            prof = month_profiles.get(did)
            attrs = attributes.get(did)
            if attrs is None:
                quality.missing_attributes += 1
                attrs = DirectorAttributes(director_id=did)
            flags = committee_flags.get((did, window)) if window else None
            if window is None:
                quality.outside_period_map += 1
            flags = flags or MembershipFlags()
            company = prof.best_company if prof else None
            fin = financials.get((company, net.month.year)) if company else None
            if fin is None:
                quality.missing_company_financials += 1
            founded = fin.founded_year if fin else None
            cat = int(net.category[did])
            quality.counts[cat] += 1
            quality.rows += 1
            age = net.month.year - attrs.birth_year if attrs.birth_year is not None else None
            bc = prof.board_count if prof else 1
            yield PanelRow(
                director_id=did,
                month=key,
                gov_committee=int(flags.government),
                elite_category=cat,
                std_coreness=float(net.std_coreness.get(did, 0.0)),
                company_rank_cat=(prof.best_category if prof else RankCategory.BEYOND5000).value,
                corp_rank_cat=(prof.best_corp_category if prof else RankCategory.BEYOND5000).value,
                top50_linker=int(bool(prof and prof.top50_linker)),
                top500_linker=int(bool(prof and prof.top500_linker)),
                top50_corp_linker=int(bool(prof and prof.top50_corp_linker)),
                top500_corp_linker=int(bool(prof and prof.top500_corp_linker)),
                top50_executive=int(bool(prof and prof.top50_executive)),
                top500_executive=int(bool(prof and prof.top500_executive)),
                top50_chair=int(bool(prof and prof.top50_chair)),
                top500_chair=int(bool(prof and prof.top500_chair)),
                executive=int(bool(prof and prof.executive)),
                chair=int(bool(prof and prof.chair)),
                board_count=bc,
                board_bin=board_bin(bc),
                ba_committee=int(flags.business),
                ba_leader_cur=int(attrs.ba_leader_cur),
                ba_leader_prev=int(attrs.ba_leader_prev),
                union_leader_cur=int(attrs.union_leader_cur),
                union_leader_prev=int(attrs.union_leader_prev),
                politician_cur=int(attrs.politician_cur),
                politician_prev=int(attrs.politician_prev),
                subsidiary=int(bool(fin and fin.is_subsidiary)),
                listed=int(bool(fin and fin.is_listed)),
                company_age_cat=company_age_cat(net.month.year - founded if founded is not None else None),
                industry=(fin.industry if fin and fin.industry else "Missing"),
                female=int(attrs.female),
                migrant=attrs.migrant.value,
                age_cat=director_age_cat(age),
                college=int(attrs.college),
                master=int(attrs.master),
                top_income=int(attrs.top_income),
                top_wealth=int(attrs.top_wealth),
                class_origin=attrs.class_origin.value,
            )


def panel_frame(rows: Iterable[PanelRow]) -> pd.DataFrame:
    records = [tuple(getattr(r, c) for c in PANEL_COLUMNS) for r in rows]
    return pd.DataFrame.from_records(records, columns=PANEL_COLUMNS)


def read_panel(path) -> pd.DataFrame:
    dtypes = {c: str for c in ("director_id", "month", "company_rank_cat", "corp_rank_cat", "board_bin",
                               "company_age_cat", "industry", "migrant", "age_cat", "class_origin")}
    return pd.read_csv(path, dtype=dtypes, keep_default_na=False)


POLITICAL_FLAGS = ("gov_committee", "ba_committee", "interest_leader")


def coreness_concentration_report(panel: pd.DataFrame, flags: Sequence[str] = POLITICAL_FLAGS,
                                  bins: Sequence[float] = tuple(np.linspace(0.0, 1.0, 11))) -> pd.DataFrame:
    """Share of each flag per standardized-coreness bin relative to its share among all brokers.

    Ratios are computed within each month and then averaged over months.
    ``interest_leader`` is derived as any current or previous business
    association or union leadership. Bins are left-closed, the last one closed.
    """
    df = panel[panel["elite_category"].astype(int) >= int(EliteCategory.LOCAL_BROKER)].copy()
    if "interest_leader" in flags and "interest_leader" not in df.columns:
        lead = ["ba_leader_cur", "ba_leader_prev", "union_leader_cur", "union_leader_prev"]
        df["interest_leader"] = (df[lead].astype(int).sum(axis=1) > 0).astype(int)
    edges = np.asarray(bins, dtype=float)
    nb = len(edges) - 1
    idx = np.clip(np.searchsorted(edges, df["std_coreness"].to_numpy(dtype=float), side="right") - 1, 0, nb - 1)
    df["bin"] = idx
    out = []
    for flag in flags:
        per_bin: dict[int, list[float]] = {}
        for _, g in df.groupby("month", sort=True):
            base = g[flag].astype(float).mean()
            if not base > 0:
                continue
            shares = g.groupby("bin")[flag].mean()
            for b, s in shares.items():
                per_bin.setdefault(int(b), []).append(float(s) / base)
        for b in sorted(per_bin):
            out.append((flag, b, float(edges[b]), float(edges[b + 1]), float(np.mean(per_bin[b])), len(per_bin[b])))
    return pd.DataFrame(out, columns=["flag", "bin", "lower", "upper", "ratio", "months"])
