"""Company and corporation size ranks from the first principal component.

Size indicators (employees, revenue, assets) are z-scored per year and the
leading eigenvector of their correlation matrix gives the composite score.
The eigenproblem is at most 3x3 and is solved in closed form.
"""

from __future__ import annotations

import enum
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .registry import FinancialRecord, Role, Snapshot

LOGGER = logging.getLogger(__name__)

INDICATORS = ("employees", "revenue", "assets")


class RankCategory(str, enum.Enum):
    TOP1_50 = "Top1_50"
    TOP51_500 = "Top51_500"
    TOP501_5000 = "Top501_5000"
    BEYOND5000 = "Beyond5000"

    @classmethod
    def of(cls, rank: int | None) -> "RankCategory":
        if rank is None or rank > 5000:
            return cls.BEYOND5000
        if rank <= 50:
            return cls.TOP1_50
        if rank <= 500:
            return cls.TOP51_500
        return cls.TOP501_5000


class RankingError(ValueError):
    pass


# --------------------------------------------------------------------------
# closed-form symmetric eigen-decomposition (p <= 3)


def _orient(v: np.ndarray) -> np.ndarray:
    s = v.sum()
    if s < 0 or (s == 0 and v[np.flatnonzero(v)[0]] < 0):
        v = -v
    return v


def _null_vector3(m: np.ndarray) -> np.ndarray | None:
    """Unit vector spanning the null space of a rank-2 symmetric 3x3 matrix."""
    rows = m
    best = None
    best_norm = 0.0
    for a, b in ((0, 1), (0, 2), (1, 2)):
        c = np.cross(rows[a], rows[b])
        nrm = float(np.dot(c, c))
        if nrm > best_norm:
            best, best_norm = c, nrm
    if best is None or best_norm <= 1e-24:
        return None
    return best / math.sqrt(best_norm)


def symmetric_eigen(corr: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and the leading unit eigenvector of a p x p symmetric matrix, p <= 3.

    The leading eigenvector is oriented to a non-negative component sum.
    """
    a = np.asarray(corr, dtype=float)
    p = a.shape[0]
    if p == 1:
        return np.array([a[0, 0]]), np.array([1.0])
    if p == 2:
        mean = (a[0, 0] + a[1, 1]) / 2
        half = math.hypot((a[0, 0] - a[1, 1]) / 2, a[0, 1])
        lam = np.array([mean + half, mean - half])
        if a[0, 1] == 0 and a[0, 0] == a[1, 1]:
            v = np.array([1.0, 1.0]) / math.sqrt(2)
        elif abs(a[0, 1]) > 0:
            v = np.array([a[0, 1], lam[0] - a[0, 0]])
        else:
            v = np.array([1.0, 0.0]) if a[0, 0] > a[1, 1] else np.array([0.0, 1.0])
        v = v / np.linalg.norm(v)
        return lam, _orient(v)
    if p != 3:
        raise ValueError("closed-form eigen-decomposition supports p <= 3")

    off = a[0, 1] ** 2 + a[0, 2] ** 2 + a[1, 2] ** 2
    q = np.trace(a) / 3
    if off == 0:
        lam = np.sort(np.diag(a))[::-1]
        top = np.isclose(np.diag(a), lam[0], rtol=0, atol=1e-12)
        v = top.astype(float)
        return lam, _orient(v / np.linalg.norm(v))
    p2 = ((a[0, 0] - q) ** 2 + (a[1, 1] - q) ** 2 + (a[2, 2] - q) ** 2) + 2 * off
    pp = math.sqrt(p2 / 6)
    b = (a - q * np.eye(3)) / pp
    r = float(np.linalg.det(b)) / 2
    r = min(1.0, max(-1.0, r))
    phi = math.acos(r) / 3
    l1 = q + 2 * pp * math.cos(phi)
    l3 = q + 2 * pp * math.cos(phi + 2 * math.pi / 3)
    l2 = 3 * q - l1 - l3
    lam = np.array([l1, l2, l3])

    scale = max(abs(l1), abs(l3), 1e-300)
    if (l1 - l2) > 1e-9 * scale:
        v = _null_vector3(a - l1 * np.eye(3))
    else:
        v = None
    if v is None:
        # leading eigenvalue repeated: project the all-ones direction onto its eigenspace
        ones = np.ones(3) / math.sqrt(3)
        if (l2 - l3) > 1e-9 * scale:
            w = _null_vector3(a - l3 * np.eye(3))
            v = ones - np.dot(ones, w) * w
            if np.linalg.norm(v) < 1e-12:
                v = np.cross(w, np.array([1.0, 0.0, 0.0]))
                if np.linalg.norm(v) < 1e-12:
                    v = np.cross(w, np.array([0.0, 1.0, 0.0]))
        else:
            v = ones
        v = v / np.linalg.norm(v)
    return lam, _orient(v)


# --------------------------------------------------------------------------
# rank tables


@dataclass(frozen=True)
class RankTable:
    year: int
    companies: tuple[str, ...]  # in rank order, rank 1 first
    scores: tuple[float, ...]
    explained_share: float
    loadings: tuple[float, ...]
    indicators: tuple[str, ...]
    dropped: tuple[str, ...] = ()
    _rank: dict[str, int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self._rank.update({c: i + 1 for i, c in enumerate(self.companies)})

    @property
    def ranks(self) -> dict[str, int]:
        return dict(self._rank)

    def rank(self, company: str) -> int | None:
        return self._rank.get(company)

    def category(self, company: str) -> RankCategory:
        return RankCategory.of(self._rank.get(company))

    def __len__(self) -> int:
        return len(self.companies)

    def rows(self) -> list[tuple[int, str, float, int, str]]:
        return [(self.year, c, s, i + 1, RankCategory.of(i + 1).value)
                for i, (c, s) in enumerate(zip(self.companies, self.scores))]


def _matrix(records: Sequence[FinancialRecord], impute: str, log1p: bool) -> tuple[list[str], np.ndarray]:
    if impute not in ("zero", "drop"):
        raise ValueError(f"unknown imputation {impute!r}")
    ids = []
    rows = []
    for r in records:
        vals = [r.indicator(name) for name in INDICATORS]
        if all(v is None for v in vals):
            continue
        if impute == "drop" and any(v is None for v in vals):
            continue
        ids.append(r.company_id)
        rows.append([0.0 if v is None else float(v) for v in vals])
    x = np.asarray(rows, dtype=float).reshape(len(rows), len(INDICATORS))
    if log1p:
        x = np.log1p(x)
    return ids, x


def pca_rank_matrix(ids: Sequence[str], x: np.ndarray, year: int,
                    names: Sequence[str] = INDICATORS) -> RankTable:
    """Rank rows of an indicator matrix by their first-component score."""
    if len(ids) < 3:
        raise RankingError(f"year {year}: need at least 3 companies, got {len(ids)}")
    sd = x.std(axis=0)
    keep = [j for j in range(x.shape[1]) if sd[j] > 0]
    dropped = tuple(names[j] for j in range(x.shape[1]) if j not in keep)
    for name in dropped:
        LOGGER.warning("year %s: indicator %s has zero variance and is dropped", year, name)
    if not keep:
        raise RankingError(f"year {year}: every indicator has zero variance")
    x = x[:, keep]
    z = (x - x.mean(axis=0)) / sd[keep]
    corr = (z.T @ z) / z.shape[0]
    corr = (corr + corr.T) / 2
    lam, v = symmetric_eigen(corr)
    share = float(lam[0] / len(keep))
    scores = z @ v
    order = sorted(range(len(ids)), key=lambda i: (-scores[i], ids[i]))
    return RankTable(
        year=year,
        companies=tuple(ids[i] for i in order),
        scores=tuple(float(scores[i]) for i in order),
        explained_share=share,
        loadings=tuple(float(t) for t in v),
        indicators=tuple(names[j] for j in keep),
        dropped=dropped,
    )


def pca_company_rank(financials: Iterable[FinancialRecord], year: int | None = None,
                     impute: str = "zero", log1p: bool = False) -> RankTable:
    """Rank one year's companies. ``financials`` may hold several years; ``year`` selects one."""
    records = [r for r in financials if year is None or r.year == year]
    years = {r.year for r in records}
    if len(years) > 1:
        raise ValueError("pass a single year's records or select one with year=")
    yr = year if year is not None else (years.pop() if years else 0)
    ids, x = _matrix(sorted(records, key=lambda r: r.company_id), impute, log1p)
    return pca_rank_matrix(ids, x, yr)


def aggregate_corporations(financials: Iterable[FinancialRecord], parents: Mapping[str, str]
                           ) -> list[FinancialRecord]:
    """Sum size indicators over all companies that share an ultimate parent.

    Companies absent from ``parents`` stand alone. A corporation total is
    missing only when every member's value is missing.
    """
    sums: dict[tuple[str, int], list] = defaultdict(lambda: [None, None, None])
    for r in financials:
        key = (parents.get(r.company_id, r.company_id), r.year)
        acc = sums[key]
        for j, name in enumerate(INDICATORS):
            v = r.indicator(name)
            if v is not None:
                acc[j] = v if acc[j] is None else acc[j] + v
    return [FinancialRecord(c, y, *vals) for (c, y), vals in sorted(sums.items())]


def corporation_rank(financials: Iterable[FinancialRecord], parents: Mapping[str, str],
                     year: int | None = None, impute: str = "zero", log1p: bool = False
                     ) -> tuple[RankTable, dict[str, int]]:
    """PCA rank over corporations, plus each company's inherited corporation rank."""
    records = [r for r in financials if year is None or r.year == year]
    corp = aggregate_corporations(records, parents)
    table = pca_company_rank(corp, year, impute, log1p)
    inherited = {}
    for r in records:
        rank = table.rank(parents.get(r.company_id, r.company_id))
        if rank is not None:
            inherited[r.company_id] = rank
    return table, inherited


# --------------------------------------------------------------------------
# director profiles


@dataclass(frozen=True)
class DirectorRankProfile:
    director_id: str
    month: object
    best_rank: int | None
    best_category: RankCategory
    best_corp_rank: int | None
    best_corp_category: RankCategory
    best_company: str | None
    top50_linker: bool
    top500_linker: bool
    top50_corp_linker: bool
    top500_corp_linker: bool
    top50_executive: bool
    top500_executive: bool
    top50_chair: bool
    top500_chair: bool
    executive: bool
    chair: bool
    board_count: int


def director_rank_profile(snapshot: Snapshot, company_ranks: Mapping[str, int],
                          corp_ranks: Mapping[str, int] | None = None) -> dict[str, DirectorRankProfile]:
    """Per-director best ranks, linker and role-by-size flags for one month.

    ``company_ranks`` maps company to its own rank; ``corp_ranks`` maps company
    to the rank of its corporation (inherited by subsidiaries).
    """
    corp_ranks = corp_ranks or {}
    boards: dict[str, dict[str, set[Role]]] = defaultdict(lambda: defaultdict(set))
    for p in snapshot.active_positions:
        boards[p.director_id][p.company_id].add(p.role)
    out = {}
    for d in sorted(boards):
        seats = boards[d]
        ranked = [(company_ranks[c], c) for c in seats if c in company_ranks]
        best = min(ranked) if ranked else None
        corp = [corp_ranks[c] for c in seats if c in corp_ranks]
        best_corp = min(corp) if corp else None

        def n_top(table, cutoff):
            return sum(1 for c in seats if table.get(c, cutoff + 1) <= cutoff)

        def role_top(role, cutoff):
            return any(role in roles and company_ranks.get(c, cutoff + 1) <= cutoff for c, roles in seats.items())

        out[d] = DirectorRankProfile(
            director_id=d,
            month=snapshot.month,
            best_rank=best[0] if best else None,
            best_category=RankCategory.of(best[0] if best else None),
            best_corp_rank=best_corp,
            best_corp_category=RankCategory.of(best_corp),
            best_company=best[1] if best else min(seats),
            top50_linker=n_top(company_ranks, 50) >= 2,
            top500_linker=n_top(company_ranks, 500) >= 2,
            top50_corp_linker=n_top(corp_ranks, 50) >= 2,
            top500_corp_linker=n_top(corp_ranks, 500) >= 2,
            top50_executive=role_top(Role.EXECUTIVE, 50),
            top500_executive=role_top(Role.EXECUTIVE, 500),
            top50_chair=role_top(Role.CHAIR, 50),
            top500_chair=role_top(Role.CHAIR, 500),
            executive=any(Role.EXECUTIVE in r for r in seats.values()),
            chair=any(Role.CHAIR in r for r in seats.values()),
            board_count=len(seats),
        )
    return out


def concentration_curve(table: RankTable, financials: Iterable[FinancialRecord]
                        ) -> list[tuple[int, float, float, float]]:
    """Cumulative population shares of each indicator along the rank order."""
    by_company = {r.company_id: r for r in financials if r.year == table.year}
    cols = np.zeros((len(table.companies), len(INDICATORS)))
    for i, c in enumerate(table.companies):
        rec = by_company.get(c)
        if rec is None:
            continue
        for j, name in enumerate(INDICATORS):
            cols[i, j] = rec.indicator(name) or 0.0
    totals = np.array([sum((r.indicator(n) or 0.0) for r in by_company.values()) for n in INDICATORS])
    cum = np.cumsum(cols, axis=0)
    for j, name in enumerate(INDICATORS):
        if totals[j] > 0:
            cum[:, j] /= totals[j]
        else:
            LOGGER.warning("year %s: population total of %s is zero; series set to 0", table.year, name)
            cum[:, j] = 0.0
    return [(i + 1, float(cum[i, 0]), float(cum[i, 1]), float(cum[i, 2])) for i in range(len(table.companies))]
