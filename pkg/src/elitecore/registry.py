"""Registry ingestion: board positions, monthly snapshots, company data, committees.

All readers take UTF-8 CSV files with a header row and ISO-8601 dates.
Errors carry the 1-based data row number (header excluded) so a bad line
can be located in the source file.
"""

from __future__ import annotations

import calendar
import csv
import enum
import logging
import re
import unicodedata
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

LOGGER = logging.getLogger(__name__)

POSITION_COLUMNS = ["director_id", "company_id", "role", "start_date", "end_date"]
FINANCIAL_COLUMNS = [
    "company_id",
    "year",
    "employees",
    "revenue",
    "assets",
    "is_subsidiary",
    "is_listed",
    "founded_year",
    "nace1",
]
GROUP_COLUMNS = ["company_id", "ultimate_parent_id"]
COMMITTEE_COLUMNS = [
    "committee_id",
    "kind",
    "member_name",
    "member_address",
    "member_director_id",
    "window_start",
    "window_end",
]
DIRECTOR_COLUMNS = [
    "director_id",
    "name",
    "address",
    "gender",
    "migrant",
    "birth_year",
    "college",
    "master",
    "top_income",
    "top_wealth",
    "class_origin",
    "ba_leader_cur",
    "ba_leader_prev",
    "union_leader_cur",
    "union_leader_prev",
    "politician_cur",
    "politician_prev",
]

Window = tuple[int, int]
DEFAULT_PERIOD_MAP: tuple[tuple[Window, Window], ...] = (
    ((2010, 2012), (2013, 2015)),
    ((2013, 2015), (2016, 2017)),
)


class RegistryError(ValueError):
    """Malformed registry input. ``row`` is the 1-based data row, if known."""

    def __init__(self, message: str, row: int | None = None, path: str | None = None):
        self.row = row
        self.path = path
        where = ""
        if path:
            where += f"{path}: "
        if row is not None:
            where += f"row {row}: "
        super().__init__(where + message)


class GroupCycleError(RegistryError):
    pass


class Role(enum.Enum):
    EXECUTIVE = "Executive"
    CHAIR = "Chair"
    ORDINARY = "OrdinaryMember"

    @classmethod
    def parse(cls, token: str) -> "Role":
        key = re.sub(r"[\s_]+", "", token).lower()
        for role, aliases in _ROLE_ALIASES.items():
            if key in aliases:
                return role
        raise ValueError(f"unknown role token {token!r}")


_ROLE_ALIASES = {
    Role.EXECUTIVE: {"executive", "exec"},
    Role.CHAIR: {"chair", "chairman", "chairperson"},
    Role.ORDINARY: {"ordinarymember", "ordinary", "member"},
}


class CommitteeKind(enum.Enum):
    GOVERNMENT = "Government"
    BUSINESS_ASSOCIATION = "BusinessAssociation"

    @classmethod
    def parse(cls, token: str) -> "CommitteeKind":
        key = re.sub(r"[\s_]+", "", token).lower()
        if key in {"government", "gov"}:
            return cls.GOVERNMENT
        if key in {"businessassociation", "business", "ba"}:
            return cls.BUSINESS_ASSOCIATION
        raise ValueError(f"unknown committee kind {token!r}")


@dataclass(frozen=True, order=True)
class MonthIndex:
    year: int
    month: int

    def __post_init__(self):
        if not 1 <= self.month <= 12:
            raise ValueError(f"month out of range: {self.month}")

    @classmethod
    def parse(cls, text: str) -> "MonthIndex":
        year, month = text.strip().split("-")[:2]
        return cls(int(year), int(month))

    @classmethod
    def of(cls, day: date) -> "MonthIndex":
        return cls(day.year, day.month)

    @property
    def first_day(self) -> date:
        return date(self.year, self.month, 1)

    @property
    def last_day(self) -> date:
        return date(self.year, self.month, calendar.monthrange(self.year, self.month)[1])

    def next(self) -> "MonthIndex":
        if self.month == 12:
            return MonthIndex(self.year + 1, 1)
        return MonthIndex(self.year, self.month + 1)

    def ordinal(self) -> int:
        return self.year * 12 + self.month - 1

    def __str__(self) -> str:
        return f"{self.year:04d}-{self.month:02d}"


def month_range(first: MonthIndex, last: MonthIndex) -> list[MonthIndex]:
    """Inclusive list of months from ``first`` to ``last``."""
    out = []
    m = first
    while m <= last:
        out.append(m)
        m = m.next()
    return out


@dataclass(frozen=True, order=True, slots=True)
class PositionRecord:
    director_id: str
    company_id: str
    role: Role = field(compare=False)
    start_date: date
    end_date: date | None = field(default=None, compare=False)

    def overlaps(self, first: date, last: date, study_end: date | None = None) -> bool:
        if self.start_date > last:
            return False
        if self.end_date is None:
            return study_end is None or first <= study_end
        return self.end_date >= first


@dataclass(frozen=True)
class Snapshot:
    month: MonthIndex
    active_positions: tuple[PositionRecord, ...]

    @property
    def directors(self) -> list[str]:
        return sorted({p.director_id for p in self.active_positions})

    @property
    def companies(self) -> list[str]:
        return sorted({p.company_id for p in self.active_positions})

    def boards(self) -> dict[str, list[str]]:
        """company_id -> sorted distinct director ids serving that month."""
        members: dict[str, set[str]] = defaultdict(set)
        for p in self.active_positions:
            members[p.company_id].add(p.director_id)
        return {c: sorted(ds) for c, ds in sorted(members.items())}


@dataclass(frozen=True)
class FinancialRecord:
    company_id: str
    year: int
    employees: float | None
    revenue: float | None
    assets: float | None
    is_subsidiary: bool = False
    is_listed: bool = False
    founded_year: int | None = None
    industry: str | None = None

    def indicator(self, name: str) -> float | None:
        return getattr(self, name)


@dataclass(frozen=True)
class CommitteeEntry:
    name: str | None = None
    address: str | None = None
    director_id: str | None = None


@dataclass(frozen=True)
class CommitteeRoster:
    committee_id: str
    kind: CommitteeKind
    entries: tuple[CommitteeEntry, ...]
    window: Window


class MigrantStatus(enum.Enum):
    NATIVE = "Native"
    IMMIGRANT = "Immigrant"
    DESCENDANT = "Descendant"


class ClassOrigin(enum.Enum):
    EMPLOYER = "Employer"
    MANAGER = "Manager"
    PROFESSIONAL = "Professional"
    OTHER = "Other"


@dataclass(frozen=True)
class DirectorAttributes:
    director_id: str
    name: str = ""
    address: str = ""
    female: bool = False
    migrant: MigrantStatus = MigrantStatus.NATIVE
    birth_year: int | None = None
    college: bool = False
    master: bool = False
    top_income: bool = False
    top_wealth: bool = False
    class_origin: ClassOrigin = ClassOrigin.OTHER
    ba_leader_cur: bool = False
    ba_leader_prev: bool = False
    union_leader_cur: bool = False
    union_leader_prev: bool = False
    politician_cur: bool = False
    politician_prev: bool = False


@dataclass(frozen=True)
class MembershipFlags:
    government: bool = False
    business: bool = False


# --------------------------------------------------------------------------
# CSV helpers


def _read_rows(path: str | Path, required: Sequence[str]) -> Iterable[tuple[int, dict[str, str]]]:
    path = str(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise RegistryError("missing header row", path=path)
        missing = [c for c in required if c not in reader.fieldnames]
        if missing:
            raise RegistryError(f"missing columns {missing}", path=path)
        for i, row in enumerate(reader, start=1):
            yield i, row


def _parse_date(text: str, row: int, column: str, path: str) -> date:
    try:
        return date.fromisoformat(text.strip())
    except ValueError:
        raise RegistryError(f"malformed date in {column}: {text!r}", row, path) from None


def _opt_float(text: str | None) -> float | None:
    if text is None or text.strip() == "" or text.strip().upper() in {"NA", "NAN"}:
        return None
    return float(text)


def _opt_int(text: str | None) -> int | None:
    value = _opt_float(text)
    return None if value is None else int(value)


def _flag(text: str | None) -> bool:
    if text is None:
        return False
    return text.strip().lower() in {"1", "true", "t", "yes", "y"}


# --------------------------------------------------------------------------
# positions


def parse_positions(path: str | Path) -> list[PositionRecord]:
    """Read ``positions.csv`` into records sorted by (director, company, start).

    Identical duplicate rows are dropped; rows sharing the key
    (director_id, company_id, role, start_date) but differing otherwise are
    a ``RegistryError``.
    """
    path = str(path)
    seen: dict[tuple, tuple[int, PositionRecord]] = {}
    for row_no, row in _read_rows(path, POSITION_COLUMNS):
        director = row["director_id"].strip()
        company = row["company_id"].strip()
        if not director or not company:
            raise RegistryError("empty director_id or company_id", row_no, path)
        try:
            role = Role.parse(row["role"])
        except ValueError as exc:
            raise RegistryError(str(exc), row_no, path) from None
        start = _parse_date(row["start_date"], row_no, "start_date", path)
        end_text = (row.get("end_date") or "").strip()
        end = _parse_date(end_text, row_no, "end_date", path) if end_text else None
        if end is not None and end < start:
            raise RegistryError(f"inverted interval {start}..{end}", row_no, path)
        rec = PositionRecord(director, company, role, start, end)
        key = (director, company, role, start)
        if key in seen:
            first_row, prev = seen[key]
            if prev.end_date == rec.end_date:
                continue
            raise RegistryError(f"duplicate key {key[:2]} {role.value} {start} (first seen at row {first_row})", row_no, path)
        seen[key] = (row_no, rec)
    records = [rec for _, rec in seen.values()]
    records.sort(key=lambda r: (r.director_id, r.company_id, r.start_date, r.role.value))
    return records


def write_positions(records: Iterable[PositionRecord], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(POSITION_COLUMNS)
        for r in records:
            w.writerow([r.director_id, r.company_id, r.role.value, r.start_date.isoformat(),
                        r.end_date.isoformat() if r.end_date else ""])


def build_snapshot(records: Sequence[PositionRecord], month: MonthIndex,
                   study_end: date | None = None) -> Snapshot:
    """Positions active for at least one day of ``month``.

    Open-ended positions run through ``study_end`` (or indefinitely when no
    study end is given).
    """
    first, last = month.first_day, month.last_day
    active = tuple(r for r in records if r.overlaps(first, last, study_end))
    return Snapshot(month, active)


class PositionIndex:
    """Columnar view of position records for repeated monthly snapshots."""

    def __init__(self, records: Sequence[PositionRecord], study_end: date | None = None):
        self.records = list(records)
        far = date.max.toordinal()
        self.start = np.fromiter((r.start_date.toordinal() for r in self.records), dtype=np.int64,
                                 count=len(self.records))
        end_open = study_end.toordinal() if study_end is not None else far
        self.end = np.fromiter(
            (r.end_date.toordinal() if r.end_date is not None else end_open for r in self.records),
            dtype=np.int64, count=len(self.records))

    def snapshot(self, month: MonthIndex) -> Snapshot:
        lo, hi = month.first_day.toordinal(), month.last_day.toordinal()
        idx = np.flatnonzero((self.start <= hi) & (self.end >= lo))
        recs = self.records
        return Snapshot(month, tuple(recs[i] for i in idx))

    def months_spanned(self) -> tuple[MonthIndex, MonthIndex] | None:
        if not self.records:
            return None
        first = MonthIndex.of(date.fromordinal(int(self.start.min())))
        finite = self.end[self.end < date.max.toordinal()]
        last_ord = int(max(finite.max() if finite.size else self.start.max(), self.start.max()))
        return first, MonthIndex.of(date.fromordinal(last_ord))


# --------------------------------------------------------------------------
# company registry


def ultimate_parents(links: Mapping[str, str]) -> dict[str, str]:
    """Resolve a company -> parent mapping to company -> ultimate parent.

    A parent that is not itself listed is treated as a root. Raises
    ``GroupCycleError`` naming a company on any cycle.
    """
    resolved: dict[str, str] = {}
    for start in sorted(links):
        if start in resolved:
            continue
        chain = []
        on_chain = set()
        node = start
        while True:
            if node in resolved:
                root = resolved[node]
                break
            parent = links.get(node, node)
            if parent == node:
                root = node
                break
            if node in on_chain:
                raise GroupCycleError(f"cycle in group links through company {node!r}")
            chain.append(node)
            on_chain.add(node)
            node = parent
        for c in chain:
            resolved[c] = root
        resolved.setdefault(node, root)
    return resolved


def load_company_registry(financials_path: str | Path, groups_path: str | Path | None
                          ) -> tuple[dict[tuple[str, int], FinancialRecord], dict[str, str]]:
    """Read ``financials.csv`` and ``groups.csv``.

    Returns ``({(company_id, year): FinancialRecord}, {company_id: ultimate_parent_id})``.
    Missing numeric fields are kept as ``None``.
    """
    fpath = str(financials_path)
    table: dict[tuple[str, int], FinancialRecord] = {}
    for row_no, row in _read_rows(fpath, FINANCIAL_COLUMNS):
        try:
            rec = FinancialRecord(
                company_id=row["company_id"].strip(),
                year=int(row["year"]),
                employees=_opt_float(row["employees"]),
                revenue=_opt_float(row["revenue"]),
                assets=_opt_float(row["assets"]),
                is_subsidiary=_flag(row["is_subsidiary"]),
                is_listed=_flag(row["is_listed"]),
                founded_year=_opt_int(row["founded_year"]),
                industry=(row["nace1"] or "").strip() or None,
            )
        except ValueError as exc:
            raise RegistryError(f"bad numeric field: {exc}", row_no, fpath) from None
        for name in ("employees", "revenue", "assets"):
            value = rec.indicator(name)
            if value is not None and value < 0:
                raise RegistryError(f"negative {name}", row_no, fpath)
        key = (rec.company_id, rec.year)
        if key in table:
            raise RegistryError(f"duplicate financial key {key}", row_no, fpath)
        table[key] = rec

    links: dict[str, str] = {}
    if groups_path is not None:
        gpath = str(groups_path)
        for row_no, row in _read_rows(gpath, GROUP_COLUMNS):
            company = row["company_id"].strip()
            parent = (row["ultimate_parent_id"] or "").strip() or company
            if company in links and links[company] != parent:
                raise RegistryError(f"company {company!r} has two parents", row_no, gpath)
            links[company] = parent
    return table, ultimate_parents(links)


# --------------------------------------------------------------------------
# directors and committees


def parse_directors(path: str | Path) -> dict[str, DirectorAttributes]:
    path = str(path)
    out: dict[str, DirectorAttributes] = {}
    for row_no, row in _read_rows(path, DIRECTOR_COLUMNS):
        try:
            attrs = DirectorAttributes(
                director_id=row["director_id"].strip(),
                name=row["name"] or "",
                address=row["address"] or "",
                female=(row["gender"] or "").strip().upper() in {"F", "FEMALE", "1"},
                migrant=MigrantStatus((row["migrant"] or "Native").strip() or "Native"),
                birth_year=_opt_int(row["birth_year"]),
                college=_flag(row["college"]),
                master=_flag(row["master"]),
                top_income=_flag(row["top_income"]),
                top_wealth=_flag(row["top_wealth"]),
                class_origin=ClassOrigin((row["class_origin"] or "Other").strip() or "Other"),
                ba_leader_cur=_flag(row["ba_leader_cur"]),
                ba_leader_prev=_flag(row["ba_leader_prev"]),
                union_leader_cur=_flag(row["union_leader_cur"]),
                union_leader_prev=_flag(row["union_leader_prev"]),
                politician_cur=_flag(row["politician_cur"]),
                politician_prev=_flag(row["politician_prev"]),
            )
        except ValueError as exc:
            raise RegistryError(str(exc), row_no, path) from None
        if attrs.director_id in out:
            raise RegistryError(f"duplicate director {attrs.director_id!r}", row_no, path)
        out[attrs.director_id] = attrs
    return out


def parse_committees(path: str | Path) -> list[CommitteeRoster]:
    path = str(path)
    grouped: dict[str, dict] = {}
    for row_no, row in _read_rows(path, COMMITTEE_COLUMNS):
        cid = row["committee_id"].strip()
        try:
            kind = CommitteeKind.parse(row["kind"])
            window = (int(row["window_start"]), int(row["window_end"]))
        except ValueError as exc:
            raise RegistryError(str(exc), row_no, path) from None
        entry = CommitteeEntry(
            name=(row["member_name"] or "").strip() or None,
            address=(row["member_address"] or "").strip() or None,
            director_id=(row["member_director_id"] or "").strip() or None,
        )
        if entry.director_id is None and (entry.name is None or entry.address is None):
            raise RegistryError("committee entry needs a director id or a name and address", row_no, path)
        slot = grouped.setdefault(cid, {"kind": kind, "window": window, "entries": []})
        if slot["kind"] != kind or slot["window"] != window:
            raise RegistryError(f"committee {cid!r} has inconsistent kind or window", row_no, path)
        slot["entries"].append(entry)
    return [CommitteeRoster(cid, v["kind"], tuple(v["entries"]), v["window"])
            for cid, v in sorted(grouped.items())]


def write_committees(rosters: Iterable[CommitteeRoster], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COMMITTEE_COLUMNS)
        for r in rosters:
            for e in r.entries:
                w.writerow([r.committee_id, r.kind.value, e.name or "", e.address or "",
                            e.director_id or "", r.window[0], r.window[1]])


_PUNCT = re.compile(r"[^\w\s]", flags=re.UNICODE)
_SPACE = re.compile(r"\s+")


def normalize_text(text: str) -> str:
    """Lowercase, strip diacritics, drop punctuation, collapse whitespace."""
    decomposed = unicodedata.normalize("NFKD", text)
    stripped = "".join(ch for ch in decomposed if not unicodedata.combining(ch))
    stripped = _PUNCT.sub(" ", stripped.lower())
    return _SPACE.sub(" ", stripped).strip()


def match_committee_members(
    directors: Mapping[str, DirectorAttributes],
    rosters: Sequence[CommitteeRoster],
    period_map: Sequence[tuple[Window, Window]] = DEFAULT_PERIOD_MAP,
) -> dict[tuple[str, Window], MembershipFlags]:
    """Flag directors found on committees of the window mapped from each observation window.

    Returns ``{(director_id, observation_window): MembershipFlags}`` for every
    director and every observation window in ``period_map``. A roster whose
    window is not a target of ``period_map`` is ignored with a warning.
    """
    obs_windows = [tuple(o) for o, _ in period_map]
    for i, a in enumerate(obs_windows):
        for b in obs_windows[i + 1:]:
            if a[0] <= b[1] and b[0] <= a[1]:
                raise ValueError(f"observation windows overlap: {a} and {b}")
    target_of = {tuple(c): tuple(o) for o, c in period_map}

    by_key = {}
    by_id = {}
    for d in directors.values():
        by_key.setdefault((normalize_text(d.name), normalize_text(d.address)), []).append(d.director_id)
        by_id[d.director_id] = d.director_id

    hits: dict[tuple[str, Window], set[CommitteeKind]] = defaultdict(set)
    for roster in rosters:
        obs = target_of.get(tuple(roster.window))
        if obs is None:
            LOGGER.warning("committee %s window %s not covered by period map; ignored",
                           roster.committee_id, roster.window)
            continue
        for entry in roster.entries:
            matched: list[str] = []
            if entry.director_id is not None and entry.director_id in by_id:
                matched.append(entry.director_id)
            if entry.name is not None and entry.address is not None:
                matched.extend(by_key.get((normalize_text(entry.name), normalize_text(entry.address)), ()))
            for did in matched:
                hits[(did, obs)].add(roster.kind)

    out = {}
    for did in sorted(directors):
        for obs in obs_windows:
            kinds = hits.get((did, obs), set())
            out[(did, obs)] = MembershipFlags(
                government=CommitteeKind.GOVERNMENT in kinds,
                business=CommitteeKind.BUSINESS_ASSOCIATION in kinds,
            )
    return out


def window_of(year: int, period_map: Sequence[tuple[Window, Window]] = DEFAULT_PERIOD_MAP) -> Window | None:
    """Observation window containing ``year``, if any."""
    for obs, _ in period_map:
        if obs[0] <= year <= obs[1]:
            return tuple(obs)
    return None
