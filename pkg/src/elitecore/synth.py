"""Synthetic board registries with a planted broker core, and a committee-assignment DGP.

Random streams: one ``numpy.random.Generator`` (PCG64) per entity class,
spawned from ``SeedSequence(seed)`` in the fixed order of ``STREAMS``. Adding
draws to one class therefore never shifts another class's numbers.

Planted core
    ``core_size`` directors wired as the generalized Petersen graph
    GP(core_size/2, 2): every core director sits on three two-seat core boards,
    and the graph has girth >= 5, so a core director's core contacts are never
    adjacent to each other. Each core director also hosts on one periphery
    board. Together these keep every core director's middleman brokerage at
    or above 1 whatever happens to the periphery.

Periphery
    Board cliques joined by multi-board directors, with the director-board
    incidence graph kept a forest (planted and host boards counted as one node).
    A ``standalone_share`` of periphery boards takes no multi-board directors,
    so their members stay outside the largest component.
    The co-board projection of a forest is a tree of cliques, which broker
    pruning always peels to nothing, so the survivors are exactly the planted
    core and fringe, and ``core_size=0`` yields no brokers at all.
    Planted two-seat boards are small companies (size shifted down by
    ``planted_board_shift``), so a planted director's best company rank comes
    from the host board, which is a large company with probability
    ``host_large_share``.

Fringe
    About ``fringe_ratio * core_size`` directors in cubic, triangle-free units
    (cube Q3 and prism C5 x K2), wired and hosted like the core, each unit tied
    to one core director by a two-seat bridge board. They survive pruning, but
    their reach degree (about 9-11 half-units against the core's 12) leaves
    them below the maximal core, so synthetic runs populate every elite
    category and give graded coreness.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from datetime import date, timedelta
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import pandas as pd
from scipy.cluster.hierarchy import DisjointSet
from scipy.optimize import brentq
from scipy.special import expit, logit

from .design import ModelSpec, encode_design
from .registry import (
    DEFAULT_PERIOD_MAP,
    CommitteeEntry,
    CommitteeKind,
    CommitteeRoster,
    DirectorAttributes,
    ClassOrigin,
    FinancialRecord,
    MigrantStatus,
    MonthIndex,
    PositionRecord,
    Role,
    Window,
    DIRECTOR_COLUMNS,
    FINANCIAL_COLUMNS,
    GROUP_COLUMNS,
    write_committees,
    write_positions,
)

STREAMS = ("core", "boards", "seats", "roles", "dates", "financials", "groups", "directors", "committees", "ids")

DESK_SEED = 20151001
SEAT_ATTEMPTS = 20  # draws per surplus seat before it is left empty


class InfeasibleConfig(ValueError):
    pass


@dataclass
class DgpSpec:
    """Logistic data-generating process over design columns named as in ``encode_design``."""

    spec: ModelSpec
    coefficients: dict[str, float]
    intercept: float | None = None  # None: calibrate to the base rate

    def design_coefficients(self, names: list[str], intercept: float) -> np.ndarray:
        unknown = set(self.coefficients) - set(names)
        if unknown:
            raise ValueError(f"DGP coefficients for columns not in the design: {sorted(unknown)}")
        return np.array([intercept if n == "Intercept" else self.coefficients.get(n, 0.0) for n in names])

    def linear_part(self, frame: pd.DataFrame) -> tuple[np.ndarray, list[str]]:
        work = frame.copy()
        if self.spec.response not in work.columns:
            work[self.spec.response] = 0
        d = encode_design(work, self.spec, strict=False)
        beta = self.design_coefficients(d.names, 0.0)
        return d.X @ beta, d.names

    def calibrated_intercept(self, frame: pd.DataFrame, base_rate: float) -> float:
        if self.intercept is not None:
            return self.intercept
        eta, _ = self.linear_part(frame)
        return calibrate_intercept(eta, base_rate)

    def to_dict(self) -> dict[str, Any]:
        return {"spec": self.spec.to_dict(), "coefficients": dict(self.coefficients), "intercept": self.intercept}

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "DgpSpec":
        return cls(ModelSpec.from_dict(doc["spec"]), dict(doc["coefficients"]), doc.get("intercept"))


def calibrate_intercept(eta: np.ndarray, base_rate: float) -> float:
    """Intercept that makes the mean success probability equal ``base_rate``."""
    if not 0 < base_rate < 1:
        raise ValueError("base rate must lie in (0, 1)")
    f = lambda c: float(expit(c + eta).mean()) - base_rate  # noqa: E731
    lo, hi = -60.0, 60.0
    return float(brentq(f, lo, hi, xtol=1e-12, rtol=1e-12))


def default_dgp() -> DgpSpec:
    """Coreness helps everyone, but directors of smaller companies gain more from it."""
    spec = ModelSpec(
        name="dgp",
        response="gov_committee",
        terms=["std_coreness", "company_rank_cat"],
        interactions=[("std_coreness", "company_rank_cat")],
    )
    coefs = {
        "std_coreness": 3.2,
        "company_rank_cat[Top1_50]": 1.0,
        "company_rank_cat[Top51_500]": 0.6,
        "company_rank_cat[Top501_5000]": 0.3,
        "std_coreness:company_rank_cat[Top1_50]": -3.2,
        "std_coreness:company_rank_cat[Top51_500]": -1.9,
        "std_coreness:company_rank_cat[Top501_5000]": -1.0,
    }
    return DgpSpec(spec, coefs)


@dataclass
class SynthConfig:
    seed: int = DESK_SEED
    n_directors: int = 1000
    n_boards: int = 200
    months: int = 1
    start_month: str = "2013-01"
    board_size_mu: float = 1.95
    board_size_sigma: float = 0.5
    board_size_min: int = 2
    board_size_max: int = 50
    activity_sigma: float = 1.0
    max_boards_per_director: int = 12
    core_size: int = 20
    fringe_ratio: float = 1.0
    standalone_share: float = 0.15
    planted_board_shift: float = 3.0
    host_large_share: float = 0.4
    turnover: float = 0.1
    large_share: float = 0.05
    subsidiary_share: float = 0.2
    missing_employees: float = 0.03
    base_rate: float = 0.007
    n_committees: int = 50
    n_business_committees: int = 20
    dgp: dict = field(default_factory=lambda: default_dgp().to_dict())
    verify: bool = True

    @classmethod
    def population_scale(cls, **overrides) -> "SynthConfig":
        """Registry sized like the full population network (~200k directors, ~120k boards)."""
        base = dict(n_directors=200_000, n_boards=120_000, board_size_mu=1.05, board_size_sigma=0.55,
                    core_size=300, activity_sigma=0.8, verify=False)
        base.update(overrides)
        return cls(**base)

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "SynthConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(doc) - known
        if extra:
            raise ValueError(f"unknown synth config keys: {sorted(extra)}")
        return cls(**doc)

    def validate(self) -> None:
        for name in ("n_directors", "n_boards", "months"):
            if getattr(self, name) <= 0:
                raise InfeasibleConfig(f"{name} must be positive")
        if self.core_size < 0 or self.core_size % 2:
            raise InfeasibleConfig("core_size must be a non-negative even number (GP(n, 2) wiring)")
        if 0 < self.core_size < 10:
            raise InfeasibleConfig("core_size below 10 cannot be wired with girth >= 5")
        if self.core_size > self.n_directors:
            raise InfeasibleConfig("core_size exceeds n_directors")
        if self.fringe_ratio < 0:
            raise InfeasibleConfig("fringe_ratio must be non-negative")
        if not 0 <= self.standalone_share < 1:
            raise InfeasibleConfig("standalone_share must lie in [0, 1)")
        units = fringe_units(self.core_size, self.fringe_ratio)
        planted = self.core_size + sum(FRINGE_UNITS[u][0] for u in units)
        wired = 3 * (self.core_size // 2) + sum(len(FRINGE_UNITS[u][1]) + 1 for u in units)
        if planted > self.n_directors:
            raise InfeasibleConfig(f"core and fringe need {planted} directors; n_directors is {self.n_directors}")
        if self.n_boards - wired < planted + 1:
            raise InfeasibleConfig(
                f"{self.n_boards} boards leave too few periphery boards to host {planted} planted directors "
                f"(core and fringe wiring use {wired} boards)")


@dataclass
class GroundTruth:
    planted_core: frozenset[str]
    tier: dict[str, str]  # core, fringe or periphery
    planted_coreness: dict[str, float]  # expected standardized coreness of core and fringe directors
    large_companies: frozenset[str]
    dgp: dict


@dataclass
class SyntheticRegistry:
    positions: list[PositionRecord]
    financials: list[FinancialRecord]
    groups: dict[str, str]
    directors: dict[str, DirectorAttributes]
    truth: GroundTruth
    config: SynthConfig
    committees: list[CommitteeRoster] = field(default_factory=list)

    @property
    def months(self) -> list[MonthIndex]:
        first = MonthIndex.parse(self.config.start_month)
        out = [first]
        for _ in range(self.config.months - 1):
            out.append(out[-1].next())
        return out


def _streams(seed: int) -> dict[str, np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(len(STREAMS))
    return {name: np.random.Generator(np.random.PCG64(ss)) for name, ss in zip(STREAMS, children)}


def petersen_edges(n: int) -> list[tuple[int, int]]:
    """Edges of the generalized Petersen graph GP(n, 2) on 2n vertices."""
    edges = set()
    for i in range(n):
        for a, b in ((i, (i + 1) % n), (i, n + i), (n + i, n + (i + 2) % n)):
            edges.add((min(a, b), max(a, b)))
    return sorted(edges)


def _cube_edges() -> list[tuple[int, int]]:
    return sorted((a, a ^ bit) for a in range(8) for bit in (1, 2, 4) if a < a ^ bit)


def _prism_edges() -> list[tuple[int, int]]:
    edges = [(i, (i + 1) % 5) for i in range(5)] + [(5 + i, 5 + (i + 1) % 5) for i in range(5)]
    edges += [(i, 5 + i) for i in range(5)]
    return sorted((min(a, b), max(a, b)) for a, b in edges)


FRINGE_UNITS = {"cube": (8, _cube_edges()), "prism": (10, _prism_edges())}  # unit -> (size, edges)


def fringe_units(core_size: int, ratio: float) -> list[str]:
    """Alternate cube and prism units while the fringe stays within ``ratio * core_size`` directors."""
    target = ratio * core_size
    units: list[str] = []
    total = 0
    while True:
        nxt = ("cube", "prism")[len(units) % 2]
        if total + FRINGE_UNITS[nxt][0] > target:
            return units
        units.append(nxt)
        total += FRINGE_UNITS[nxt][0]


def girth(n_nodes: int, edges: list[tuple[int, int]]) -> float:
    adj: list[list[int]] = [[] for _ in range(n_nodes)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    best = math.inf
    for s in range(n_nodes):
        dist = {s: 0}
        parent = {s: -1}
        queue = [s]
        for u in queue:
            for v in adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    parent[v] = u
                    queue.append(v)
                elif parent[u] != v:
                    best = min(best, dist[u] + dist[v] + 1)
    return best


_FIRST = ["Anne", "Søren", "Jørgen", "Mette", "Lars", "Åse", "Henrik", "Birgitte", "Niels", "Kirsten",
          "Peter", "Hanne", "Jens", "Lone", "Morten", "Rikke", "Ole", "Pia", "Bjørn", "Karen"]
_LAST = ["Jensen", "Nielsen", "Hansen", "Pedersen", "Andersen", "Christensen", "Larsen", "Sørensen",
         "Rasmussen", "Jørgensen", "Petersen", "Madsen", "Kristensen", "Olsen", "Thomsen", "Møller"]
_STREET = ["Nørregade", "Østergade", "Vesterbrogade", "Strandvejen", "Bredgade", "Åboulevarden", "Havnegade"]
_NACE = list("ABCDEFGHJKLMN")


def generate_registry(cfg: SynthConfig) -> SyntheticRegistry:
    """Draw a registry whose planted core must survive broker pruning.

    Deterministic in ``cfg``; raises ``InfeasibleConfig`` when the requested
    wiring cannot be built.
    """
    cfg.validate()
    rng = _streams(cfg.seed)
    n_core = cfg.core_size
    half = n_core // 2
    core_edges = petersen_edges(half) if n_core else []
    if n_core and girth(n_core, core_edges) < 5:
        raise InfeasibleConfig(f"GP({half}, 2) has girth below 5; choose another core_size")

    # planted directors: core first, then the fringe units; every planted edge is a two-seat board
    planted_edges = list(core_edges)
    n_planted = n_core
    units = fringe_units(n_core, cfg.fringe_ratio)
    for k, unit in enumerate(units):
        size, edges = FRINGE_UNITS[unit]
        planted_edges += [(a + n_planted, b + n_planted) for a, b in edges]
        planted_edges.append(((k * n_core) // len(units), n_planted))  # bridge to the core
        n_planted += size
    n_core_boards = len(planted_edges)
    n_periph_boards = cfg.n_boards - n_core_boards
    n_periph = cfg.n_directors - n_planted

    # board sizes (periphery boards only; core boards have two seats)
    raw = rng["boards"].lognormal(cfg.board_size_mu, cfg.board_size_sigma, size=n_periph_boards)
    sizes = np.clip(np.rint(raw), cfg.board_size_min, cfg.board_size_max).astype(np.int64)
    host_boards = (rng["core"].choice(n_periph_boards, size=n_planted, replace=False) if n_planted
                   else np.zeros(0, int))
    host_of = np.full(n_periph_boards, -1, dtype=np.int64)
    host_of[host_boards] = np.arange(n_planted)
    periph_seats = sizes - (host_of >= 0)
    open_boards = np.flatnonzero(host_of < 0)
    n_standalone = int(round(cfg.standalone_share * open_boards.size))
    standalone = np.zeros(n_periph_boards, dtype=bool)
    if n_standalone:
        standalone[rng["boards"].choice(open_boards, size=n_standalone, replace=False)] = True
    total = int(periph_seats.sum())
    if total < n_periph:
        raise InfeasibleConfig(
            f"periphery boards offer {total} seats for {n_periph} periphery directors; raise board sizes")

    # every periphery director gets one seat, then the surplus goes to active directors.
    # Seats are only accepted while the director-board incidence graph stays a forest
    # (planted and host boards count as one node): pruning then peels every periphery
    # director, so only planted structure can survive. Standalone boards keep only their
    # first-seat members; their surplus seats stay empty.
    seats = np.repeat(np.arange(n_periph_boards), periph_seats)
    rng["seats"].shuffle(seats)
    holding: list[set[int]] = [set() for _ in range(n_periph)]
    forest = DisjointSet(range(n_periph + n_periph_boards))
    for b in host_boards[1:]:
        forest.merge(n_periph + int(host_boards[0]), n_periph + int(b))
    for d in range(n_periph):
        b = int(seats[d])
        holding[d].add(b)
        forest.merge(d, n_periph + b)
    activity = rng["seats"].lognormal(0.0, cfg.activity_sigma, size=n_periph) if n_periph else np.zeros(0)
    prob = activity / activity.sum() if n_periph else activity
    extra = seats[n_periph:]
    pool = rng["seats"].choice(n_periph, size=max(2 * extra.size, 16), p=prob) if n_periph and extra.size else []
    cursor = 0
    closed = standalone[seats[:n_periph]]
    for b in extra:
        b = int(b)
        if standalone[b]:
            continue
        for _ in range(SEAT_ATTEMPTS):
            if cursor >= len(pool):
                pool = rng["seats"].choice(n_periph, size=max(extra.size, 16), p=prob)
                cursor = 0
            d = int(pool[cursor])
            cursor += 1
            if closed[d] or len(holding[d]) >= cfg.max_boards_per_director or forest.connected(d, n_periph + b):
                continue
            holding[d].add(b)
            forest.merge(d, n_periph + b)
            break

    # identifiers: shuffle so that ids carry no tier information
    dir_perm = rng["ids"].permutation(cfg.n_directors)
    board_perm = rng["ids"].permutation(cfg.n_boards)
    director_ids = [f"D{int(k) + 1:06d}" for k in dir_perm]
    company_ids = [f"C{int(k) + 1:06d}" for k in board_perm]
    planted_ids = director_ids[:n_planted]
    core_ids = planted_ids[:n_core]
    periph_ids = director_ids[n_planted:]
    core_board_ids = company_ids[:n_core_boards]
    periph_board_ids = company_ids[n_core_boards:]

    members: dict[str, list[str]] = {c: [] for c in company_ids}
    for k, (a, b) in enumerate(planted_edges):
        members[core_board_ids[k]] += [planted_ids[a], planted_ids[b]]
    for c_idx, b in enumerate(host_boards):
        members[periph_board_ids[int(b)]].append(planted_ids[c_idx])
    for d, boards in enumerate(holding):
        for b in sorted(boards):
            members[periph_board_ids[b]].append(periph_ids[d])

    # dates
    months = [MonthIndex.parse(cfg.start_month)]
    for _ in range(cfg.months - 1):
        months.append(months[-1].next())
    study_start, study_end = months[0].first_day, months[-1].last_day
    span = (study_end - study_start).days
    planted_set = set(planted_ids)
    positions: list[PositionRecord] = []
    r_dates, r_roles = rng["dates"], rng["roles"]
    for c in company_ids:
        people = sorted(members[c])
        if not people:
            continue
        chair = people[int(r_roles.integers(len(people)))]
        executive = people[int(r_roles.integers(len(people)))] if r_roles.random() < 0.5 else None
        for person in people:
            roles = []
            if person == chair:
                roles.append(Role.CHAIR)
            if person == executive:
                roles.append(Role.EXECUTIVE)
            if not roles:
                roles.append(Role.ORDINARY)
            start = study_start - timedelta(days=int(r_dates.integers(1, 3650)))
            end = None
            if person not in planted_set:
                if r_dates.random() < cfg.turnover:
                    start = study_start + timedelta(days=int(r_dates.integers(0, span + 1)))
                if r_dates.random() < cfg.turnover:
                    lo = max((start - study_start).days, 0)
                    end = study_start + timedelta(days=int(r_dates.integers(lo, span + 1)))
            for role in roles:
                positions.append(PositionRecord(person, c, role, start, end))
    positions.sort(key=lambda r: (r.director_id, r.company_id, r.start_date, r.role.value))

    # groups: large companies and a share of others are roots; subsidiaries hang off roots
    r_fin, r_grp = rng["financials"], rng["groups"]
    n_large = max(1, int(round(cfg.large_share * cfg.n_boards)))
    hosts = host_boards + n_core_boards
    large_idx = set(int(i) for i in hosts[r_fin.random(hosts.size) < cfg.host_large_share])
    rest = np.setdiff1d(np.arange(n_core_boards, cfg.n_boards), hosts)
    n_fill = min(max(n_large - len(large_idx), 0), rest.size)
    large_idx |= set(int(i) for i in r_fin.choice(rest, size=n_fill, replace=False))
    large = frozenset(company_ids[i] for i in large_idx)
    parents: dict[str, str] = {}
    roots = [c for i, c in enumerate(company_ids) if i in large_idx]
    is_sub = np.zeros(cfg.n_boards, dtype=bool)
    for i, c in enumerate(company_ids):
        if i not in large_idx and r_grp.random() < cfg.subsidiary_share:
            is_sub[i] = True
    roots += [c for i, c in enumerate(company_ids) if i not in large_idx and not is_sub[i]]
    roots_sorted = sorted(roots)
    large_sorted = sorted(large)
    for i, c in enumerate(company_ids):
        if is_sub[i]:
            pick = large_sorted if r_grp.random() < 0.6 else roots_sorted
            parents[c] = pick[int(r_grp.integers(len(pick)))]
        else:
            parents[c] = c

    # financials, one record per company-year of the study
    years = sorted({m.year for m in months})
    financials: list[FinancialRecord] = []
    size = r_fin.normal(0.0, 1.0, size=cfg.n_boards)
    for i in large_idx:
        size[i] += 4.0
    size[:n_core_boards] -= cfg.planted_board_shift
    founded = years[0] - r_fin.integers(0, 90, size=cfg.n_boards)
    nace = [_NACE[int(k)] for k in r_fin.integers(0, len(_NACE), size=cfg.n_boards)]
    listed = [(i in large_idx and r_fin.random() < 0.3) or r_fin.random() < 0.005 for i in range(cfg.n_boards)]
    for y_off, year in enumerate(years):
        noise = r_fin.normal(0.0, 1.0, size=(cfg.n_boards, 3))
        drift = 0.02 * y_off
        employees = np.rint(np.exp(2.0 + 1.3 * size + 0.4 * noise[:, 0] + drift))
        revenue = np.rint(np.exp(15.0 + 1.4 * size + 0.5 * noise[:, 1] + drift))
        assets = np.rint(np.exp(15.5 + 1.5 * size + 0.6 * noise[:, 2] + drift))
        missing = r_fin.random(cfg.n_boards) < cfg.missing_employees
        for i, c in enumerate(company_ids):
            financials.append(FinancialRecord(
                company_id=c,
                year=year,
                employees=None if missing[i] else float(employees[i]),
                revenue=float(revenue[i]),
                assets=float(assets[i]),
                is_subsidiary=bool(is_sub[i]),
                is_listed=bool(listed[i]),
                founded_year=int(founded[i]),
                industry=nace[i],
            ))
    financials.sort(key=lambda r: (r.company_id, r.year))

    directors = _draw_directors(rng["directors"], director_ids, planted_set, years[0])
    tier = {d: "periphery" for d in periph_ids}
    tier.update({d: ("core" if k < n_core else "fringe") for k, d in enumerate(planted_ids)})
    planted_coreness = _planted_coreness([(planted_ids[a], planted_ids[b]) for a, b in planted_edges])
    truth = GroundTruth(frozenset(core_ids), tier, planted_coreness, large, dict(cfg.dgp))
    reg = SyntheticRegistry(positions, financials, parents, directors, truth, cfg)
    reg.committees = assign_committees(committee_features_from_truth(reg), truth, cfg, rng["committees"], reg)
    if cfg.verify and n_core:
        verify_planted_core(reg)
    return reg


def _planted_coreness(edges: list[tuple[str, str]]) -> dict[str, float]:
    """Standardized coreness of the planted directors once the periphery is pruned away."""
    from .graph import CoBoardGraph, build_reach_graph
    from .kcore import standardized_coreness, weighted_kcore

    if not edges:
        return {}
    table = weighted_kcore(build_reach_graph(CoBoardGraph.from_edges(edges)))
    return {d: float(v) for d, v in standardized_coreness(table).items()}


def _draw_directors(rng: np.random.Generator, ids: list[str], elite: set[str], year: int) -> dict[str, DirectorAttributes]:
    out = {}
    migrants = list(MigrantStatus)
    origins = list(ClassOrigin)
    for k, d in enumerate(sorted(ids)):
        is_core = d in elite
        lead = 0.2 if is_core else 0.01
        first = _FIRST[int(rng.integers(len(_FIRST)))]
        last = _LAST[int(rng.integers(len(_LAST)))]
        street = _STREET[int(rng.integers(len(_STREET)))]
        out[d] = DirectorAttributes(
            director_id=d,
            name=f"{first} {last}",
            address=f"{street} {k + 1}, {1000 + int(rng.integers(9000))}",
            female=bool(rng.random() < 0.2),
            migrant=migrants[int(rng.choice(3, p=[0.9, 0.07, 0.03]))],
            birth_year=int(year - rng.integers(25, 85)),
            college=bool(rng.random() < 0.4),
            master=bool(rng.random() < 0.25),
            top_income=bool(rng.random() < (0.1 if is_core else 0.01)),
            top_wealth=bool(rng.random() < (0.1 if is_core else 0.01)),
            class_origin=origins[int(rng.integers(4))],
            ba_leader_cur=bool(rng.random() < lead / 2),
            ba_leader_prev=bool(rng.random() < lead),
            union_leader_cur=bool(rng.random() < lead / 4),
            union_leader_prev=bool(rng.random() < lead / 2),
            politician_cur=bool(rng.random() < 0.002),
            politician_prev=bool(rng.random() < lead / 3),
        )
    return out


def committee_features_from_truth(reg: SyntheticRegistry) -> pd.DataFrame:
    """Director features from the planted truth: standardized coreness of planted directors (0 for
    periphery), company rank from first-year financials."""
    from .ranking import RankCategory, pca_company_rank

    first_year = reg.months[0].year
    table = pca_company_rank(reg.financials, year=first_year)
    ranks = table.ranks
    best: dict[str, int] = {}
    for p in reg.positions:
        r = ranks.get(p.company_id)
        if r is not None:
            best[p.director_id] = min(best.get(p.director_id, r), r)
    ids = sorted(reg.directors)
    return pd.DataFrame({
        "director_id": ids,
        "std_coreness": [reg.truth.planted_coreness.get(d, 0.0) for d in ids],
        "company_rank_cat": [RankCategory.of(best.get(d)).value for d in ids],
        "ba_leader_prev": [int(reg.directors[d].ba_leader_prev) for d in ids],
    })


def _committee_windows(reg: SyntheticRegistry) -> list[tuple[Window, Window]]:
    years = {m.year for m in reg.months}
    return [(o, c) for o, c in DEFAULT_PERIOD_MAP if any(o[0] <= y <= o[1] for y in years)]


def assign_committees(features: pd.DataFrame, truth: GroundTruth, cfg: SynthConfig,
                      rng: np.random.Generator, reg: SyntheticRegistry | None = None) -> list[CommitteeRoster]:
    """Bernoulli committee draws from the DGP, emitted as rosters keyed by name and address."""
    dgp = DgpSpec.from_dict(truth.dgp)
    eta, _ = dgp.linear_part(features)
    intercept = dgp.intercept if dgp.intercept is not None else calibrate_intercept(eta, cfg.base_rate)
    p_gov = expit(intercept + eta)
    ba = features["ba_leader_prev"].to_numpy(dtype=float) if "ba_leader_prev" in features else 0.0
    core = features["std_coreness"].to_numpy(dtype=float) if "std_coreness" in features else 0.0
    p_ba = expit(logit(0.01) + 2.0 * ba + 1.5 * core)
    ids = features["director_id"].tolist()
    windows = _committee_windows(reg) if reg is not None else [DEFAULT_PERIOD_MAP[0]]
    rosters: list[CommitteeRoster] = []
    for w_idx, (_, cwin) in enumerate(windows):
        gov_hit = rng.random(len(ids)) < p_gov
        ba_hit = rng.random(len(ids)) < p_ba
        for kind, hits, count, prefix in (
            (CommitteeKind.GOVERNMENT, gov_hit, cfg.n_committees, "G"),
            (CommitteeKind.BUSINESS_ASSOCIATION, ba_hit, cfg.n_business_committees, "B"),
        ):
            slots: list[list[CommitteeEntry]] = [[] for _ in range(max(count, 1))]
            for i in np.flatnonzero(hits):
                d = ids[i]
                attrs = reg.directors.get(d) if reg is not None else None
                if attrs is not None and rng.random() < 0.8:
                    entry = CommitteeEntry(name=attrs.name.upper() if rng.random() < 0.3 else attrs.name,
                                           address=attrs.address)
                else:
                    entry = CommitteeEntry(director_id=d)
                slots[int(rng.integers(len(slots)))].append(entry)
            for k, entries in enumerate(slots):
                if entries:
                    rosters.append(CommitteeRoster(f"{prefix}{w_idx + 1}{k + 1:04d}", kind, tuple(entries), cwin))
    return rosters


def verify_planted_core(reg: SyntheticRegistry) -> None:
    """Check that every planted core and fringe director survives broker pruning in every month."""
    from .brokerage import prune_brokers
    from .graph import largest_component, project_coboard
    from .registry import PositionIndex

    index = PositionIndex(reg.positions, reg.months[-1].last_day)
    planted = frozenset(reg.truth.planted_coreness)
    for month in reg.months:
        g = project_coboard(index.snapshot(month))
        lc = largest_component(g)
        missing = planted - lc
        if missing:
            raise InfeasibleConfig(f"{month}: {len(missing)} planted directors outside the largest component")
        report = prune_brokers(g.subgraph(lc))
        lost = planted - report.survivors
        if lost:
            raise AssertionError(f"{month}: planted directors pruned: {sorted(lost)[:5]}")


def write_registry(reg: SyntheticRegistry, out: str | Path) -> Path:
    """Write every registry CSV plus ``ground_truth.csv`` and ``dgp.json``."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    write_positions(reg.positions, out / "positions.csv")
    with open(out / "financials.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FINANCIAL_COLUMNS)
        for r in reg.financials:
            w.writerow([r.company_id, r.year, _num(r.employees), _num(r.revenue), _num(r.assets),
                        int(r.is_subsidiary), int(r.is_listed), r.founded_year if r.founded_year is not None else "",
                        r.industry or ""])
    with open(out / "groups.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(GROUP_COLUMNS)
        for c in sorted(reg.groups):
            w.writerow([c, reg.groups[c]])
    with open(out / "directors.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DIRECTOR_COLUMNS)
        for d in sorted(reg.directors):
            a = reg.directors[d]
            w.writerow([a.director_id, a.name, a.address, "F" if a.female else "M", a.migrant.value,
                        a.birth_year if a.birth_year is not None else "", int(a.college), int(a.master),
                        int(a.top_income), int(a.top_wealth), a.class_origin.value, int(a.ba_leader_cur),
                        int(a.ba_leader_prev), int(a.union_leader_cur), int(a.union_leader_prev),
                        int(a.politician_cur), int(a.politician_prev)])
    write_committees(reg.committees, out / "committees.csv")
    with open(out / "ground_truth.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["director_id", "tier", "planted_core", "planted_std_coreness"])
        for d in sorted(reg.truth.tier):
            w.writerow([d, reg.truth.tier[d], int(d in reg.truth.planted_core),
                        f"{reg.truth.planted_coreness.get(d, 0.0):.6f}"])
    doc = {"dgp": reg.truth.dgp, "base_rate": reg.config.base_rate, "seed": reg.config.seed,
           "config": {k: v for k, v in asdict(reg.config).items() if k != "dgp"}}
    (out / "dgp.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return out


def _num(v: float | None) -> str:
    if v is None:
        return ""
    return str(int(v)) if float(v).is_integer() else repr(float(v))


# --------------------------------------------------------------------------
# synthetic panels for estimator checks


RANK_SHARES = {"Top1_50": 0.1, "Top51_500": 0.2, "Top501_5000": 0.3, "Beyond5000": 0.4}


def synthetic_panel(seed: int, n_rows: int = 200_000, dgp: DgpSpec | None = None, base_rate: float = 0.007,
                    zero_coreness_share: float = 0.5) -> tuple[pd.DataFrame, dict[str, float]]:
    """Draw covariates and a committee response from a logistic DGP.

    Returns the frame and the true coefficients by design column (intercept
    calibrated to ``base_rate`` on the drawn covariates).
    """
    dgp = dgp or default_dgp()
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    core = rng.random(n_rows)
    core = np.where(rng.random(n_rows) < zero_coreness_share, 0.0, core)
    levels = list(RANK_SHARES)
    rank = np.array(levels, dtype=object)[rng.choice(len(levels), size=n_rows, p=list(RANK_SHARES.values()))]
    frame = pd.DataFrame({
        "director_id": [f"S{i:07d}" for i in range(n_rows)],
        "std_coreness": core,
        "company_rank_cat": rank,
        "corp_rank_cat": rank,
    })
    eta, names = dgp.linear_part(frame)
    intercept = dgp.calibrated_intercept(frame, base_rate)
    p = expit(intercept + eta)
    frame[dgp.spec.response] = (rng.random(n_rows) < p).astype(int)
    truth = {n: (intercept if n == "Intercept" else dgp.coefficients.get(n, 0.0)) for n in names}
    return frame, truth
