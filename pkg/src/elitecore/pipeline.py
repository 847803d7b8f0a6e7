"""End-to-end orchestration: config, content-hashed stages, month-parallel network step, reports.

Stages run in a fixed order and talk to each other only through files in
the artifact directory:

    ingest -> rank -> network -> panel -> fit -> report

Each stage has a key hashed from its parameters, the upstream stage key and
(for ingest) the bytes of every input file. Keys and output lists live in
``manifest.json``; a stage whose key and outputs are already present is
reported as cached and skipped. Nothing time- or worker-dependent is written,
so artifact directories are byte-identical across runs and worker counts.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import multiprocessing as mp
import sys
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import numpy as np
import pandas as pd

from .brokerage import MODES, format_ratio, prune_brokers, rounds_csv_rows
from .design import DesignError, ModelSpec, encode_design
from .effects import average_marginal_effects, profile_effects, profile_frame
from .graph import (
    build_reach_graph_indices,
    extract_inner_circle,
    largest_component_indices,
    project_coboard,
)
from .kcore import EliteCategory, core_profile, standardized_coreness, weighted_kcore
from .logit import EstimationError, fit_logistic
from .panel import DataQuality, MonthNetwork, assemble_panel, coreness_concentration_report, panel_frame, read_panel
from .ranking import RankingError, concentration_curve, corporation_rank, director_rank_profile, pca_company_rank
from .registry import (
    FinancialRecord,
    MonthIndex,
    PositionIndex,
    Snapshot,
    load_company_registry,
    match_committee_members,
    month_range,
    parse_committees,
    parse_directors,
    parse_positions,
)

LOGGER = logging.getLogger(__name__)

STAGES = ("ingest", "rank", "network", "panel", "fit", "report")
MEDIATIONS = ("induced", "ambient")
STANDARDIZATIONS = ("ratio", "minmax")
IMPUTATIONS = ("zero", "drop")
RANK_CUTOFFS = (50, 500, 5000)
SWEEPABLE = ("brokerage_threshold", "brokerage_mode", "mediation", "standardize", "company_inclusion",
             "multiplicity")
INPUT_KEYS = ("positions", "financials", "groups", "directors", "committees")


class ConfigError(ValueError):
    pass


class PipelineError(RuntimeError):
    def __init__(self, stage: str, path: Path, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause} (partial outputs under {path})")
        self.stage = stage
        self.path = path
        self.cause = cause


def default_models() -> list[dict]:
    return [
        {"name": "elite_category", "terms": ["elite_category"], "cluster": "director_id"},
        {
            "name": "coreness_by_rank",
            "terms": ["std_coreness", "company_rank_cat"],
            "interactions": [["std_coreness", "company_rank_cat"]],
            "cluster": "director_id",
            "profile": {"focal": "std_coreness", "by": ["company_rank_cat"], "grid": [0, 0.25, 0.5, 0.75, 1]},
        },
    ]


@dataclass
class PipelineConfig:
    # input CSVs; when ``positions`` is unset a synthetic registry is generated from ``synth``
    positions: str | None = None
    financials: str | None = None
    groups: str | None = None
    directors: str | None = None
    committees: str | None = None
    synth: dict = field(default_factory=dict)
    study_start: str | None = None
    study_end: str | None = None
    brokerage_mode: str = "middleman"
    brokerage_threshold: str = "1"
    mediation: str = "induced"
    standardize: str = "ratio"
    multiplicity: bool = False
    rank_impute: str = "zero"
    rank_log1p: bool = False
    rank_cutoffs: list = field(default_factory=lambda: list(RANK_CUTOFFS))
    inner_circle_n: list = field(default_factory=lambda: [50, 500])
    company_inclusion: float = 1.0
    models: list = field(default_factory=default_models)
    period_map: list = field(default_factory=lambda: [[[2010, 2012], [2013, 2015]], [[2013, 2015], [2016, 2017]]])
    workers: int = 1
    seed: int | None = None

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any], base: Path | None = None) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        extra = set(doc) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        cfg = cls(**doc)
        if base is not None:
            for key in INPUT_KEYS:
                v = getattr(cfg, key)
                if v and not Path(v).is_absolute():
                    setattr(cfg, key, str((base / v).resolve()))
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        path = Path(path)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(doc, path.parent)

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def threshold(self) -> Fraction:
        return Fraction(str(self.brokerage_threshold))

    @property
    def period_pairs(self) -> tuple:
        return tuple((tuple(o), tuple(c)) for o, c in self.period_map)

    def model_specs(self) -> list[ModelSpec]:
        return [ModelSpec.from_dict(m) for m in self.models]

    def validate(self) -> None:
        """Check every enum, number and path; raises ``ConfigError`` before any work is done."""
        if self.brokerage_mode not in MODES:
            raise ConfigError(f"brokerage_mode must be one of {MODES}, got {self.brokerage_mode!r}")
        if self.mediation not in MEDIATIONS:
            raise ConfigError(f"mediation must be one of {MEDIATIONS}, got {self.mediation!r}")
        if self.standardize not in STANDARDIZATIONS:
            raise ConfigError(f"standardize must be one of {STANDARDIZATIONS}, got {self.standardize!r}")
        if self.rank_impute not in IMPUTATIONS:
            raise ConfigError(f"rank_impute must be one of {IMPUTATIONS}, got {self.rank_impute!r}")
        try:
            thr = self.threshold
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"brokerage_threshold is not a number: {self.brokerage_threshold!r}") from None
        if thr < 0:
            raise ConfigError("brokerage_threshold must be non-negative")
        if tuple(self.rank_cutoffs) != RANK_CUTOFFS:
            raise ConfigError(f"rank_cutoffs are fixed at {list(RANK_CUTOFFS)} (category labels depend on them)")
        if not 0 < float(self.company_inclusion) <= 1:
            raise ConfigError("company_inclusion must lie in (0, 1]")
        if int(self.workers) < 1:
            raise ConfigError("workers must be at least 1")
        for n in self.inner_circle_n:
            if int(n) < 1:
                raise ConfigError("inner_circle_n entries must be positive")
        for key in INPUT_KEYS:
            v = getattr(self, key)
            if v and not Path(v).exists():
                raise ConfigError(f"{key} path does not exist: {v}")
        if self.positions is None:
            from .synth import SynthConfig, InfeasibleConfig

            try:
                SynthConfig.from_dict(self.synth).validate()
            except (ValueError, TypeError, InfeasibleConfig) as exc:
                raise ConfigError(f"synth: {exc}") from None
        elif not self.financials:
            raise ConfigError("financials path is required with positions")
        try:
            months = [MonthIndex.parse(m) for m in (self.study_start, self.study_end) if m]
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if len(months) == 2 and months[1] < months[0]:
            raise ConfigError("study_end precedes study_start")
        try:
            pairs = self.period_pairs
            for o, c in pairs:
                if len(o) != 2 or len(c) != 2 or o[0] > o[1] or c[0] > c[1]:
                    raise ValueError(f"bad window pair {o} -> {c}")
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"period_map: {exc}") from None
        names = set()
        for m in self.models:
            try:
                spec = ModelSpec.from_dict(m)
            except (KeyError, DesignError) as exc:
                raise ConfigError(f"model spec: {exc}") from None
            if spec.name in names:
                raise ConfigError(f"duplicate model name {spec.name!r}")
            names.add(spec.name)


# --------------------------------------------------------------------------
# hashing and the manifest


def _canon(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str).encode()


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def stage_key(name: str, upstream: str, params: Mapping[str, Any]) -> str:
    return hashlib.sha256(_canon({"stage": name, "upstream": upstream, "params": params})).hexdigest()


class Manifest:
    def __init__(self, root: Path):
        self.path = root / "manifest.json"
        self.root = root
        self.stages: dict[str, dict] = {}
        if self.path.exists():
            try:
                self.stages = json.loads(self.path.read_text(encoding="utf-8")).get("stages", {})
            except json.JSONDecodeError:
                self.stages = {}

    def fresh(self, name: str, key: str) -> bool:
        entry = self.stages.get(name)
        return bool(entry and entry["key"] == key and all((self.root / p).exists() for p in entry["outputs"]))

    def record(self, name: str, key: str, outputs: Sequence[str]) -> None:
        self.stages[name] = {"key": key, "outputs": sorted(outputs)}
        self.save()

    def forget(self, name: str) -> None:
        if self.stages.pop(name, None) is not None:
            self.save()

    def save(self) -> None:
        ordered = {s: self.stages[s] for s in STAGES if s in self.stages}
        self.path.write_text(json.dumps({"stages": ordered}, indent=2) + "\n", encoding="utf-8")


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _write_json(path: Path, doc) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _num(x: float) -> str:
    return repr(float(x))


# --------------------------------------------------------------------------
# inputs


@dataclass
class Inputs:
    positions: list
    financials: dict[tuple[str, int], FinancialRecord]
    parents: dict[str, str]
    directors: dict
    committees: list
    months: list[MonthIndex]
    index: PositionIndex
    digests: dict[str, str]

    @property
    def financial_list(self) -> list[FinancialRecord]:
        return [self.financials[k] for k in sorted(self.financials)]


def materialize_inputs(cfg: PipelineConfig, out: Path) -> PipelineConfig:
    """Write the synthetic registry when no positions file is configured; return a config with paths set."""
    if cfg.positions:
        return cfg
    from .synth import SynthConfig, generate_registry, write_registry

    doc = dict(cfg.synth)
    if cfg.seed is not None:
        doc["seed"] = int(cfg.seed)
    scfg = SynthConfig.from_dict(doc)
    target = out / "input"
    stamp = target / "synth_key.txt"
    key = hashlib.sha256(_canon(asdict(scfg))).hexdigest()
    if not (stamp.exists() and stamp.read_text().strip() == key):
        write_registry(generate_registry(scfg), target)
        stamp.write_text(key + "\n")
    resolved = PipelineConfig.from_dict(cfg.to_dict())
    for name in INPUT_KEYS:
        setattr(resolved, name, str(target / f"{name}.csv"))
    # the study period defaults to the generated months, not the span of all start dates
    first = MonthIndex.parse(scfg.start_month)
    last = first
    for _ in range(scfg.months - 1):
        last = last.next()
    resolved.study_start = resolved.study_start or str(first)
    resolved.study_end = resolved.study_end or str(last)
    return resolved


def load_inputs(cfg: PipelineConfig) -> Inputs:
    positions = parse_positions(cfg.positions)
    financials, parents = load_company_registry(cfg.financials, cfg.groups)
    directors = parse_directors(cfg.directors) if cfg.directors else {}
    committees = parse_committees(cfg.committees) if cfg.committees else []
    probe = PositionIndex(positions)
    span = probe.months_spanned()
    if cfg.study_start:
        first = MonthIndex.parse(cfg.study_start)
    elif span:
        first = span[0]
    else:
        raise ConfigError("no positions and no study_start")
    last = MonthIndex.parse(cfg.study_end) if cfg.study_end else (span[1] if span else first)
    months = month_range(first, last)
    index = PositionIndex(positions, months[-1].last_day)
    digests = {k: file_digest(getattr(cfg, k)) for k in INPUT_KEYS if getattr(cfg, k)}
    return Inputs(positions, financials, parents, directors, committees, months, index, digests)


# --------------------------------------------------------------------------
# ranks


@dataclass
class YearRanks:
    year: int
    source_year: int
    company: dict[str, int]
    corp_inherited: dict[str, int]


def _rank_years(inputs: Inputs, cfg: PipelineConfig):
    """Rank tables per study year; a year without financials borrows the latest earlier year."""
    have = sorted({y for _, y in inputs.financials})
    if not have:
        raise RankingError("no financial records")
    recs = inputs.financial_list
    cache = {}
    out = {}
    for year in sorted({m.year for m in inputs.months}):
        earlier = [y for y in have if y <= year]
        src = earlier[-1] if earlier else have[0]
        if src != year:
            LOGGER.warning("no financials for %s; using %s", year, src)
        if src not in cache:
            table = pca_company_rank(recs, src, cfg.rank_impute, cfg.rank_log1p)
            corp_table, inherited = corporation_rank(recs, inputs.parents, src, cfg.rank_impute, cfg.rank_log1p)
            cache[src] = (table, corp_table, inherited)
        out[year] = (src,) + cache[src]
    return out


def _read_ranks(out: Path) -> dict[int, YearRanks]:
    comp = pd.read_csv(out / "ranks.csv", dtype={"company_id": str})
    corp = pd.read_csv(out / "corp_inherited.csv", dtype={"company_id": str})
    years = pd.read_csv(out / "rank_years.csv")
    res = {}
    for row in years.itertuples(index=False):
        c = comp[comp["year"] == row.source_year]
        k = corp[corp["year"] == row.source_year]
        res[int(row.year)] = YearRanks(int(row.year), int(row.source_year),
                                       dict(zip(c["company_id"], c["rank"].astype(int))),
                                       dict(zip(k["company_id"], k["corp_rank"].astype(int))))
    return res


# --------------------------------------------------------------------------
# per-month network step

_JOB: dict[str, Any] = {}


def _month_job(month: MonthIndex) -> dict:
    index: PositionIndex = _JOB["index"]
    cfg: PipelineConfig = _JOB["cfg"]
    keep = _JOB["keep"]
    snap = index.snapshot(month)
    if keep is not None:
        allowed = keep[month.year]
        snap = Snapshot(month, tuple(p for p in snap.active_positions if p.company_id in allowed))
    return analyse_month(snap, cfg)


def analyse_month(snap: Snapshot, cfg: PipelineConfig) -> dict:
    """Project, take the largest component, prune brokers, build the reach graph and peel it."""
    g = project_coboard(snap, multiplicity=cfg.multiplicity)
    lc_idx = largest_component_indices(g)
    lc_graph = g.subgraph_indices(lc_idx)
    report = prune_brokers(lc_graph, cfg.threshold, cfg.brokerage_mode)
    surv_idx = np.array(sorted(lc_graph.index[d] for d in report.survivors), dtype=np.int64)
    rg = build_reach_graph_indices(lc_graph, surv_idx, cfg.mediation, cfg.multiplicity)
    table = weighted_kcore(rg, snap.month)
    std = standardized_coreness(table, mode=cfg.standardize)
    core = dict(zip(table.ids, table.coreness))
    top = int(table.degeneracy)
    lc = set(lc_graph.ids)
    rows = []
    counts = [0, 0, 0, 0]
    for d in g.ids:
        if d not in lc:
            cat = EliteCategory.NOT_IN_LARGEST_COMPONENT
        elif d not in report.survivors:
            cat = EliteCategory.LARGEST_COMPONENT_ONLY
        elif top > 0 and core[d] == top:
            cat = EliteCategory.NETWORK_CORE
        else:
            cat = EliteCategory.LOCAL_BROKER
        counts[int(cat) - 1] += 1
        c = core.get(d)
        rows.append([d, int(cat), "" if c is None else str(c), format_ratio(std.get(d, Fraction(0)))])
    summary = {
        "month": str(snap.month),
        "active": g.n,
        "lc_size": len(lc),
        "round1_survivors": report.round_one_survivors,
        "broker_count": len(report.survivors),
        "degeneracy_halfunits": top,
        "core_size": counts[3],
        "rounds": len(report.rounds),
    }
    return {"month": str(snap.month), "rows": rows, "rounds": rounds_csv_rows(report), "summary": summary,
            "profile": core_profile(table)}


def _run_months(jobs: Sequence[MonthIndex], workers: int, state: dict) -> list[dict]:
    _JOB.clear()
    _JOB.update(state)
    try:
        if workers <= 1 or len(jobs) <= 1:
            return [_month_job(m) for m in jobs]
        ctx = mp.get_context("fork")
        with ctx.Pool(min(workers, len(jobs))) as pool:
            return list(pool.imap(_month_job, jobs, chunksize=1))
    finally:
        _JOB.clear()


# --------------------------------------------------------------------------
# the runner


@dataclass
class StageStatus:
    stage: str
    status: str  # "ran" | "cached"


class Pipeline:
    def __init__(self, cfg: PipelineConfig, out: str | Path, echo: Callable[[str], None] | None = None):
        cfg.validate()
        self.out = Path(out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.cfg = materialize_inputs(cfg, self.out)
        self.echo = echo or (lambda s: print(s, file=sys.stdout))
        self.manifest = Manifest(self.out)
        self._inputs: Inputs | None = None
        self.keys: dict[str, str] = {}
        self.statuses: list[StageStatus] = []

    @property
    def inputs(self) -> Inputs:
        if self._inputs is None:
            self._inputs = load_inputs(self.cfg)
        return self._inputs

    # stage parameters (workers deliberately excluded)
    def _params(self, stage: str) -> dict:
        c = self.cfg
        if stage == "ingest":
            return {"inputs": self.inputs.digests, "months": [str(m) for m in self.inputs.months],
                    "period_map": c.period_map}
        if stage == "rank":
            return {"impute": c.rank_impute, "log1p": c.rank_log1p}
        if stage == "network":
            return {"mode": c.brokerage_mode, "threshold": str(c.threshold), "mediation": c.mediation,
                    "standardize": c.standardize, "multiplicity": c.multiplicity,
                    "inclusion": float(c.company_inclusion)}
        if stage == "fit":
            return {"models": c.models}
        if stage == "report":
            return {"inner_circle_n": [int(n) for n in c.inner_circle_n]}
        return {}

    def run(self, until: str = "report") -> list[StageStatus]:
        if until not in STAGES:
            raise ConfigError(f"unknown stage {until!r}")
        upstream = ""
        for name in STAGES[: STAGES.index(until) + 1]:
            key = stage_key(name, upstream, self._params(name))
            self.keys[name] = key
            upstream = key
            if self.manifest.fresh(name, key):
                self.statuses.append(StageStatus(name, "cached"))
                self.echo(f"{name}: cached")
                continue
            self.manifest.forget(name)
            try:
                outputs = getattr(self, f"_stage_{name}")()
            except (ConfigError, PipelineError):
                raise
            except Exception as exc:  # noqa: BLE001 - rewrapped with stage context
                raise PipelineError(name, self.out, exc) from exc
            self.manifest.record(name, key, outputs)
            self.statuses.append(StageStatus(name, "ran"))
            self.echo(f"{name}: done")
        return self.statuses

    # -- stages

    def _stage_ingest(self) -> list[str]:
        inp = self.inputs
        directors = {p.director_id for p in inp.positions}
        seats = {(p.director_id, p.company_id) for p in inp.positions}
        n_dir = max(len(directors), 1)
        doc = {
            "months": [str(m) for m in inp.months],
            "positions": len(inp.positions),
            # role rows and distinct boards per director, since multi-role seats count once or twice
            "position_rows_per_director": round(len(inp.positions) / n_dir, 6),
            "boards_per_director": round(len(seats) / n_dir, 6),
            "companies_with_financials": len({c for c, _ in inp.financials}),
            "directors_with_attributes": len(inp.directors),
            "committee_rosters": len(inp.committees),
            "inputs": inp.digests,
        }
        _write_json(self.out / "ingest.json", doc)
        return ["ingest.json"]

    def _stage_rank(self) -> list[str]:
        years = _rank_years(self.inputs, self.cfg)
        seen = set()
        rank_rows, corp_rows, inherit_rows, conc_rows, year_rows = [], [], [], [], []
        fin = self.inputs.financial_list
        corp_fin = None
        for year, (src, table, corp_table, inherited) in sorted(years.items()):
            year_rows.append([year, src])
            if src in seen:
                continue
            seen.add(src)
            rank_rows += [[y, c, _num(s), r, cat] for y, c, s, r, cat in table.rows()]
            corp_rows += [[y, c, _num(s), r, cat] for y, c, s, r, cat in corp_table.rows()]
            inherit_rows += [[src, c, inherited[c]] for c in sorted(inherited)]
            for rank, e, rv, a in concentration_curve(table, fin):
                conc_rows.append([src, "company", rank, _num(e), _num(rv), _num(a)])
            if corp_fin is None:
                from .ranking import aggregate_corporations

                corp_fin = aggregate_corporations(fin, self.inputs.parents)
            for rank, e, rv, a in concentration_curve(corp_table, corp_fin):
                conc_rows.append([src, "corporation", rank, _num(e), _num(rv), _num(a)])
        head = ["year", "company_id", "pc1", "rank", "category"]
        _write_csv(self.out / "ranks.csv", head, rank_rows)
        _write_csv(self.out / "corp_ranks.csv", head, corp_rows)
        _write_csv(self.out / "corp_inherited.csv", ["year", "company_id", "corp_rank"], inherit_rows)
        _write_csv(self.out / "rank_years.csv", ["year", "source_year"], year_rows)
        _write_csv(self.out / "concentration.csv",
                   ["year", "level", "rank", "cum_employees", "cum_revenue", "cum_assets"], conc_rows)
        return ["ranks.csv", "corp_ranks.csv", "corp_inherited.csv", "rank_years.csv", "concentration.csv"]

    def _stage_network(self) -> list[str]:
        keep = None
        if float(self.cfg.company_inclusion) < 1:
            ranks = _read_ranks(self.out)
            keep = {}
            for year, yr in ranks.items():
                n_keep = math.ceil(float(self.cfg.company_inclusion) * len(yr.company))
                keep[year] = frozenset(c for c, r in yr.company.items() if r <= n_keep)
        results = _run_months(self.inputs.months, int(self.cfg.workers),
                              {"index": self.inputs.index, "cfg": self.cfg, "keep": keep})
        outputs = []
        summary_rows = []
        for res in results:
            d = Path("months") / res["month"]
            _write_csv(self.out / d / "coreness.csv", ["director_id", "category", "coreness_halfunits", "std_coreness"],
                       res["rows"])
            _write_csv(self.out / d / "rounds.csv", ["round", "removed", "remaining_fraction"], res["rounds"])
            _write_csv(self.out / d / "core_profile.csv", ["k_halfunits", "remaining"], res["profile"])
            _write_json(self.out / d / "summary.json", res["summary"])
            outputs += [str(d / f) for f in ("coreness.csv", "rounds.csv", "core_profile.csv", "summary.json")]
            s = res["summary"]
            summary_rows.append([s["month"], s["active"], s["lc_size"], s["round1_survivors"], s["broker_count"],
                                 s["degeneracy_halfunits"], s["core_size"], s["rounds"]])
        _write_csv(self.out / "core_summary.csv",
                   ["month", "active", "lc_size", "round1_survivors", "broker_count", "degeneracy_halfunits",
                    "core_size", "rounds"], summary_rows)
        return outputs + ["core_summary.csv"]

    def _month_networks(self) -> list[MonthNetwork]:
        nets = []
        for m in self.inputs.months:
            df = pd.read_csv(self.out / "months" / str(m) / "coreness.csv", dtype={"director_id": str})
            nets.append(MonthNetwork(m, dict(zip(df["director_id"], df["category"].astype(int))),
                                     dict(zip(df["director_id"], df["std_coreness"].astype(float)))))
        return nets

    def _stage_panel(self) -> list[str]:
        inp = self.inputs
        ranks = _read_ranks(self.out)
        profiles = {}
        for m in inp.months:
            yr = ranks[m.year]
            profiles[str(m)] = director_rank_profile(inp.index.snapshot(m), yr.company, yr.corp_inherited)
        flags = match_committee_members(inp.directors, inp.committees, self.cfg.period_pairs) \
            if inp.directors else {}
        quality = DataQuality()
        rows = assemble_panel(self._month_networks(), profiles, inp.directors, flags, inp.financials,
                              self.cfg.period_pairs, quality)
        frame = panel_frame(rows)
        frame.to_csv(self.out / "panel.csv", index=False, lineterminator="\n")
        _write_json(self.out / "panel_quality.json", quality.as_dict())
        return ["panel.csv", "panel_quality.json"]

    def _stage_fit(self) -> list[str]:
        panel = read_panel(self.out / "panel.csv")
        outputs = []
        for spec in self.cfg.model_specs():
            doc = {"model": spec.to_dict()}
            try:
                d = encode_design(panel, spec)
                fit = fit_logistic(d)
                doc.update(status="ok", **fit.to_dict())
                ame = average_marginal_effects(fit, d).frame()
                (self.out / "ame").mkdir(exist_ok=True)
                ame.to_csv(self.out / "ame" / f"{spec.name}.csv", index=False, lineterminator="\n")
                outputs.append(f"ame/{spec.name}.csv")
                if spec.profile:
                    prof = spec.profile
                    by = prof.get("by", ["company_rank_cat"])
                    pts = profile_effects(fit, d, prof.get("focal", "std_coreness"),
                                          prof.get("grid", (0.0, 0.25, 0.5, 0.75, 1.0)), by)
                    (self.out / "profiles").mkdir(exist_ok=True)
                    profile_frame(pts, by).to_csv(self.out / "profiles" / f"{spec.name}.csv", index=False,
                                                  lineterminator="\n")
                    outputs.append(f"profiles/{spec.name}.csv")
            except (DesignError, EstimationError) as exc:
                LOGGER.warning("model %s not estimated: %s", spec.name, exc)
                doc.update(status="failed", error=f"{type(exc).__name__}: {exc}")
            _write_json(self.out / "fits" / f"{spec.name}.json", doc)
            outputs.append(f"fits/{spec.name}.json")
        if not outputs:
            (self.out / "fits").mkdir(exist_ok=True)
        return outputs

    def _stage_report(self) -> list[str]:
        inp = self.inputs
        out = self.out
        summary = pd.read_csv(out / "core_summary.csv", dtype={"month": str})
        lc_size = dict(zip(summary["month"], summary["lc_size"]))

        fig1 = []
        for m in inp.months:
            rounds = pd.read_csv(out / "months" / str(m) / "rounds.csv")
            initial = int(lc_size[str(m)])
            before = initial
            for r in rounds.itertuples(index=False):
                removed = int(r.removed)
                fig1.append([str(m), int(r.round), removed, before - removed,
                             format_ratio(Fraction(before - removed, initial)),
                             format_ratio(Fraction(removed, initial)),
                             format_ratio(Fraction(removed, before))])
                before -= removed
        _write_csv(out / "fig1_rounds.csv", ["month", "round", "removed", "remaining", "remaining_fraction",
                                             "removed_of_initial", "removed_of_previous"], fig1)

        fig2 = []
        for m in inp.months:
            prof = pd.read_csv(out / "months" / str(m) / "core_profile.csv")
            for r in prof.itertuples(index=False):
                fig2.append([str(m), int(r.k_halfunits), format_ratio(Fraction(int(r.k_halfunits), 2), 1),
                             int(r.remaining)])
        _write_csv(out / "fig2_core.csv", ["month", "k_halfunits", "k", "remaining"], fig2)

        ranks = _read_ranks(out)
        fig3 = []
        for net in self._month_networks():
            core = {d for d, c in net.category.items() if c == EliteCategory.NETWORK_CORE}
            brokers = {d for d, c in net.category.items() if c >= EliteCategory.LOCAL_BROKER}
            snap = inp.index.snapshot(net.month)
            company = ranks[net.month.year].company
            for n in self.cfg.inner_circle_n:
                n = int(n)
                if n > len(company):
                    continue
                ic = extract_inner_circle(snap, company, n)
                linkers = {d for d, v in ic.linkers.items() if v}
                members = set(ic.graph.ids)
                fig3.append([str(net.month), n, len(members), len(linkers), len(core), len(brokers),
                             len(linkers & core), len(linkers & brokers), len(members & core)])
        _write_csv(out / "fig3_compare.csv",
                   ["month", "top_n", "inner_circle_directors", "inner_circle_linkers", "core_size", "brokers",
                    "linkers_in_core", "linkers_brokers", "directors_in_core"], fig3)

        conc = pd.read_csv(out / "concentration.csv")
        conc.to_csv(out / "fig4_concentration.csv", index=False, lineterminator="\n")

        panel = read_panel(out / "panel.csv")
        flags = [f for f in ("gov_committee", "ba_committee", "interest_leader")
                 if f == "interest_leader" or f in panel.columns]
        enrich = coreness_concentration_report(panel, flags)
        enrich.to_csv(out / "fig5_enrichment.csv", index=False, lineterminator="\n")

        frames = []
        for spec in self.cfg.model_specs():
            p = out / "profiles" / f"{spec.name}.csv"
            if p.exists():
                f = pd.read_csv(p, dtype=str, keep_default_na=False)
                f.insert(0, "model", spec.name)
                frames.append(f)
        fig6 = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=["model"])
        fig6.to_csv(out / "fig6_profiles.csv", index=False, lineterminator="\n")
        return ["fig1_rounds.csv", "fig2_core.csv", "fig3_compare.csv", "fig4_concentration.csv",
                "fig5_enrichment.csv", "fig6_profiles.csv"]


def run_pipeline(cfg: PipelineConfig, out: str | Path, until: str = "report",
                 echo: Callable[[str], None] | None = None) -> list[StageStatus]:
    return Pipeline(cfg, out, echo).run(until)


# --------------------------------------------------------------------------
# sensitivity sweeps


def sensitivity_sweep(cfg: PipelineConfig, key: str, values: Sequence[Any], out: str | Path,
                      echo: Callable[[str], None] | None = None) -> pd.DataFrame:
    """Re-run the pipeline once per value of ``key`` and tabulate network and model outcomes."""
    if key not in SWEEPABLE:
        raise ConfigError(f"{key!r} is not sweepable; choose from {SWEEPABLE}")
    values = list(values)
    if not values:
        raise ConfigError("empty sweep: give at least one value")
    out = Path(out)
    echo = echo or (lambda s: None)
    rows = []
    shared_input = None
    for v in values:
        doc = cfg.to_dict()
        doc[key] = v
        run_cfg = PipelineConfig.from_dict(doc)
        run_cfg.validate()
        label = str(v)
        run_dir = out / f"{key}={label}"
        if shared_input is not None:
            # reuse the first run's materialized inputs and the study period resolved with them
            for name in INPUT_KEYS + ("study_start", "study_end"):
                if name in INPUT_KEYS or getattr(run_cfg, name) is None:
                    setattr(run_cfg, name, getattr(shared_input, name))
        pipe = Pipeline(run_cfg, run_dir, lambda s, lab=label: echo(f"[{key}={lab}] {s}"))
        shared_input = pipe.cfg
        until = "fit" if run_cfg.models else "network"
        pipe.run(until)
        summary = pd.read_csv(run_dir / "core_summary.csv", dtype={"month": str})
        ame = _coreness_ame(run_dir, run_cfg)
        for r in summary.itertuples(index=False):
            rows.append([key, label, r.month, int(r.round1_survivors), int(r.broker_count),
                         int(r.degeneracy_halfunits), int(r.core_size), ame[0], ame[1]])
    frame = pd.DataFrame(rows, columns=["key", "value", "month", "round1_brokers", "broker_count",
                                        "degeneracy_halfunits", "core_size", "coreness_ame", "coreness_ame_se"])
    out.mkdir(parents=True, exist_ok=True)
    frame.to_csv(out / f"sweep_{key}.csv", index=False, lineterminator="\n")
    return frame


def _coreness_ame(run_dir: Path, cfg: PipelineConfig) -> tuple[str, str]:
    for spec in cfg.model_specs():
        p = run_dir / "ame" / f"{spec.name}.csv"
        if not p.exists():
            continue
        ame = pd.read_csv(p, dtype={"level": str}, keep_default_na=False)
        hit = ame[ame["variable"] == "std_coreness"]
        if len(hit):
            return _num(hit["ame"].iloc[0]), _num(hit["se"].iloc[0])
    return "", ""
