"""Model specifications and design-matrix encoding for director-month panels."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np
import pandas as pd

LOGGER = logging.getLogger(__name__)

RANK_LEVELS = ("Top1_50", "Top51_500", "Top501_5000", "Beyond5000")
BOARD_BINS = tuple(str(i) for i in range(1, 10)) + ("10+",)


@dataclass(frozen=True)
class VariableInfo:
    kind: str  # "continuous" | "binary" | "categorical"
    levels: tuple = ()
    reference: Any = None


CATALOG: dict[str, VariableInfo] = {
    "std_coreness": VariableInfo("continuous"),
    "elite_category": VariableInfo("categorical", (1, 2, 3, 4), 1),
    "company_rank_cat": VariableInfo("categorical", RANK_LEVELS, "Beyond5000"),
    "corp_rank_cat": VariableInfo("categorical", RANK_LEVELS, "Beyond5000"),
    "board_bin": VariableInfo("categorical", BOARD_BINS, "1"),
    "company_age_cat": VariableInfo("categorical", ("1-11", "12-25", "26-50", "50+", "Missing"), "1-11"),
    "industry": VariableInfo("categorical", (), None),
    "migrant": VariableInfo("categorical", ("Native", "Immigrant", "Descendant", "Missing"), "Native"),
    "age_cat": VariableInfo("categorical", ("18-30", "31-44", "45-59", "60-74", "75+", "Missing"), "18-30"),
    "class_origin": VariableInfo("categorical", ("Employer", "Manager", "Professional", "Other", "Missing"), "Other"),
}

BINARY_VARIABLES = (
    "top50_linker", "top500_linker", "top50_corp_linker", "top500_corp_linker",
    "top50_executive", "top500_executive", "top50_chair", "top500_chair", "executive", "chair",
    "ba_committee", "ba_leader_cur", "ba_leader_prev", "union_leader_cur", "union_leader_prev",
    "politician_cur", "politician_prev", "subsidiary", "listed", "female", "college", "master",
    "top_income", "top_wealth",
)
for _name in BINARY_VARIABLES:
    CATALOG[_name] = VariableInfo("binary")

TERM_GROUPS = {
    "company_controls": ("subsidiary", "listed", "company_age_cat", "industry"),
    "director_controls": ("female", "migrant", "age_cat", "college", "master", "top_income",
                          "top_wealth", "class_origin"),
    "interest_groups": ("ba_committee", "ba_leader_cur", "ba_leader_prev", "union_leader_cur",
                        "union_leader_prev", "politician_cur", "politician_prev"),
}


class DesignError(ValueError):
    pass


@dataclass
class ModelSpec:
    name: str
    response: str = "gov_committee"
    terms: list[str] = field(default_factory=list)
    interactions: list[tuple[str, ...]] = field(default_factory=list)
    references: dict[str, Any] = field(default_factory=dict)
    kinds: dict[str, str] = field(default_factory=dict)
    board_fe: bool = False
    cluster: str | None = None
    profile: dict[str, Any] | None = None

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "ModelSpec":
        known = {"name", "response", "terms", "interactions", "references", "kinds", "board_fe", "cluster", "profile"}
        extra = set(doc) - known
        if extra:
            raise DesignError(f"unknown model spec keys: {sorted(extra)}")
        return cls(
            name=doc["name"],
            response=doc.get("response", "gov_committee"),
            terms=list(doc.get("terms", [])),
            interactions=[tuple(t) for t in doc.get("interactions", [])],
            references=dict(doc.get("references", {})),
            kinds=dict(doc.get("kinds", {})),
            board_fe=bool(doc.get("board_fe", False)),
            cluster=doc.get("cluster"),
            profile=doc.get("profile"),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "response": self.response,
            "terms": list(self.terms),
            "interactions": [list(t) for t in self.interactions],
            "references": dict(self.references),
            "kinds": dict(self.kinds),
            "board_fe": self.board_fe,
            "cluster": self.cluster,
            "profile": self.profile,
        }


def load_model_specs(path: str | Path) -> list[ModelSpec]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    items = doc["models"] if isinstance(doc, dict) and "models" in doc else doc
    if isinstance(items, dict):
        items = [items]
    return [ModelSpec.from_dict(d) for d in items]


@dataclass(frozen=True)
class Column:
    name: str
    factors: tuple[tuple[str, Any], ...]  # (variable, level); level None for continuous/binary
    reference: tuple[tuple[str, Any], ...] = ()

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.factors)

    @property
    def is_intercept(self) -> bool:
        return not self.factors


@dataclass
class Factor:
    """Raw per-row data behind a model variable."""

    name: str
    kind: str
    values: np.ndarray  # float values, or integer level codes for categoricals
    levels: tuple = ()
    reference: Any = None

    def code(self, level) -> int:
        try:
            return self.levels.index(level)
        except ValueError:
            raise DesignError(f"{self.name}: unknown level {level!r}") from None

    def column(self, level, override=None) -> np.ndarray:
        if self.kind == "categorical":
            if override is not None:
                return np.full(self.values.shape[0], 1.0 if override == level else 0.0)
            return (self.values == self.code(level)).astype(float)
        if override is not None:
            return np.broadcast_to(np.asarray(override, dtype=float), self.values.shape).copy()
        return self.values


@dataclass
class DesignMatrix:
    X: np.ndarray
    y: np.ndarray
    columns: list[Column]
    factors: dict[str, Factor]
    groups: np.ndarray | None = None
    spec: ModelSpec | None = None

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    @property
    def shape(self) -> tuple[int, int]:
        return self.X.shape

    def column_index(self, name: str) -> int:
        return self.names.index(name)

    def variables(self) -> list[str]:
        """Model variables in first-appearance order."""
        out: list[str] = []
        for c in self.columns:
            for v in c.variables:
                if v not in out:
                    out.append(v)
        return out

    def evaluate(self, overrides: Mapping[str, Any] | None = None) -> np.ndarray:
        """Rebuild the design with some variables counterfactually set for every row."""
        overrides = dict(overrides or {})
        for v in overrides:
            if v not in self.factors:
                raise DesignError(f"variable {v!r} is not in the model")
        n = self.X.shape[0]
        if not overrides:
            return self.X
        out = self.X.copy()
        for j, col in enumerate(self.columns):
            if not any(v in overrides for v in col.variables):
                continue
            val = np.ones(n)
            for var, level in col.factors:
                val = val * self.factors[var].column(level, overrides.get(var))
            out[:, j] = val
        return out

    def derivative(self, var: str) -> np.ndarray:
        """Partial derivative of each column with respect to a continuous variable."""
        fac = self.factors.get(var)
        if fac is None:
            raise DesignError(f"variable {var!r} is not in the model")
        if fac.kind == "categorical":
            raise DesignError(f"{var!r} is categorical")
        n = self.X.shape[0]
        out = np.zeros_like(self.X)
        for j, col in enumerate(self.columns):
            if var not in col.variables:
                continue
            if col.variables.count(var) > 1:
                raise DesignError(f"column {col.name} repeats {var!r}")
            val = np.ones(n)
            for v, level in col.factors:
                if v != var:
                    val = val * self.factors[v].column(level)
            out[:, j] = val
        return out


def _info(name: str, spec: ModelSpec, series: pd.Series) -> VariableInfo:
    info = CATALOG.get(name)
    kind = spec.kinds.get(name)
    if info is None or (kind and kind != info.kind):
        if kind is None:
            if series.dtype == object or isinstance(series.dtype, pd.CategoricalDtype):
                kind = "categorical"
            else:
                uniq = pd.unique(series.dropna())
                kind = "binary" if set(np.asarray(uniq, dtype=float).tolist()) <= {0.0, 1.0} else "continuous"
        info = VariableInfo(kind)
    ref = spec.references.get(name, info.reference)
    return VariableInfo(info.kind, info.levels, ref)


def _make_factor(name: str, info: VariableInfo, series: pd.Series) -> Factor:
    if info.kind != "categorical":
        vals = pd.to_numeric(series, errors="raise").to_numpy(dtype=float)
        if np.isnan(vals).any():
            raise DesignError(f"{name}: missing values")
        if info.kind == "binary" and not np.isin(vals, (0.0, 1.0)).all():
            raise DesignError(f"{name}: binary variable has values other than 0/1")
        return Factor(name, info.kind, vals)
    raw = series.to_numpy()
    observed = list(pd.unique(raw))
    declared = list(info.levels)
    # match declared levels by string form so "1" and 1 coincide
    as_str = {str(lv): lv for lv in declared}
    norm = np.array([as_str.get(str(v), v) for v in raw], dtype=object) if declared else raw
    observed = list(pd.unique(norm))
    extra = sorted((lv for lv in observed if lv not in declared), key=str)
    levels = tuple(declared + extra)
    ref = info.reference
    if ref is None:
        ref = next(lv for lv in levels if lv in observed) if observed else None
    elif str(ref) in {str(lv) for lv in levels}:
        ref = next(lv for lv in levels if str(lv) == str(ref))
    lookup = {lv: i for i, lv in enumerate(levels)}
    codes = np.fromiter((lookup[v] for v in norm), dtype=np.int64, count=len(norm))
    return Factor(name, "categorical", codes, levels, ref)


def _expand_terms(spec: ModelSpec) -> list[str]:
    out: list[str] = []
    for term in spec.terms:
        for t in TERM_GROUPS.get(term, (term,)):
            if t not in out:
                out.append(t)
    for inter in spec.interactions:
        for v in inter:
            if v not in out:
                out.append(v)
    if spec.board_fe and "board_bin" not in out:
        out.append("board_bin")
    return out


def _levels_for(fac: Factor) -> list:
    """Non-reference levels of a factor (``[None]`` for single-column variables)."""
    if fac.kind != "categorical":
        return [None]
    return [lv for lv in fac.levels if lv != fac.reference]


def _col_name(parts: Sequence[tuple[str, Any]]) -> str:
    return ":".join(v if lv is None else f"{v}[{lv}]" for v, lv in parts)


def encode_design(panel: pd.DataFrame, spec: ModelSpec, strict: bool = True) -> DesignMatrix:
    """Dummy-encode a model over a panel frame; intercept first, references omitted.

    ``strict=False`` keeps every column (including all-zero ones) and skips the
    estimability checks; it is meant for evaluating known coefficients, not
    for fitting.
    """
    variables = _expand_terms(spec)
    missing = [v for v in variables + [spec.response] if v not in panel.columns]
    if missing:
        raise DesignError(f"model {spec.name!r} references absent columns {missing}")
    y = pd.to_numeric(panel[spec.response]).to_numpy(dtype=float)
    if not np.isin(y, (0.0, 1.0)).all():
        raise DesignError(f"response {spec.response!r} must be 0/1")

    factors: dict[str, Factor] = {}
    for v in variables:
        info = _info(v, spec, panel[v])
        fac = _make_factor(v, info, panel[v])
        if fac.kind == "categorical" and strict:
            counts = np.bincount(fac.values, minlength=len(fac.levels))
            if fac.reference is None or counts[fac.code(fac.reference)] == 0:
                raise DesignError(f"{v}: reference level {fac.reference!r} has no observations")
        factors[v] = fac

    n = len(panel)
    cols: list[Column] = [Column("Intercept", ())]
    data: list[np.ndarray] = [np.ones(n)]

    def add(parts: list[tuple[str, Any]]):
        vec = np.ones(n)
        for var, level in parts:
            vec = vec * factors[var].column(level)
        name = _col_name(parts)
        if strict and not vec.any():
            LOGGER.warning("model %s: column %s has no non-zero entries; dropped", spec.name, name)
            return
        ref = tuple((var, factors[var].reference) for var, level in parts if level is not None)
        cols.append(Column(name, tuple(parts), ref))
        data.append(vec)

    main = [v for v in variables]
    for v in main:
        for level in _levels_for(factors[v]):
            add([(v, level)])
    for inter in spec.interactions:
        combos: list[list[tuple[str, Any]]] = [[]]
        for v in inter:
            combos = [c + [(v, lv)] for c in combos for lv in _levels_for(factors[v])]
        for parts in combos:
            add(parts)

    X = np.column_stack(data)
    seen: dict[bytes, str] = {}
    for j, c in enumerate(cols if strict else ()):
        key = X[:, j].tobytes()
        if key in seen:
            raise DesignError(f"columns {seen[key]!r} and {c.name!r} are identical")
        seen[key] = c.name

    groups = None
    if spec.cluster:
        if spec.cluster not in panel.columns:
            raise DesignError(f"cluster column {spec.cluster!r} not in panel")
        groups = panel[spec.cluster].to_numpy()
    return DesignMatrix(X, y, cols, factors, groups, spec)


def design_from_arrays(X: np.ndarray, y: np.ndarray, names: Sequence[str] | None = None,
                       kinds: Sequence[str] | None = None) -> DesignMatrix:
    """Wrap a plain numeric matrix; column 0 must be the intercept.

    Every other column becomes its own continuous (or binary) variable.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    p = X.shape[1]
    names = list(names) if names is not None else ["Intercept"] + [f"x{j}" for j in range(1, p)]
    kinds = list(kinds) if kinds is not None else [
        "binary" if np.isin(X[:, j], (0.0, 1.0)).all() else "continuous" for j in range(1, p)]
    if not np.all(X[:, 0] == 1.0):
        raise DesignError("first column must be the intercept")
    cols = [Column(names[0], ())]
    factors = {}
    for j in range(1, p):
        cols.append(Column(names[j], ((names[j], None),)))
        factors[names[j]] = Factor(names[j], kinds[j - 1], X[:, j].copy())
    return DesignMatrix(X, y, cols, factors)
