"""Average marginal effects and counterfactual probability profiles with delta-method errors."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

import numpy as np
import pandas as pd
from scipy.special import expit

from .design import DesignError, DesignMatrix
from .logit import FitResult

Z95 = 1.959963984540054


@dataclass(frozen=True)
class AmeRow:
    variable: str
    level: Any
    reference: Any
    estimate: float
    se: float

    @property
    def ci_low(self) -> float:
        return self.estimate - Z95 * self.se

    @property
    def ci_high(self) -> float:
        return self.estimate + Z95 * self.se


class AmeTable(list):
    """List of ``AmeRow``; ``frame()`` gives the tabular form."""

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(r.variable, "" if r.level is None else str(r.level), "" if r.reference is None else str(r.reference),
              r.estimate, r.se, r.ci_low, r.ci_high) for r in self],
            columns=["variable", "level", "reference", "ame", "se", "ci_low", "ci_high"],
        )

    def get(self, variable: str, level=None) -> AmeRow:
        for r in self:
            if r.variable == variable and (level is None or str(r.level) == str(level)):
                return r
        raise KeyError((variable, level))


def _mean_prob_and_grad(fit: FitResult, X: np.ndarray) -> tuple[float, np.ndarray]:
    p = expit(X @ fit.params)
    w = p * (1 - p)
    return float(p.mean()), (X * w[:, None]).mean(axis=0)


def _se(grad: np.ndarray, cov: np.ndarray) -> float:
    return float(np.sqrt(max(grad @ cov @ grad, 0.0)))


def discrete_change(fit: FitResult, d: DesignMatrix, var: str, level, reference,
                    cov: np.ndarray | None = None) -> AmeRow:
    """Mean over rows of p(var=level) - p(var=reference), other covariates as observed."""
    cov = fit.inference_cov() if cov is None else cov
    p1, g1 = _mean_prob_and_grad(fit, d.evaluate({var: level}))
    p0, g0 = _mean_prob_and_grad(fit, d.evaluate({var: reference}))
    return AmeRow(var, level, reference, p1 - p0, _se(g1 - g0, cov))


def continuous_effect(fit: FitResult, d: DesignMatrix, var: str, cov: np.ndarray | None = None) -> AmeRow:
    """Mean over rows of dp/dvar, interaction columns included."""
    cov = fit.inference_cov() if cov is None else cov
    X = d.X
    dX = d.derivative(var)
    p = expit(X @ fit.params)
    w = p * (1 - p)
    slope = dX @ fit.params
    est = float(np.mean(w * slope))
    grad = ((w * (1 - 2 * p) * slope)[:, None] * X + w[:, None] * dX).mean(axis=0)
    return AmeRow(var, None, None, est, _se(grad, cov))


def average_marginal_effects(fit: FitResult, d: DesignMatrix, cov: np.ndarray | None = None,
                             variables: Sequence[str] | None = None) -> AmeTable:
    """AMEs for every model variable: derivatives for continuous ones, discrete changes otherwise.

    Binary variables compare 1 with 0; categorical levels compare each
    non-reference level with the reference.
    """
    cov = fit.inference_cov() if cov is None else cov
    out = AmeTable()
    for var in variables or d.variables():
        fac = d.factors[var]
        if fac.kind == "continuous":
            out.append(continuous_effect(fit, d, var, cov))
        elif fac.kind == "binary":
            out.append(discrete_change(fit, d, var, 1.0, 0.0, cov))
        else:
            present = set(d.names)
            for level in fac.levels:
                # levels never observed have no column and no estimable effect
                if level == fac.reference or f"{var}[{level}]" not in present:
                    continue
                out.append(discrete_change(fit, d, var, level, fac.reference, cov))
    return out


@dataclass(frozen=True)
class ProfilePoint:
    by: tuple
    value: float
    mean_prob: float
    mean_prob_se: float
    change: float
    change_se: float

    @property
    def change_ci(self) -> tuple[float, float]:
        return self.change - Z95 * self.change_se, self.change + Z95 * self.change_se


def profile_effects(fit: FitResult, d: DesignMatrix, focal: str = "std_coreness",
                    grid: Sequence[float] = (0.0, 0.25, 0.5, 0.75, 1.0),
                    by: Sequence[str] | str | None = ("company_rank_cat",),
                    levels: Mapping[str, Sequence] | None = None,
                    baseline: float = 0.0, cov: np.ndarray | None = None) -> list[ProfilePoint]:
    """Average predicted probability with ``focal`` and ``by`` set counterfactually for all rows.

    For every combination of ``by`` levels, each grid point reports the mean
    probability and its change from the ``baseline`` focal value.
    """
    cov = fit.inference_cov() if cov is None else cov
    if isinstance(by, str):
        by = (by,)
    by = tuple(by or ())
    for v in (focal,) + by:
        if v not in d.factors:
            raise DesignError(f"profile variable {v!r} is not in the model")
    level_lists = []
    for v in by:
        fac = d.factors[v]
        if levels and v in levels:
            level_lists.append(list(levels[v]))
        elif fac.kind == "categorical":
            level_lists.append(list(fac.levels))
        else:
            level_lists.append([0.0, 1.0])
    out = []
    for combo in itertools.product(*level_lists) if by else [()]:
        fixed = dict(zip(by, combo))
        p0, g0 = _mean_prob_and_grad(fit, d.evaluate({**fixed, focal: baseline}))
        for value in grid:
            p, g = _mean_prob_and_grad(fit, d.evaluate({**fixed, focal: value}))
            out.append(ProfilePoint(tuple(combo), float(value), p, _se(g, cov), p - p0, _se(g - g0, cov)))
    return out


def profile_frame(points: Sequence[ProfilePoint], by: Sequence[str] | str | None = ("company_rank_cat",)) -> pd.DataFrame:
    if isinstance(by, str):
        by = (by,)
    by = tuple(by or ())
    rows = []
    for pt in points:
        lo, hi = pt.change_ci
        rows.append(tuple(str(v) for v in pt.by) + (pt.value, pt.mean_prob, pt.mean_prob_se, pt.change, pt.change_se, lo, hi))
    return pd.DataFrame(rows, columns=list(by) + ["value", "mean_prob", "mean_prob_se", "change", "change_se",
                                                  "change_ci_low", "change_ci_high"])
