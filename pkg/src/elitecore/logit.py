"""Logistic regression by iteratively reweighted least squares, with sandwich covariances."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linprog
from scipy.special import expit

from .design import DesignMatrix

LOGGER = logging.getLogger(__name__)

RANK_TOL = 1e-12
DEV_TOL = 1e-10
GRAD_TOL = 1e-8
EXTREME_P = 1e-10
SEPARATION_ETA = 10.0  # |linear predictor| beyond which the LP separation check runs


class EstimationError(RuntimeError):
    pass


class SeparationError(EstimationError):
    """Fitted probabilities are collapsing onto 0 or 1 while coefficients diverge."""


class RankDeficientError(EstimationError):
    def __init__(self, message: str, dependent: list[str]):
        super().__init__(message)
        self.dependent = dependent


class SingularInformationError(EstimationError):
    pass


@dataclass
class FitResult:
    params: np.ndarray
    cov_model: np.ndarray
    cov_robust: np.ndarray
    loglik: float
    loglik_null: float
    iterations: int
    converged: bool
    gradient_norm: float
    names: list[str]
    nobs: int
    loglik_path: list[float] = field(default_factory=list, repr=False)
    cov_cluster: np.ndarray | None = None

    @property
    def se_model(self) -> np.ndarray:
        return np.sqrt(np.diag(self.cov_model))

    @property
    def se_robust(self) -> np.ndarray:
        return np.sqrt(np.diag(self.cov_robust))

    @property
    def se_cluster(self) -> np.ndarray | None:
        return None if self.cov_cluster is None else np.sqrt(np.diag(self.cov_cluster))

    def inference_cov(self) -> np.ndarray:
        """Clustered covariance when available, else HC0."""
        return self.cov_cluster if self.cov_cluster is not None else self.cov_robust

    def to_dict(self) -> dict:
        out = {
            "names": list(self.names),
            "params": [float(b) for b in self.params],
            "se_model": [float(s) for s in self.se_model],
            "se_robust": [float(s) for s in self.se_robust],
            "loglik": float(self.loglik),
            "loglik_null": float(self.loglik_null),
            "pseudo_r2": float(mcfadden_pseudo_r2(self)) if self.loglik_null != 0 else None,
            "iterations": self.iterations,
            "converged": self.converged,
            "gradient_norm": float(self.gradient_norm),
            "nobs": self.nobs,
        }
        if self.cov_cluster is not None:
            out["se_cluster"] = [float(s) for s in self.se_cluster]
        return out


def _loglik(y: np.ndarray, eta: np.ndarray) -> float:
    # y*eta - log(1 + e^eta), stable for large |eta|
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def check_rank(X: np.ndarray, names: list[str]) -> None:
    """Raise ``RankDeficientError`` naming the columns that are linear combinations of others."""
    if X.shape[0] < X.shape[1]:
        raise RankDeficientError(f"{X.shape[0]} rows for {X.shape[1]} columns", list(names))
    _, r, piv = sla.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0:
        raise RankDeficientError("design is all zeros", list(names))
    rank = int(np.sum(diag > RANK_TOL * diag[0]))
    if rank == X.shape[1]:
        return
    indep = np.sort(piv[:rank])
    dependent = []
    for j in piv[rank:]:
        coef, *_ = np.linalg.lstsq(X[:, indep], X[:, j], rcond=None)
        partners = [names[indep[k]] for k in np.flatnonzero(np.abs(coef) > 1e-8)]
        dependent.append(f"{names[j]} ~ {' + '.join(partners) if partners else '0'}")
    raise RankDeficientError("rank-deficient design: " + "; ".join(dependent), dependent)


def _information(X: np.ndarray, w: np.ndarray) -> np.ndarray:
    xw = X * w[:, None]
    h = X.T @ xw
    return (h + h.T) / 2


def _inverse(h: np.ndarray) -> np.ndarray:
    try:
        c, low = sla.cho_factor(h, lower=True)
    except np.linalg.LinAlgError:
        raise SingularInformationError("information matrix is singular") from None
    inv = sla.cho_solve((c, low), np.eye(h.shape[0]))
    return (inv + inv.T) / 2


def separation_direction(X: np.ndarray, y: np.ndarray, tol: float = 1e-7) -> np.ndarray | None:
    """Return a direction ``b`` with ``(2y-1) * Xb >= 0`` everywhere and > 0 somewhere, or None.

    Such a direction exists exactly when the data are completely or
    quasi-completely separated, so the likelihood keeps rising along it.
    Solved as a bounded linear programme.
    """
    s = np.where(y > 0.5, 1.0, -1.0)[:, None] * X
    scale = np.abs(s).max(axis=0)
    scale[scale == 0] = 1.0
    s = s / scale
    res = linprog(-s.sum(axis=0), A_ub=-s, b_ub=np.zeros(s.shape[0]), bounds=[(-1, 1)] * X.shape[1],
                  method="highs")
    if res.status != 0 or -res.fun <= tol * s.shape[0]:
        return None
    return res.x / scale


def _polish(X, y, pen, beta, ll, grad_norm, objective):
    """One extra full Newton step at the optimum, kept only if it does not hurt.

    Quadratic convergence takes the 1e-8 gradient tolerance down to rounding
    level, so saturated designs reproduce cell frequencies essentially exactly.
    """
    mu = expit(X @ beta)
    h = _information(X, mu * (1 - mu)) + np.diag(pen)
    try:
        cand = beta + sla.solve(h, X.T @ (y - mu) - pen * beta, assume_a="pos")
    except (sla.LinAlgError, ValueError):
        return beta, ll, grad_norm
    new_ll = objective(cand)
    mu = expit(X @ cand)
    new_grad = float(np.max(np.abs(X.T @ (y - mu) - pen * cand)))
    if new_ll >= ll - 1e-12 * abs(ll) and new_grad <= grad_norm:
        return cand, new_ll, new_grad
    return beta, ll, grad_norm


def fit_logistic(d: DesignMatrix, max_iter: int = 100, ridge: float = 0.0,
                 cluster: np.ndarray | None = None) -> FitResult:
    """Maximise the Bernoulli log-likelihood by IRLS with step-halving.

    Each Newton step solves the weighted least-squares problem through a QR
    factorisation of ``sqrt(W) X``. ``ridge`` > 0 adds a penalty
    ``ridge/2 * |beta[1:]|^2`` as an opt-in rescue for separated data.
    """
    X, y = d.X, d.y
    n, p = X.shape
    names = d.names
    if n <= p:
        raise EstimationError(f"need more rows than columns ({n} <= {p})")
    check_rank(X, names)
    ybar = float(y.mean())
    if ybar in (0.0, 1.0):
        raise SeparationError("response is constant")

    pen = np.full(p, ridge)
    if names and names[0] == "Intercept":
        pen[0] = 0.0
    beta = np.zeros(p)
    if names and names[0] == "Intercept":
        beta[0] = np.log(ybar / (1 - ybar))

    def objective(b):
        return _loglik(y, X @ b) - 0.5 * float(np.sum(pen * b * b))

    ll = objective(beta)
    path = [ll]
    converged = False
    grad_norm = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        eta = X @ beta
        mu = expit(eta)
        w = mu * (1 - mu)
        grad = X.T @ (y - mu) - pen * beta
        grad_norm = float(np.max(np.abs(grad)))
        if grad_norm < GRAD_TOL:
            converged = True
            it -= 1
            break
        sw = np.sqrt(w)
        if ridge > 0:
            a = np.vstack([X * sw[:, None], np.diag(np.sqrt(pen))])
            rhs = np.concatenate([(y - mu) / np.where(sw > 0, sw, 1.0), -np.sqrt(pen) * beta])
        else:
            a = X * sw[:, None]
            rhs = (y - mu) / np.where(sw > 0, sw, 1.0)
        q, r = sla.qr(a, mode="economic")
        step = sla.solve_triangular(r, q.T @ rhs)
        t = 1.0
        for _ in range(40):
            cand = beta + t * step
            new_ll = objective(cand)
            if new_ll >= ll - 1e-12 * abs(ll):
                break
            t /= 2
        else:
            cand, new_ll = beta, ll
        old_ll = ll
        beta, ll = cand, new_ll
        path.append(ll)

        # stalled: the objective no longer moves and the Newton step is negligible
        if abs(ll - old_ll) <= DEV_TOL * (abs(ll) + DEV_TOL) and np.abs(t * step).max() < 1e-10:
            eta = X @ beta
            mu = expit(eta)
            grad_norm = float(np.max(np.abs(X.T @ (y - mu) - pen * beta)))
            converged = True
            break
    else:
        converged = False
    if converged:
        beta, ll, grad_norm = _polish(X, y, pen, beta, ll, grad_norm, objective)
        path.append(ll)
    if ridge == 0 and (not converged or np.abs(X @ beta).max() > SEPARATION_ETA):
        direction = separation_direction(X, y)
        if direction is not None:
            cols = [nm for nm, v in zip(names, direction) if abs(v) > 1e-9]
            raise SeparationError("the maximum likelihood estimate does not exist; separating columns: "
                                  + ", ".join(cols))
    if not converged:
        LOGGER.warning("IRLS did not converge in %d iterations (gradient %.3g)", max_iter, grad_norm)

    mu = expit(X @ beta)
    w = mu * (1 - mu)
    h = _information(X, w) + np.diag(pen)
    cov = _inverse(h)
    n1 = float(y.sum())
    ll_null = n1 * np.log(ybar) + (n - n1) * np.log(1 - ybar)
    fit = FitResult(
        params=beta,
        cov_model=cov,
        cov_robust=np.zeros_like(cov),
        loglik=_loglik(y, X @ beta),
        loglik_null=float(ll_null),
        iterations=it,
        converged=converged,
        gradient_norm=grad_norm,
        names=list(names),
        nobs=n,
        loglik_path=path,
    )
    fit.cov_robust = robust_covariance(fit, d)
    groups = cluster if cluster is not None else d.groups
    if groups is not None:
        fit.cov_cluster = robust_covariance(fit, d, groups)
    return fit


def score_contributions(fit: FitResult, d: DesignMatrix) -> np.ndarray:
    mu = expit(d.X @ fit.params)
    return d.X * (d.y - mu)[:, None]


def robust_covariance(fit: FitResult, d: DesignMatrix, cluster_key: np.ndarray | None = None) -> np.ndarray:
    """Sandwich ``H^-1 (sum s s') H^-1``; scores are summed within clusters when a key is given."""
    X = d.X
    mu = expit(X @ fit.params)
    h = _information(X, mu * (1 - mu))
    hinv = _inverse(h)
    s = X * (d.y - mu)[:, None]
    if cluster_key is not None:
        key = np.asarray(cluster_key)
        if key.shape[0] != X.shape[0]:
            raise ValueError("cluster key length does not match the design")
        _, inv = np.unique(key, return_inverse=True)
        g = int(inv.max()) + 1 if inv.size else 0
        s = np.column_stack([np.bincount(inv, weights=s[:, j], minlength=g) for j in range(s.shape[1])])
    meat = s.T @ s
    cov = hinv @ meat @ hinv
    return (cov + cov.T) / 2


def mcfadden_pseudo_r2(fit: FitResult) -> float:
    if fit.loglik_null == 0:
        raise EstimationError("null log-likelihood is zero (degenerate response)")
    return 1.0 - fit.loglik / fit.loglik_null


def predict(fit: FitResult, X: np.ndarray) -> np.ndarray:
    return expit(X @ fit.params)
