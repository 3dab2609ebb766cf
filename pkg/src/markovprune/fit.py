"""Recursive linear path models: estimation, fit statistics and target metrics.

Each endogenous equation is fitted by least squares on its parents, which
is the maximum-likelihood estimate for recursive models with uncorrelated
residuals. Exogenous variances and covariances are free and taken from the
sample moments. Covariances use the ML denominator ``n`` and the test
statistic is ``(n - 1) * F_ML``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import stats

from .dsl import TargetEffect
from .errors import FitError
from .graph import CausalGraph
from .sim import Dataset


@dataclass(frozen=True)
class PathModel:
    """A latent-free DAG whose every edge is a free path coefficient."""

    graph: CausalGraph

    def __post_init__(self):
        g = self.graph
        if g.latent or g.bidirected_edges:
            raise FitError(
                "path models cannot contain latent nodes or correlated errors", code="E022"
            )
        g.check()

    @property
    def order(self) -> list[str]:
        return self.graph.topological_order()

    @property
    def exogenous(self) -> list[str]:
        return [v for v in self.order if not self.graph.parents(v)]

    @property
    def endogenous(self) -> list[str]:
        return [v for v in self.order if self.graph.parents(v)]

    @property
    def n_free(self) -> int:
        k = len(self.exogenous)
        return len(set(self.graph.directed_edges)) + len(self.endogenous) + k * (k + 1) // 2

    @property
    def df(self) -> int:
        p = len(self.graph.nodes)
        return p * (p + 1) // 2 - self.n_free


@dataclass
class FitResult:
    estimates: dict
    std_errors: dict
    p_values: dict
    chi2: float
    df: int
    cfi: float
    rmsea: float
    n: int
    implied_cov: np.ndarray
    columns: tuple
    sample_cov: np.ndarray = field(repr=False, default=None)
    residual_var: dict = field(default_factory=dict)
    coef_cov: dict = field(default_factory=dict, repr=False)
    graph: CausalGraph = field(default=None, repr=False)

    def to_dict(self) -> dict:
        def key(e):
            return f"{e[0]}->{e[1]}"

        return {
            "estimates": {key(e): v for e, v in self.estimates.items()},
            "se": {key(e): v for e, v in self.std_errors.items()},
            "p": {key(e): v for e, v in self.p_values.items()},
            "chi2": self.chi2,
            "df": self.df,
            "cfi": self.cfi,
            "rmsea": self.rmsea,
            "n": self.n,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        lines = [f"n = {self.n}", f"chi2 = {self.chi2:.6g}", f"df = {self.df}",
                 f"cfi = {self.cfi:.6g}", f"rmsea = {self.rmsea:.6g}"]
        for e, b in self.estimates.items():
            lines.append(
                f"{e[0]} -> {e[1]} = {b:.6g} (se {self.std_errors[e]:.4g}, p {self.p_values[e]:.4g})"
            )
        return "\n".join(lines) + "\n"


def _logdet(m, what):
    sign, val = np.linalg.slogdet(m)
    if sign <= 0:
        raise FitError(f"{what} is not positive definite", code="E023")
    return val


def fit(model: PathModel | CausalGraph, data: Dataset) -> FitResult:
    """Estimate ``model`` on ``data`` and compute chi2, df, CFI and RMSEA.

    Standard errors are the classical OLS ones of each equation (intercept
    included); p-values use the two-sided normal approximation.
    """
    if isinstance(model, CausalGraph):
        model = PathModel(model)
    g = model.graph
    order = model.order
    missing = [v for v in order if v not in data.columns]
    if missing:
        raise FitError(f"data lacks column(s) {missing}", code="E021")
    X = data.select(order)
    n, p = X.shape
    if n < 2:
        raise FitError("need at least two observations", code="E024")
    Xc = X - X.mean(axis=0)
    S = Xc.T @ Xc / n
    try:
        np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        raise FitError("sample covariance is not positive definite", code="E023") from None

    pos = {v: i for i, v in enumerate(order)}
    B = np.zeros((p, p))
    omega = np.zeros((p, p))
    estimates, ses, pvals, resvar, coef_cov = {}, {}, {}, {}, {}
    for v in model.endogenous:
        pa = list(g.parents(v))
        k = len(pa)
        if n <= k + 1:
            raise FitError(f"n = {n} too small for the equation of {v} ({k} predictors)", code="E024")
        Z = Xc[:, [pos[u] for u in pa]]
        y = Xc[:, pos[v]]
        ztz = Z.T @ Z
        if np.linalg.matrix_rank(ztz) < k:
            raise FitError(f"singular predictor covariance in the equation of {v}", code="E025")
        beta = np.linalg.solve(ztz, Z.T @ y)
        resid = y - Z @ beta
        rss = float(resid @ resid)
        cov = rss / (n - k - 1) * np.linalg.inv(ztz)
        se = np.sqrt(np.diag(cov))
        coef_cov[v] = (tuple(pa), cov)
        resvar[v] = rss / n
        omega[pos[v], pos[v]] = rss / n
        for j, u in enumerate(pa):
            B[pos[v], pos[u]] = beta[j]
            estimates[(u, v)] = float(beta[j])
            ses[(u, v)] = float(se[j])
            pvals[(u, v)] = float(2 * stats.norm.sf(abs(beta[j] / se[j]))) if se[j] > 0 else 0.0
    exo = [pos[v] for v in model.exogenous]
    omega[np.ix_(exo, exo)] = S[np.ix_(exo, exo)]

    inv = np.linalg.inv(np.eye(p) - B)
    sigma = inv @ omega @ inv.T
    ld_sigma = _logdet(sigma, "implied covariance")
    ld_s = _logdet(S, "sample covariance")
    F = ld_sigma + np.trace(S @ np.linalg.inv(sigma)) - ld_s - p
    chi2 = max((n - 1) * F, 0.0)
    df = model.df
    chi2_b = max((n - 1) * (np.sum(np.log(np.diag(S))) - ld_s), 0.0)
    df_b = p * (p - 1) // 2
    return FitResult(
        estimates=estimates,
        std_errors=ses,
        p_values=pvals,
        chi2=float(chi2),
        df=int(df),
        cfi=cfi(chi2, df, chi2_b, df_b),
        rmsea=rmsea(chi2, df, n),
        n=int(n),
        implied_cov=sigma,
        columns=tuple(order),
        sample_cov=S,
        residual_var=resvar,
        coef_cov=coef_cov,
        graph=g,
    )


def rmsea(chi2: float, df: int, n: int) -> float:
    if df <= 0:
        return 0.0
    return float(np.sqrt(max(0.0, (chi2 - df) / (df * (n - 1)))))


def cfi(chi2: float, df: int, chi2_b: float, df_b: int) -> float:
    num = max(chi2 - df, 0.0)
    den = max(chi2_b - df_b, chi2 - df, 0.0)
    if den == 0:
        return 1.0
    return float(1.0 - num / den)


class TargetMetrics(NamedTuple):
    estimate: float
    abs_error: float
    p_value: float
    se: float


def _coef_var(fit_result: FitResult, grad: dict) -> float:
    """Delta-method variance; coefficients of different equations are independent."""
    var = 0.0
    by_head: dict[str, dict[str, float]] = {}
    for (u, v), gval in grad.items():
        by_head.setdefault(v, {})[u] = gval
    for v, parts in by_head.items():
        pa, cov = fit_result.coef_cov[v]
        gv = np.array([parts.get(u, 0.0) for u in pa])
        var += float(gv @ cov @ gv)
    return var


def effect_estimate(fit_result: FitResult, target: TargetEffect) -> tuple[float, float]:
    """Point estimate and delta-method standard error of ``target``.

    Total effects sum coefficient products over every directed path of the
    fitted model; mediation targets multiply the chain coefficients and add
    the direct coefficient when ``partial``.
    """
    g = fit_result.graph
    est = fit_result.estimates
    for v in target.chain:
        if v not in g:
            raise FitError(f"target node {v!r} is not in the fitted model", code="E026")
    if target.kind == "total":
        paths = g.directed_paths(target.cause, target.outcome)
        if not paths:
            raise FitError(f"no path {target.cause} -> {target.outcome} in the fitted model", code="E026")
        edge_paths = [list(zip(path, path[1:])) for path in paths]
    else:
        chain = list(zip(target.chain, target.chain[1:]))
        edge_paths = [chain]
        if target.partial:
            edge_paths.append([(target.cause, target.outcome)])
        for ep in edge_paths:
            for e in ep:
                if e not in est:
                    raise FitError(f"edge {e[0]} -> {e[1]} missing from the fitted model", code="E026")
    value = 0.0
    grad: dict = {}
    for ep in edge_paths:
        coefs = [est[e] for e in ep]
        value += float(np.prod(coefs))
        for i, e in enumerate(ep):
            grad[e] = grad.get(e, 0.0) + float(np.prod(coefs[:i] + coefs[i + 1:]))
    return value, float(np.sqrt(_coef_var(fit_result, grad)))


def target_metrics(fit_result: FitResult, target: TargetEffect, truth: float) -> TargetMetrics:
    """Estimate, absolute error against ``truth`` and two-sided p-value of ``target``."""
    value, se = effect_estimate(fit_result, target)
    p = float(2 * stats.norm.sf(abs(value) / se)) if se > 0 else 0.0
    return TargetMetrics(value, abs(value - truth), p, se)
