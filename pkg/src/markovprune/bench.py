"""Sample-size sweeps comparing the full model with its reduction."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dsl import ModelFile
from .errors import FitError, SweepError
from .fit import fit, target_metrics
from .graph import CausalGraph
from .reducer import project, reduce
from .sim import fill_coefficients, simulate, true_effect

METRICS = ("cfi", "chi2", "mae", "pvalue", "rmsea")  # CSV row order
VARIANTS = ("full", "reduced")


@dataclass
class SweepSpec:
    model: ModelFile
    n_grid: list
    reps: int = 100
    seed: int = 0
    variants: str = "both"

    def check(self) -> None:
        grid = list(self.n_grid)
        if not grid:
            raise SweepError("n_grid is empty")
        if any(int(n) != n or n < 10 for n in grid):
            raise SweepError("every sample size must be an integer >= 10")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise SweepError("n_grid must be strictly increasing")
        if self.reps < 1:
            raise SweepError("reps must be >= 1")
        if self.variants not in ("full", "reduced", "both"):
            raise SweepError(f"unknown variant selection {self.variants!r}")

    @property
    def variant_list(self) -> tuple:
        return VARIANTS if self.variants == "both" else (self.variants,)


@dataclass
class SweepRow:
    n: int
    variant: str
    metric: str
    mean: float
    sd: float
    reps: int
    failed: int = 0
    misspecified: bool = False


def full_graph(graph: CausalGraph) -> tuple[CausalGraph, list]:
    """The DGP projected onto its observed nodes, minus bidirected edges.

    Returns the graph and the dropped bidirected edges (non-empty means the
    full variant is misspecified).
    """
    proj = project(graph, graph.observed)
    dropped = list(proj.bidirected_edges)
    return proj.with_edges(bidirected=()), dropped


def replication_seed(seed: int, n: int, rep: int):
    """Seed for one replication. Independent of scheduling order."""
    return (int(seed), int(n), int(rep))


class _Plan:
    def __init__(self, spec: SweepSpec):
        spec.check()
        model = spec.model
        if not model.targets:
            raise SweepError("model declares no targets", code="E011")
        self.spec = spec
        self.target = model.targets[0]
        self.reduced = reduce(model)
        self.full, self.dropped_bidirected = full_graph(model.graph)
        self.assignment = fill_coefficients(model, spec.seed)
        self.truth = true_effect(model.graph, self.assignment, self.target)
        self.graphs = {"full": self.full, "reduced": self.reduced.graph}


def _one(plan: _Plan, n: int, rep: int) -> dict:
    spec = plan.spec
    data = simulate(spec.model.graph, plan.assignment, n, replication_seed(spec.seed, n, rep))
    out = {}
    for variant in spec.variant_list:
        try:
            res = fit(plan.graphs[variant], data)
            m = target_metrics(res, plan.target, plan.truth)
        except FitError as exc:
            out[variant] = {"ok": False, "error": str(exc)}
            continue
        out[variant] = {
            "ok": True,
            "chi2": res.chi2,
            "cfi": res.cfi,
            "rmsea": res.rmsea,
            "estimate": m.estimate,
            "mae": m.abs_error,
            "pvalue": m.p_value,
        }
    return out


def _run_n(plan: _Plan, n: int) -> list:
    return [_one(plan, n, rep) for rep in range(plan.spec.reps)]


def run_replications(spec: SweepSpec, workers: int = 1) -> dict:
    """Raw per-replication results keyed by sample size.

    Returns ``{n: [ {variant: {metric: value, "ok": bool}} per rep ]}`` plus
    ``truth`` and ``misspecified`` entries under the keys of the same name.
    """
    plan = _Plan(spec)
    grid = [int(n) for n in spec.n_grid]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_run_n, [plan] * len(grid), grid))
    else:
        results = [_run_n(plan, n) for n in grid]
    out = dict(zip(grid, results))
    out["truth"] = plan.truth
    out["misspecified"] = plan.dropped_bidirected
    return out


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[SweepRow]:
    """Mean and sd of chi2, CFI, MAE, p-value and RMSEA per (n, variant)."""
    raw = run_replications(spec, workers)
    misspec = bool(raw["misspecified"])
    rows = []
    for n in [int(n) for n in spec.n_grid]:
        for variant in spec.variant_list:
            recs = [r[variant] for r in raw[n]]
            good = [r for r in recs if r["ok"]]
            failed = len(recs) - len(good)
            for metric in METRICS:
                vals = np.array([r[metric] for r in good], dtype=float)
                if vals.size == 0:
                    mean = sd = math.nan
                else:
                    mean = float(vals.mean())
                    sd = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
                rows.append(SweepRow(n, variant, metric, mean, sd, len(good), failed,
                                     misspec and variant == "full"))
    return rows


def rows_to_csv(rows: list[SweepRow], path=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "variant", "metric", "mean", "sd", "reps"])
    for r in rows:
        w.writerow([r.n, r.variant, r.metric, repr(r.mean), repr(r.sd), r.reps])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    return text


def parse_grid(text: str) -> list[int]:
    """``start:stop:step`` (stop included when aligned) or a comma list."""
    text = text.strip()
    try:
        if ":" in text:
            parts = [int(x) for x in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            start, stop, step = parts
            if step <= 0:
                raise ValueError
            return list(range(start, stop + 1, step))
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise SweepError(f"bad n-grid {text!r}; use start:stop:step or a comma list") from None
