"""Linear-Gaussian simulation and analytic ground truth."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dsl import ModelFile, TargetEffect
from .errors import MarkovPruneError
from .graph import CausalGraph

COEF_RANGE = (0.3, 0.8)


@dataclass
class CoefficientAssignment:
    """Path weights, noise scales and shared-latent weights for ``a <-> b``."""

    coef: dict
    noise_sd: dict
    bidirected: dict = field(default_factory=dict)

    def weight(self, tail: str, head: str) -> float:
        return self.coef.get((tail, head), 0.0)


@dataclass
class Dataset:
    columns: tuple
    data: np.ndarray

    def __post_init__(self):
        self.columns = tuple(self.columns)
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 2 or self.data.shape[1] != len(self.columns):
            raise ValueError("data must be n x len(columns)")

    @property
    def n(self) -> int:
        return self.data.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    def select(self, names) -> np.ndarray:
        idx = [self.columns.index(v) for v in names]
        return self.data[:, idx]

    def to_csv(self, path=None) -> str:
        """CSV with a header row, ``.`` decimal point and LF newlines."""
        buf = io.StringIO()
        np.savetxt(buf, self.data, delimiter=",", fmt="%.17g",
                   header=",".join(self.columns), comments="", newline="\n")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8", newline="\n")
        return text

    @classmethod
    def from_csv(cls, source) -> "Dataset":
        """Read a dataset from a CSV path, or from CSV text (any multi-line string)."""
        if isinstance(source, Path) or (isinstance(source, str) and source and "\n" not in source):
            try:
                text = Path(source).read_text(encoding="utf-8")
            except (OSError, UnicodeDecodeError) as exc:
                raise MarkovPruneError(f"cannot read {source}: {exc}", code="E021") from None
        else:
            text = str(source)
        lines = [ln for ln in text.replace("\r\n", "\n").split("\n") if ln.strip()]
        if not lines:
            raise MarkovPruneError("empty CSV", code="E021")
        header = [h.strip() for h in lines[0].split(",")]
        try:
            rows = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
        except ValueError as exc:
            raise MarkovPruneError(f"bad CSV value: {exc}", code="E021") from None
        if rows.size == 0:
            rows = rows.reshape(0, len(header))
        if rows.shape[1] != len(header):
            raise MarkovPruneError("CSV rows do not match header", code="E021")
        return cls(header, rows)


def _draw(rng, size):
    mag = rng.uniform(*COEF_RANGE, size=size)
    sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
    return mag * sign


def fill_coefficients(model: ModelFile, seed: int) -> CoefficientAssignment:
    """Complete the model's coefficients.

    Coefficients and noise given in the model are kept as is. Missing path
    weights are drawn uniformly from ``[-0.8, -0.3] U [0.3, 0.8]``, missing
    noise sds default to 1. Draws are made for every edge in name order, so
    a given edge gets the same value whichever other edges are fixed.
    """
    g = model.graph
    rng = np.random.default_rng(seed)
    edges = sorted(g.directed_edges)
    draws = _draw(rng, len(edges))
    coef = {e: float(model.coefficients.get(e, d)) for e, d in zip(edges, draws)}
    pairs = sorted(g.bidirected_edges, key=sorted)
    given = {frozenset(k): v for k, v in model.bidirected_weights.items()}
    bdraws = _draw(rng, len(pairs))
    bi = {p: float(given.get(frozenset(p), d)) for p, d in zip(pairs, bdraws)}
    noise = {v: float(model.noise_sd.get(v, 1.0)) for v in g.nodes}
    return CoefficientAssignment(coef, noise, bi)


def _structure(graph: CausalGraph, a: CoefficientAssignment):
    """Coefficient matrix (row = head) and noise sds over nodes + one latent per ``<->``."""
    names = list(graph.nodes) + [f"<{x}<->{y}>" for x, y in graph.bidirected_edges]
    idx = {v: i for i, v in enumerate(names)}
    k = len(names)
    B = np.zeros((k, k))
    for (t, h) in graph.directed_edges:
        B[idx[h], idx[t]] = a.weight(t, h)
    for j, (x, y) in enumerate(graph.bidirected_edges, start=len(graph.nodes)):
        w = a.bidirected.get((x, y), a.bidirected.get((y, x), 0.0))
        B[idx[x], j] = w
        B[idx[y], j] = w
    sd = np.array([a.noise_sd.get(v, 1.0) for v in graph.nodes] + [1.0] * len(graph.bidirected_edges))
    return names, B, sd


def implied_covariance(graph: CausalGraph, assignment: CoefficientAssignment, nodes=None):
    """Population covariance ``(I-B)^-1 Psi (I-B)^-T`` restricted to ``nodes``
    (default: the observed nodes)."""
    names, B, sd = _structure(graph, assignment)
    inv = np.linalg.inv(np.eye(len(names)) - B)
    full = inv @ np.diag(sd**2) @ inv.T
    keep = list(graph.observed if nodes is None else nodes)
    idx = [names.index(v) for v in keep]
    return full[np.ix_(idx, idx)]


def simulate(graph: CausalGraph, assignment: CoefficientAssignment, n: int, seed) -> Dataset:
    """Draw ``n`` samples; latent columns are generated but not returned.

    ``seed`` is anything :func:`numpy.random.default_rng` accepts.
    """
    if n < 1:
        raise MarkovPruneError("n must be >= 1", code="E030")
    names, B, sd = _structure(graph, assignment)
    rng = np.random.default_rng(seed)
    eps = rng.standard_normal((n, len(names))) * sd
    x = eps.copy()
    for v in graph.topological_order():
        i = names.index(v)
        row = B[i]
        nz = np.flatnonzero(row)
        if nz.size:
            x[:, i] += x[:, nz] @ row[nz]
    obs = list(graph.observed)
    return Dataset(obs, x[:, [names.index(v) for v in obs]])


def path_effect(graph: CausalGraph, coef, source: str, target: str, avoid=()) -> float:
    """Sum over directed paths ``source -> ... -> target`` of weight products,
    skipping paths whose interior visits a node in ``avoid``."""
    graph._require([source, target])
    avoid = set(avoid) - {source, target}
    weight = coef.weight if isinstance(coef, CoefficientAssignment) else (lambda t, h: coef.get((t, h), 0.0))
    reach = {source: 1.0}
    for v in graph.topological_order():
        if v == source or v in avoid:
            continue
        live = [p for p in graph.parents(v) if p in reach]
        if live:
            reach[v] = sum(reach[p] * weight(p, v) for p in live)
    return float(reach.get(target, 0.0))


def stage_effects(graph: CausalGraph, coef, target: TargetEffect) -> tuple[list[float], float]:
    """Per-stage effects along a mediation chain and the direct effect.

    Stage ``i`` is the effect of ``chain[i]`` on ``chain[i+1]`` through paths
    avoiding the other chain nodes; the direct effect (``partial`` targets
    only) is the effect of the cause on the outcome avoiding the mediators.
    """
    chain = target.chain
    stages = [
        path_effect(graph, coef, chain[i], chain[i + 1], avoid=set(chain) - {chain[i], chain[i + 1]})
        for i in range(len(chain) - 1)
    ]
    direct = 0.0
    if target.partial:
        direct = path_effect(graph, coef, target.cause, target.outcome, avoid=target.mediators)
    return stages, direct


def true_effect(graph: CausalGraph, assignment: CoefficientAssignment, target: TargetEffect) -> float:
    """Ground-truth value of ``target`` under linear path tracing.

    >>> from markovprune.graph import CausalGraph
    >>> g = CausalGraph("XMY", [("X", "M"), ("M", "Y")])
    >>> a = CoefficientAssignment({("X", "M"): 0.6, ("M", "Y"): 0.7}, {})
    >>> round(true_effect(g, a, TargetEffect("total", "X", "Y")), 10)
    0.42
    """
    graph._require(target.chain)
    if target.kind == "total":
        return path_effect(graph, assignment, target.cause, target.outcome)
    stages, direct = stage_effects(graph, assignment, target)
    return float(np.prod(stages)) + direct
