"""Acceptance suite: one test per criterion, each recorded for the summary.

Run with ``pytest tests/test_acceptance.py -v``; the terminal summary prints
a ``[PASS]``/``[FAIL]`` line per criterion.
"""

import random
import string
import time
from itertools import combinations

import numpy as np
from scipy import stats

from markovprune import fixtures
from markovprune.bench import SweepSpec, run_sweep
from markovprune.ci import d_separated, implied_independencies
from markovprune.dsl import ModelFile, mediation, parse, serialize, total
from markovprune.errors import ParseError
from markovprune.fit import fit, target_metrics
from markovprune.graph import CausalGraph
from markovprune.reducer import project, reduce
from markovprune.sim import fill_coefficients, simulate, true_effect

from conftest import all_paths, brute_separated, partial_corr, random_admg

CORPUS_SEED = 20240501
CORPUS_SIZE = 500


def corpus():
    rng = random.Random(CORPUS_SEED)
    return [random_admg(rng, max_nodes=8, p_edge=0.3, max_latent=2) for _ in range(CORPUS_SIZE)]


# 1 ----------------------------------------------------------------------
GOLDEN = {
    "ex1": ({("X", "Y"), ("C", "Y")}, ["Y ~ X + C"]),
    "ex2": ({("X", "Y"), ("K", "Y")}, ["Y ~ X + K"]),
    "ex2_mediation": ({("X", "M"), ("M", "Y"), ("K", "Y")}, ["M ~ X", "Y ~ M + K"]),
    "ex3": ({("C", "M"), ("S", "M")}, ["M ~ C + S"]),
    "ex3_mediation": ({("C", "H"), ("C", "M"), ("H", "M"), ("S", "M")}, ["H ~ C", "M ~ C + H + S"]),
    "ex4": ({("S", "R"), ("C", "R")}, ["R ~ S + C"]),
}


def test_criterion_1_golden_reductions(criterion):
    t0 = time.perf_counter()
    bad = []
    for name, (edges, plan) in GOLDEN.items():
        red = reduce(fixtures.load(name))
        if set(red.graph.directed_edges) != edges or red.plan_lines() != plan:
            bad.append(f"{name}: {red.plan_lines()}")
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 1.0
    criterion("1 golden reductions", ok, f"{len(GOLDEN) - len(bad)}/{len(GOLDEN)} exact, {elapsed:.3f}s"
              + (f"; mismatches {bad}" if bad else ""))
    assert ok


# 2 ----------------------------------------------------------------------
def test_criterion_2_separation_oracle(criterion):
    t0 = time.perf_counter()
    queries = mismatches = 0
    for g in corpus():
        obs = list(g.observed)
        for x in g.nodes:
            for y in g.nodes:
                if x == y:
                    continue
                paths = all_paths(g, x, y)
                rest = [v for v in obs if v not in (x, y)]
                for k in range(4):
                    for z in combinations(rest, k):
                        queries += 1
                        if d_separated(g, x, y, z) != brute_separated(g, x, y, z, paths):
                            mismatches += 1
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 120
    criterion("2 d-separation oracle", ok,
              f"{queries - mismatches}/{queries} agree on {CORPUS_SIZE} graphs, {elapsed:.1f}s")
    assert ok


# 3 ----------------------------------------------------------------------
def test_criterion_3_projection_soundness(criterion):
    t0 = time.perf_counter()
    rng = random.Random(CORPUS_SEED + 1)
    queries = mismatches = 0
    for g in corpus():
        obs = list(g.observed)
        keeps = [obs]
        if len(obs) > 2:
            keeps.append(sorted(rng.sample(obs, rng.randint(2, len(obs) - 1))))
        for keep in keeps:
            p = project(g, keep)
            for x, y in combinations(keep, 2):
                rest = [v for v in keep if v not in (x, y)]
                for k in range(len(rest) + 1):
                    for z in combinations(rest, k):
                        queries += 1
                        if d_separated(p, x, y, z) != d_separated(g, x, y, z):
                            mismatches += 1
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 120
    criterion("3 projection soundness", ok,
              f"{queries - mismatches}/{queries} statements preserved, {elapsed:.1f}s")
    assert ok


# 4 ----------------------------------------------------------------------
def test_criterion_4_reduction_unbiased(criterion):
    t0 = time.perf_counter()
    reps, n = 200, 20_000
    worst = 0.0
    details = []
    for name in fixtures.NAMES:
        model = fixtures.load(name)
        a = fill_coefficients(model, 2024)
        t = model.targets[0]
        truth = true_effect(model.graph, a, t)
        g = reduce(model).graph
        est = [target_metrics(fit(g, simulate(model.graph, a, n, (2024, n, r))), t, truth).estimate
               for r in range(reps)]
        bias = abs(float(np.mean(est)) - truth)
        worst = max(worst, bias)
        details.append(f"{name} {bias:.4f}")
    elapsed = time.perf_counter() - t0
    ok = worst < 0.01 and elapsed < 180
    criterion("4 reduction unbiasedness", ok,
              f"max |bias| {worst:.4f} (< 0.01) over {len(details)} fixtures, {elapsed:.1f}s")
    assert ok, details


# 5 ----------------------------------------------------------------------
def test_criterion_5_ex2_sweep(criterion):
    t0 = time.perf_counter()
    grid = [50, 100, 200]
    rows = run_sweep(SweepSpec(fixtures.load("ex2"), grid, reps=100, seed=0))
    mean = {(r.n, r.variant, r.metric): r.mean for r in rows}
    checks = {
        "a chi2": all(mean[n, "reduced", "chi2"] <= mean[n, "full", "chi2"] for n in grid),
        "b rmsea": all(mean[n, "reduced", "rmsea"] <= mean[n, "full", "rmsea"] for n in grid),
        "c pvalue": all(mean[n, "reduced", "pvalue"] >= mean[n, "full", "pvalue"] for n in grid),
        "d mae@50": mean[50, "reduced", "mae"] >= mean[50, "full", "mae"],
    }
    elapsed = time.perf_counter() - t0
    ok = all(checks.values()) and elapsed < 180
    criterion("5 EX2 sweep orderings", ok,
              ", ".join(f"{k} {'ok' if v else 'FAIL'}" for k, v in checks.items()) + f", {elapsed:.1f}s")
    assert ok, mean


# 6 ----------------------------------------------------------------------
def test_criterion_6_calibration(criterion):
    t0 = time.perf_counter()
    reps, n = 500, 500
    model = fixtures.load("ex1")
    a = fill_coefficients(model, 0)
    pvals = [stats.chi2.sf(r.chi2, r.df) for r in
             (fit(model.graph, simulate(model.graph, a, n, (6, n, i))) for i in range(reps))]
    rejection = float(np.mean(np.array(pvals) < 0.05))

    # null effect: cut M -> Y so X has no effect on Y, then test it in the reduced model
    null = fill_coefficients(model, 0)
    null.coef[("M", "Y")] = 0.0
    t = total("X", "Y")
    g = reduce(model).graph
    null_p = [target_metrics(fit(g, simulate(model.graph, null, n, (7, n, i))), t, 0.0).p_value
              for i in range(reps)]
    ks = stats.kstest(null_p, "uniform").statistic
    elapsed = time.perf_counter() - t0
    ok = 0.03 <= rejection <= 0.07 and ks < 0.1 and elapsed < 180
    criterion("6 calibration", ok,
              f"chi2 rejection {rejection:.3f} (0.05 +- 0.02), null p KS {ks:.3f} (< 0.1), {elapsed:.1f}s")
    assert ok


# 7 ----------------------------------------------------------------------
def test_criterion_7_faithfulness(criterion):
    t0 = time.perf_counter()
    n = 50_000
    worst, count = 0.0, 0
    for k, name in enumerate(fixtures.NAMES):
        model = fixtures.load(name)
        a = fill_coefficients(model, 0)
        data = simulate(model.graph, a, n, (7, k))
        cols = list(data.columns)
        for s in implied_independencies(model.graph, 2):
            r = partial_corr(data.data, cols.index(min(s.left)), cols.index(min(s.right)),
                             [cols.index(v) for v in sorted(s.given)])
            worst = max(worst, abs(r))
            count += 1
    elapsed = time.perf_counter() - t0
    ok = worst < 0.02 and count > 0 and elapsed < 60
    criterion("7 Markov faithfulness", ok,
              f"{count} statements, max |partial r| {worst:.4f} (< 0.02), {elapsed:.1f}s")
    assert ok


# 8 ----------------------------------------------------------------------
IDENT = string.ascii_letters + "_"


def random_model(rng: random.Random) -> ModelFile:
    n = rng.randint(1, 8)
    names = []
    while len(names) < n:
        name = rng.choice(IDENT) + "".join(rng.choices(IDENT + string.digits, k=rng.randint(0, 5)))
        if name not in names and name not in ("latent", "node", "coef", "noise", "target",
                                              "total", "mediation", "via", "partial"):
            names.append(name)
    g = random_admg(rng, max_nodes=8, p_edge=0.35)
    mapping = dict(zip(g.nodes, names))
    nodes = [mapping[v] for v in g.nodes if v in mapping]
    keep = set(nodes)
    directed = [(mapping[a], mapping[b]) for a, b in g.directed_edges if mapping.get(a) in keep and mapping.get(b) in keep]
    bidirected = [(mapping[a], mapping[b]) for a, b in g.bidirected_edges if mapping.get(a) in keep and mapping.get(b) in keep]
    latent = [mapping[v] for v in g.latent if mapping.get(v) in keep]
    if len(latent) == len(nodes):
        latent = latent[1:]
    graph = CausalGraph(nodes, directed, bidirected, latent)

    def real():
        return rng.choice([round(rng.uniform(-3, 3), rng.randint(0, 6)), rng.uniform(-1, 1), 0.0, 1e-12])

    coefs = {e: real() for e in directed if rng.random() < 0.5}
    bi = {e: real() for e in bidirected if rng.random() < 0.5}
    noise = {v: abs(real()) + 0.01 for v in nodes if rng.random() < 0.3}
    obs = list(graph.observed)
    targets = []
    if len(obs) >= 2 and rng.random() < 0.7:
        x, y = rng.sample(obs, 2)
        targets.append(total(x, y))
    if len(obs) >= 3 and rng.random() < 0.5:
        chain = rng.sample(obs, rng.randint(3, min(5, len(obs))))
        targets.append(mediation(chain[0], chain[-1], chain[1:-1], rng.random() < 0.5))
    return ModelFile(graph, coefs, noise, targets, bi)


def fuzz_inputs(rng: random.Random):
    seeds = [fixtures.text(name) for name in fixtures.NAMES]
    alphabet = "AXY_01 ->()<,=.#\n\r\t\x00é" + "latent coef noise target via partial"
    for _ in range(1500):
        text = rng.choice(seeds)
        chars = list(text)
        for _ in range(rng.randint(1, 8)):
            op = rng.random()
            i = rng.randrange(len(chars) + 1)
            if op < 0.4 and chars:
                del chars[min(i, len(chars) - 1)]
            elif op < 0.8:
                chars.insert(i, rng.choice(alphabet))
            else:
                j = rng.randrange(len(chars) + 1)
                chars[i:j] = chars[j:i] if j < i else chars[i:j][::-1]
        yield "".join(chars)
    for _ in range(500):
        yield bytes(rng.randrange(256) for _ in range(rng.randint(0, 120)))


def test_criterion_8_dsl_round_trip(criterion):
    t0 = time.perf_counter()
    rng = random.Random(8)
    failures = 0
    for _ in range(1000):
        m = random_model(rng)
        text = serialize(m)
        back = parse(text)
        if back != m or serialize(back) != text:
            failures += 1
    crashes = fuzzed = 0
    for data in fuzz_inputs(random.Random(88)):
        fuzzed += 1
        try:
            parse(data)
        except ParseError:
            pass
        except Exception:  # noqa: BLE001 - any other exception is a crash
            crashes += 1
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and crashes == 0 and elapsed < 60
    criterion("8 DSL round trip", ok,
              f"{1000 - failures}/1000 round trips, {crashes} crashes on {fuzzed} fuzz inputs, {elapsed:.1f}s")
    assert ok
