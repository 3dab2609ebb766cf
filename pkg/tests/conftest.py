import random

import numpy as np
import pytest

from markovprune.graph import CausalGraph

_RESULTS_KEY = pytest.StashKey[list]()


def random_admg(rng: random.Random, max_nodes=8, p_edge=0.3, max_latent=2, p_bidirected=0.2):
    """Random acyclic directed mixed graph with up to ``max_latent`` latents."""
    n = rng.randint(2, max_nodes)
    names = [f"V{i}" for i in range(n)]
    order = names[:]
    rng.shuffle(order)
    directed, bidirected = [], []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p_edge:
                if rng.random() < p_bidirected:
                    bidirected.append((order[i], order[j]))
                else:
                    directed.append((order[i], order[j]))
    k = rng.randint(0, min(max_latent, n - 2))
    latent = rng.sample(names, k)
    return CausalGraph(names, directed, bidirected, latent)


def random_dag(rng: random.Random, max_nodes=8, p_edge=0.3):
    return random_admg(rng, max_nodes, p_edge, max_latent=0, p_bidirected=0.0)


def brute_ancestors(graph, z):
    """Fixed-point ancestor closure, written without the graph's own helpers."""
    anc = set(z)
    changed = True
    while changed:
        changed = False
        for a, b in graph.directed_edges:
            if b in anc and a not in anc:
                anc.add(a)
                changed = True
    return anc


def all_paths(graph, x, y):
    """Every simple path between x and y as a list of (node, mark_in, mark_out).

    Steps are (u, v, head_at_u, head_at_v) for each edge traversed.
    """
    steps = {v: [] for v in graph.nodes}
    for a, b in graph.directed_edges:
        steps[a].append((b, False, True))
        steps[b].append((a, True, False))
    for a, b in graph.bidirected_edges:
        steps[a].append((b, True, True))
        steps[b].append((a, True, True))
    out = []

    def walk(path, marks, seen):
        v = path[-1]
        if v == y:
            out.append((list(path), list(marks)))
            return
        for w, head_v, head_w in steps[v]:
            if w not in seen:
                seen.add(w)
                path.append(w)
                marks.append((head_v, head_w))
                walk(path, marks, seen)
                marks.pop()
                path.pop()
                seen.discard(w)

    walk([x], [], {x})
    return out


def path_open(path, marks, z, anc_z):
    for i in range(1, len(path) - 1):
        v = path[i]
        collider = marks[i - 1][1] and marks[i][0]
        if collider:
            if v not in anc_z:
                return False
        elif v in z:
            return False
    return True


def brute_separated(graph, x, y, z, paths=None):
    z = set(z)
    anc_z = brute_ancestors(graph, z)
    if paths is None:
        paths = all_paths(graph, x, y)
    return not any(path_open(p, m, z, anc_z) for p, m in paths)


def partial_corr(data: np.ndarray, i: int, j: int, given: list[int]) -> float:
    """Residual correlation of columns i and j after regressing on ``given``."""
    x = data[:, i] - data[:, i].mean()
    y = data[:, j] - data[:, j].mean()
    if given:
        Z = data[:, given] - data[:, given].mean(axis=0)
        x = x - Z @ np.linalg.lstsq(Z, x, rcond=None)[0]
        y = y - Z @ np.linalg.lstsq(Z, y, rcond=None)[0]
    return float(x @ y / np.sqrt((x @ x) * (y @ y)))


@pytest.fixture
def criterion(request):
    """Record an acceptance criterion outcome for the terminal summary."""
    store = request.config.stash.setdefault(_RESULTS_KEY, [])

    def record(label: str, passed: bool, detail: str = ""):
        store.append((label, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_RESULTS_KEY, [])
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in sorted(results):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {label}" + (f" -- {detail}" if detail else ""))
