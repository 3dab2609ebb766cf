"""Model reduction: latent projection, backdoor adjustment sets, and the
minimal structural model / regression plan for a set of target effects."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .ci import d_separated
from .dsl import ModelFile, TargetEffect, serialize
from .errors import GraphError, NotIdentifiable, ReductionError
from .graph import MAX_SUBSET_NODES, CausalGraph


@dataclass(frozen=True)
class AdjustmentSet:
    members: frozenset
    minimal: bool = True

    def __str__(self):
        return ", ".join(sorted(self.members))

    def __iter__(self):
        return iter(sorted(self.members))

    def __len__(self):
        return len(self.members)


@dataclass
class Equation:
    """One regression in the plan: ``outcome`` on ``structural`` then ``adjust``."""

    outcome: str
    structural: tuple
    adjust: tuple = ()

    @property
    def predictors(self) -> tuple:
        return self.structural + tuple(v for v in self.adjust if v not in self.structural)


@dataclass
class ReducedModel:
    graph: CausalGraph
    regressions: list
    dropped: tuple
    chosen_sets: dict
    targets: list = field(default_factory=list)

    def plan_lines(self) -> list[str]:
        """The regression plan, one ``outcome ~ p1 + p2`` line per equation."""
        return [f"{o} ~ {' + '.join(ps)}" for o, ps in self.regressions]

    def to_model(self) -> ModelFile:
        return ModelFile(self.graph, targets=list(self.targets))

    def to_text(self, comment_plan: bool = False) -> str:
        """Model text followed by the regression plan and dropped-variable report.

        With ``comment_plan`` the plan lines are ``#``-prefixed so the text
        parses as a model file.
        """
        lines = [serialize(self.to_model()).rstrip("\n"), "", "# regression plan"]
        lines += [("# " if comment_plan else "") + ln for ln in self.plan_lines()]
        lines.append("# dropped: " + (", ".join(self.dropped) if self.dropped else "(none)"))
        return "\n".join(lines) + "\n"


def _as_list(s):
    return [s] if isinstance(s, str) else list(s)


# -- projection ----------------------------------------------------------
def project(graph: CausalGraph, keep) -> CausalGraph:
    """Latent projection of ``graph`` onto the observed nodes ``keep``.

    ``a -> b`` survives when a directed path from ``a`` to ``b`` runs through
    removed nodes only; ``a <-> b`` appears when a removed-only path has
    arrowheads at both ends (a shared removed ancestor or an original
    bidirected edge between removed ancestors).

    >>> g = CausalGraph("XMY", [("X", "M"), ("M", "Y")])
    >>> project(g, ["X", "Y"]).directed_edges
    (('X', 'Y'),)
    """
    keep = _as_list(keep)
    if not keep:
        raise GraphError("projection needs at least one node to keep", code="E015")
    graph._require(keep)
    bad = [v for v in keep if graph.is_latent(v)]
    if bad:
        raise GraphError(f"cannot keep latent node(s) {bad}", code="E015")
    kept = set(keep)
    order = [v for v in graph.nodes if v in kept]

    # removed ancestors reaching v through removed nodes only
    reach = {}
    for v in order:
        seen = {v}
        stack = [v]
        while stack:
            w = stack.pop()
            for p in graph._parents[w]:
                if p not in kept and p not in seen:
                    seen.add(p)
                    stack.append(p)
        reach[v] = seen

    directed = []
    for b in order:
        tails = {p for x in reach[b] for p in graph._parents[x] if p in kept and p != b}
        directed += [(a, b) for a in order if a in tails]

    bidirected = []
    for i, a in enumerate(order):
        for b in order[i + 1:]:
            shared = (reach[a] & reach[b]) - kept
            if shared or any(
                graph.has_bidirected(x, y) for x in reach[a] for y in reach[b]
            ):
                bidirected.append((a, b))
    return CausalGraph(order, directed, bidirected)


# -- adjustment ----------------------------------------------------------
def _check_pair(graph, cause, outcome):
    graph._require([cause, outcome])
    if cause == outcome:
        raise ReductionError("cause and outcome must differ", code="E008")
    for v in (cause, outcome):
        if graph.is_latent(v):
            raise ReductionError(f"{v!r} is latent", code="E008")


def is_backdoor_set(graph: CausalGraph, cause: str, outcome: str, z) -> bool:
    """Backdoor criterion: no descendant of ``cause`` in ``z`` and ``z``
    separates ``cause`` from ``outcome`` once edges out of ``cause`` are cut."""
    z = set(_as_list(z))
    if z & graph.descendants([cause]) or outcome in z:
        return False
    cut = graph.with_edges(directed=[e for e in graph.directed_edges if e[0] != cause])
    return d_separated(cut, cause, outcome, z)


def _candidates(graph, pool):
    pool = sorted(pool)
    if len(pool) > MAX_SUBSET_NODES:
        raise ReductionError(
            f"{len(pool)} candidate adjustment variables exceed the subset cap "
            f"({MAX_SUBSET_NODES})"
        )
    return pool


def adjustment_sets(graph: CausalGraph, cause: str, outcome: str) -> list[AdjustmentSet]:
    """All inclusion-minimal backdoor adjustment sets, by size then name order.

    Exhaustive search over observed non-descendants of ``cause`` that are
    ancestors of ``cause`` or ``outcome`` (minimal separators never leave that
    ancestral set).
    """
    _check_pair(graph, cause, outcome)
    forbidden = graph.descendants([cause]) | {outcome}
    anc = graph.ancestors([cause, outcome])
    pool = _candidates(graph, [v for v in graph.observed if v in anc and v not in forbidden])
    cut = graph.with_edges(directed=[e for e in graph.directed_edges if e[0] != cause])
    valid: list[frozenset] = []
    minimal = []
    for k in range(len(pool) + 1):
        for z in combinations(pool, k):
            zs = frozenset(z)
            if any(v <= zs for v in valid):
                continue
            if d_separated(cut, cause, outcome, zs):
                valid.append(zs)
                minimal.append(AdjustmentSet(zs, True))
    return minimal


def _reaches_avoiding(graph, target, avoid):
    """Nodes with a directed path to ``target`` that does not pass through ``avoid``."""
    seen = {target}
    stack = [target]
    while stack:
        w = stack.pop()
        for p in graph._parents[w]:
            if p not in seen and p not in avoid:
                seen.add(p)
                stack.append(p)
    return seen


def equation_valid(graph: CausalGraph, outcome: str, structural, z) -> bool:
    """Whether regressing ``outcome`` on ``structural + z`` gives, for each
    structural predictor ``p``, the sum of directed-path effects from ``p`` to
    ``outcome`` that avoid the other structural predictors.

    For every ``p``: cut the edges out of ``p`` that start such paths, then
    require ``p`` and ``outcome`` to be separated given the other
    predictors and ``z``.
    """
    structural = list(structural)
    z = set(z)
    for p in structural:
        others = set(structural) - {p}
        front = _reaches_avoiding(graph, outcome, others)
        cut = graph.with_edges(
            directed=[
                (a, b) for a, b in graph.directed_edges
                if not (a == p and b in front and b not in others)
            ]
        )
        if not d_separated(cut, p, outcome, others | z):
            return False
    return True


def _equation_set(graph, cause, outcome, structural):
    forbidden = graph.descendants([cause]) | set(structural) | {outcome}
    pool = _candidates(graph, [v for v in graph.observed if v not in forbidden])
    for k in range(len(pool) + 1):
        for z in combinations(pool, k):
            if equation_valid(graph, outcome, structural, z):
                return z
    return None


def target_equations(graph: CausalGraph, target: TargetEffect) -> list[Equation]:
    """Equations (with the chosen adjustment) needed to estimate ``target``."""
    for v in target.chain[1:]:
        _check_pair(graph, target.cause, v)
    if target.kind == "total":
        sets = adjustment_sets(graph, target.cause, target.outcome)
        if not sets:
            raise NotIdentifiable(
                f"{target}: no observed backdoor adjustment set; the effect is not "
                "identifiable by adjustment (e.g. unobserved cause-outcome confounding)"
            )
        return [Equation(target.outcome, (target.cause,), tuple(sorted(sets[0].members)))]
    chain = target.chain
    eqs = []
    for i in range(len(chain) - 1):
        o = chain[i + 1]
        structural = (chain[i],)
        if target.partial and o == target.outcome:
            structural = (target.cause, chain[i])
        z = _equation_set(graph, target.cause, o, structural)
        if z is None:
            hint = ""
            if not target.partial and o == target.outcome:
                hint = " (if the cause also acts on the outcome directly, declare the target 'partial')"
            raise NotIdentifiable(
                f"{target}: no observed adjustment set for the equation of {o} on "
                f"{', '.join(structural)}{hint}"
            )
        eqs.append(Equation(o, structural, tuple(z)))
    return eqs


def _eq_ok(graph, target, eq, adjust):
    if target.kind == "total":
        return is_backdoor_set(graph, target.cause, eq.outcome, adjust)
    causes_desc = graph.descendants([target.cause])
    if set(adjust) & causes_desc:
        return False
    return equation_valid(graph, eq.outcome, eq.structural, adjust)


def reduce(model: ModelFile, keep_precision: bool = False) -> ReducedModel:
    """Minimal structural model and regression plan for ``model.targets``.

    With ``keep_precision`` the observed parents of each equation outcome that
    are not descendants of any target cause are added as extra predictors,
    provided every equation stays valid.
    """
    graph = model.graph
    graph.check()
    if not model.targets:
        raise ReductionError("model declares no targets", code="E011")
    causes = [t.cause for t in model.targets]
    cause_desc = graph.descendants(causes)

    per_target = []
    for t in model.targets:
        eqs = target_equations(graph, t)
        if keep_precision:
            for eq in eqs:
                extra = [
                    p for p in graph.parents(eq.outcome)
                    if not graph.is_latent(p) and p not in cause_desc
                    and p not in eq.structural and p not in eq.adjust
                ]
                adjust = list(eq.adjust)
                for p in extra:
                    if _eq_ok(graph, t, eq, adjust + [p]):
                        adjust.append(p)
                eq.adjust = tuple(sorted(adjust))
        per_target.append((t, eqs))

    # merge equations sharing an outcome; predictors keep first-seen order
    merged: dict[str, list[str]] = {}
    for _, eqs in per_target:
        for eq in eqs:
            preds = merged.setdefault(eq.outcome, [])
            preds += [p for p in eq.predictors if p not in preds]
    for t, eqs in per_target:
        for eq in eqs:
            adjust = [p for p in merged[eq.outcome] if p not in eq.structural]
            if not _eq_ok(graph, t, eq, adjust):
                raise ReductionError(
                    f"targets conflict in the equation for {eq.outcome}: predictors "
                    f"{merged[eq.outcome]} invalidate {t}; reduce these targets separately"
                )

    used = set(merged) | {p for ps in merged.values() for p in ps}
    nodes = [v for v in graph.nodes if v in used]
    edges = [(p, o) for o in nodes if o in merged for p in merged[o]]
    reduced = CausalGraph(nodes, edges)
    regressions = [
        (o, tuple(merged[o])) for o in reduced.topological_order() if o in merged
    ]
    dropped = tuple(v for v in graph.observed if v not in used)
    chosen = {
        t: AdjustmentSet(
            frozenset(v for eq in eqs for v in eq.adjust),
            minimal=not keep_precision,
        )
        for t, eqs in per_target
    }
    return ReducedModel(reduced, regressions, dropped, chosen, list(model.targets))
