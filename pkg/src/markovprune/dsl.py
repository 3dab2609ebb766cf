"""Plain-text model language (``.dgp`` files).

One statement per line, ``#`` starts a comment::

    latent U
    U -> S
    U -> C
    S -> R
    C -> R
    coef S -> R = 0.4
    noise R = 1.5
    target total(S, R)

Statements: ``latent`` and ``node`` declarations, directed (``->``) and
bidirected (``<->``) edges, ``coef`` path weights, ``noise`` standard
deviations and ``target total(...)`` / ``target mediation(X, Y via M, ...)``
research questions.
"""

from __future__ import annotations

import heapq
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError
from .graph import CausalGraph, find_cycle

KEYWORDS = frozenset(
    {"latent", "node", "coef", "noise", "target", "total", "mediation", "via", "partial"}
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\f\v]+)
    |(?P<bi><->)
    |(?P<arrow>->)
    |(?P<num>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)
    |(?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    |(?P<punct>[(),=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Diagnostic:
    line: int
    col: int
    code: str
    message: str

    def __str__(self):
        return f"line {self.line}:{self.col}: {self.message}"


@dataclass(frozen=True)
class TargetEffect:
    """A research question: the total effect of ``cause`` on ``outcome``, or
    its mediation through an ordered chain of ``mediators``.

    ``partial`` (mediation only) also estimates the direct ``cause -> outcome``
    path.
    """

    kind: str
    cause: str
    outcome: str
    mediators: tuple[str, ...] = ()
    partial: bool = False

    def __post_init__(self):
        if self.kind not in ("total", "mediation"):
            raise ValueError(f"unknown target kind {self.kind!r}")
        object.__setattr__(self, "mediators", tuple(self.mediators))
        if self.cause == self.outcome:
            raise ValueError("target cause and outcome must differ")
        if self.kind == "total" and (self.mediators or self.partial):
            raise ValueError("total targets take no mediators")
        if self.kind == "mediation" and not self.mediators:
            raise ValueError("mediation targets need at least one mediator")
        if len(set(self.mediators)) != len(self.mediators) or {
            self.cause, self.outcome
        } & set(self.mediators):
            raise ValueError("mediators must be distinct and exclude cause/outcome")

    @property
    def chain(self) -> tuple[str, ...]:
        """``(cause, *mediators, outcome)``."""
        return (self.cause, *self.mediators, self.outcome)

    @property
    def nodes(self) -> tuple[str, ...]:
        return self.chain

    def __str__(self):
        if self.kind == "total":
            return f"total({self.cause}, {self.outcome})"
        tail = ", partial" if self.partial else ""
        return f"mediation({self.cause}, {self.outcome} via {', '.join(self.mediators)}{tail})"


def total(cause: str, outcome: str) -> TargetEffect:
    return TargetEffect("total", cause, outcome)


def mediation(cause: str, outcome: str, mediators, partial: bool = False) -> TargetEffect:
    if isinstance(mediators, str):
        mediators = (mediators,)
    return TargetEffect("mediation", cause, outcome, tuple(mediators), partial)


@dataclass
class ModelFile:
    graph: CausalGraph
    coefficients: dict = field(default_factory=dict)
    noise_sd: dict = field(default_factory=dict)
    targets: list = field(default_factory=list)
    bidirected_weights: dict = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, ModelFile):
            return NotImplemented
        return (
            self.graph == other.graph
            and self.coefficients == other.coefficients
            and self.noise_sd == other.noise_sd
            and list(self.targets) == list(other.targets)
            and {frozenset(k): v for k, v in self.bidirected_weights.items()}
            == {frozenset(k): v for k, v in other.bidirected_weights.items()}
        )


class _Line:
    """Token cursor over one source line."""

    def __init__(self, lineno, tokens, diags):
        self.lineno = lineno
        self.tokens = tokens
        self.pos = 0
        self.diags = diags

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def col(self):
        tok = self.peek()
        if tok is not None:
            return tok[2]
        return self.tokens[-1][2] + len(self.tokens[-1][1]) if self.tokens else 1

    def fail(self, message, code="E005"):
        raise _Syntax(Diagnostic(self.lineno, self.col(), code, message))

    def take(self, kind, value=None):
        tok = self.peek()
        if tok is None or tok[0] != kind or (value is not None and tok[1] != value):
            want = repr(value) if value is not None else kind
            got = "end of line" if tok is None else repr(tok[1])
            self.fail(f"expected {want}, found {got}")
        self.pos += 1
        return tok

    def ident(self):
        tok = self.take("ident")
        if tok[1] in KEYWORDS:
            self.pos -= 1
            self.fail(f"keyword {tok[1]!r} cannot be used as a node name")
        return tok

    def number(self):
        return float(self.take("num")[1])

    def end(self):
        if self.peek() is not None:
            self.fail(f"unexpected {self.peek()[1]!r}")


class _Syntax(Exception):
    def __init__(self, diag):
        self.diag = diag


def _tokenize(text, lineno):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise _Syntax(Diagnostic(lineno, pos + 1, "E005", f"unexpected character {text[pos]!r}"))
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos + 1))
        pos = m.end()
    return tokens


def parse(text: str) -> ModelFile:
    """Parse model text. Raises :class:`ParseError` listing every diagnostic.

    >>> m = parse("A -> B\\nB -> C")
    >>> m.graph.topological_order()
    ['A', 'B', 'C']
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError([Diagnostic(1, 1, "E005", f"input is not UTF-8: {exc.reason}")])
    diags: list[Diagnostic] = []
    nodes: dict[str, None] = {}
    latent: set[str] = set()
    directed: dict[tuple[str, str], int] = {}
    bidirected: dict[frozenset, tuple[str, str, int]] = {}
    coef_stmts = []
    noise_stmts = []
    target_stmts = []

    for lineno, raw in enumerate(text.replace("\r\n", "\n").replace("\r", "\n").split("\n"), 1):
        line = raw.split("#", 1)[0]
        try:
            toks = _tokenize(line, lineno)
            if not toks:
                continue
            cur = _Line(lineno, toks, diags)
            head = toks[0]
            if head[0] == "ident" and head[1] in ("latent", "node"):
                cur.pos = 1
                names = [cur.ident()[1]]
                while cur.peek() is not None:
                    names.append(cur.ident()[1])
                for name in names:
                    nodes.setdefault(name)
                    if head[1] == "latent":
                        latent.add(name)
            elif head[0] == "ident" and head[1] == "coef":
                cur.pos = 1
                a = cur.ident()
                op = cur.peek()
                if op is None or op[0] not in ("arrow", "bi"):
                    cur.fail("expected '->' or '<->'")
                cur.pos += 1
                b = cur.ident()
                cur.take("punct", "=")
                value = cur.number()
                cur.end()
                if not math.isfinite(value):
                    raise _Syntax(Diagnostic(lineno, a[2], "E007", "coefficient must be finite"))
                coef_stmts.append((lineno, a, op[0], b, value))
            elif head[0] == "ident" and head[1] == "noise":
                cur.pos = 1
                a = cur.ident()
                cur.take("punct", "=")
                col = cur.col()
                value = cur.number()
                cur.end()
                if not (value > 0 and math.isfinite(value)):
                    raise _Syntax(Diagnostic(lineno, col, "E007", "noise sd must be a positive real"))
                noise_stmts.append((lineno, a, value))
            elif head[0] == "ident" and head[1] == "target":
                cur.pos = 1
                target_stmts.append((lineno, _parse_target(cur)))
            else:
                a = cur.ident()
                op = cur.peek()
                if op is None or op[0] not in ("arrow", "bi"):
                    cur.fail("expected '->' or '<->'")
                cur.pos += 1
                b = cur.ident()
                cur.end()
                nodes.setdefault(a[1])
                nodes.setdefault(b[1])
                if a[1] == b[1]:
                    diags.append(Diagnostic(lineno, a[2], "E004", f"self-loop on {a[1]}"))
                elif op[0] == "arrow":
                    if (a[1], b[1]) in directed:
                        diags.append(Diagnostic(lineno, a[2], "E003", f"duplicate edge {a[1]} -> {b[1]}"))
                    else:
                        directed[(a[1], b[1])] = lineno
                else:
                    key = frozenset((a[1], b[1]))
                    if key in bidirected:
                        diags.append(Diagnostic(lineno, a[2], "E003", f"duplicate edge {a[1]} <-> {b[1]}"))
                    else:
                        bidirected[key] = (a[1], b[1], lineno)
        except _Syntax as exc:
            diags.append(exc.diag)

    graph = CausalGraph(
        list(nodes),
        list(directed),
        [(a, b) for a, b, _ in bidirected.values()],
        latent,
    )
    cyc = find_cycle(graph)
    if cyc:
        lineno = max(directed[(cyc[i], cyc[i + 1])] for i in range(len(cyc) - 1))
        diags.append(Diagnostic(lineno, 1, "E001", "cycle: " + " -> ".join(cyc)))

    def known(lineno, tok):
        if tok[1] not in nodes:
            diags.append(Diagnostic(lineno, tok[2], "E002", f"unknown node {tok[1]!r}"))
            return False
        return True

    coefficients: dict[tuple[str, str], float] = {}
    biweights: dict[tuple[str, str], float] = {}
    for lineno, a, op, b, value in coef_stmts:
        if not (known(lineno, a) & known(lineno, b)):
            continue
        if op == "arrow":
            key = (a[1], b[1])
            if key not in directed:
                diags.append(Diagnostic(lineno, a[2], "E006", f"coefficient on missing edge {a[1]} -> {b[1]}"))
            elif key in coefficients:
                diags.append(Diagnostic(lineno, a[2], "E003", f"duplicate coefficient for {a[1]} -> {b[1]}"))
            else:
                coefficients[key] = value
        else:
            pair = frozenset((a[1], b[1]))
            if pair not in bidirected:
                diags.append(Diagnostic(lineno, a[2], "E006", f"coefficient on missing edge {a[1]} <-> {b[1]}"))
            else:
                key = graph._norm_pair(a[1], b[1])
                if key in biweights:
                    diags.append(Diagnostic(lineno, a[2], "E003", f"duplicate coefficient for {a[1]} <-> {b[1]}"))
                else:
                    biweights[key] = value

    noise_sd: dict[str, float] = {}
    for lineno, a, value in noise_stmts:
        if known(lineno, a):
            if a[1] in noise_sd:
                diags.append(Diagnostic(lineno, a[2], "E003", f"duplicate noise for {a[1]}"))
            noise_sd[a[1]] = value

    targets = []
    for lineno, (kind, toks, partial) in target_stmts:
        ok = all([known(lineno, t) for t in toks])
        if not ok:
            continue
        for t in toks:
            if t[1] in latent:
                diags.append(Diagnostic(lineno, t[2], "E008", f"target node {t[1]!r} is latent"))
                ok = False
        if not ok:
            continue
        names = [t[1] for t in toks]
        try:
            if kind == "total":
                targets.append(TargetEffect("total", names[0], names[1]))
            else:
                targets.append(TargetEffect("mediation", names[0], names[1], tuple(names[2:]), partial))
        except ValueError as exc:
            diags.append(Diagnostic(lineno, toks[0][2], "E008", str(exc)))

    if diags:
        diags.sort(key=lambda d: (d.line, d.col))
        raise ParseError(diags)
    return ModelFile(graph, coefficients, noise_sd, targets, biweights)


def _parse_target(cur: _Line):
    kind = cur.take("ident")
    if kind[1] not in ("total", "mediation"):
        cur.pos -= 1
        cur.fail("expected 'total' or 'mediation'")
    cur.take("punct", "(")
    cause = cur.ident()
    cur.take("punct", ",")
    outcome = cur.ident()
    toks = [cause, outcome]
    partial = False
    if kind[1] == "mediation":
        cur.take("ident", "via")
        toks.append(cur.ident())
        while cur.peek() is not None and cur.peek()[1] == ",":
            cur.pos += 1
            nxt = cur.peek()
            if nxt is not None and nxt[1] == "partial":
                cur.pos += 1
                partial = True
                break
            toks.append(cur.ident())
    cur.take("punct", ")")
    cur.end()
    return kind[1], toks, partial


def _fmt(x: float) -> str:
    return repr(float(x))


def _canonical_rank(g) -> dict:
    """Topological rank with ties broken by name, so the text does not depend
    on declaration order (and serializing a parsed text is a fixed point)."""
    indeg = {v: len(g.parents(v)) for v in g.nodes}
    heap = [v for v, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    rank = {}
    while heap:
        v = heapq.heappop(heap)
        rank[v] = len(rank)
        for c in g.children(v):
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(heap, c)
    # nodes on a cycle (only reachable for unchecked graphs) go last, by name
    for v in sorted(set(g.nodes) - set(rank)):
        rank[v] = len(rank)
    return rank


def serialize(model: ModelFile) -> str:
    """Canonical text form; ``parse(serialize(m)) == m``."""
    g = model.graph
    rank = _canonical_rank(g)

    def edge_key(e):
        return (rank[e[0]], rank[e[1]])

    directed = sorted(g.directed_edges, key=edge_key)
    bidirected = sorted(
        (tuple(sorted(e, key=rank.__getitem__)) for e in g.bidirected_edges), key=edge_key
    )
    touched = {v for e in directed for v in e} | {v for e in bidirected for v in e}
    lines = []
    if g.latent:
        lines.append("latent " + " ".join(sorted(g.latent, key=rank.__getitem__)))
    loose = sorted((v for v in g.nodes if v not in touched and v not in g.latent),
                   key=rank.__getitem__)
    if loose:
        lines.append("node " + " ".join(loose))
    lines += [f"{a} -> {b}" for a, b in directed]
    lines += [f"{a} <-> {b}" for a, b in bidirected]
    lines += [
        f"coef {a} -> {b} = {_fmt(model.coefficients[(a, b)])}"
        for a, b in directed
        if (a, b) in model.coefficients
    ]
    bw = {frozenset(k): v for k, v in model.bidirected_weights.items()}
    lines += [
        f"coef {a} <-> {b} = {_fmt(bw[frozenset((a, b))])}"
        for a, b in bidirected
        if frozenset((a, b)) in bw
    ]
    lines += [
        f"noise {v} = {_fmt(model.noise_sd[v])}"
        for v in sorted(model.noise_sd, key=rank.__getitem__)
    ]
    lines += [f"target {t}" for t in model.targets]
    return "\n".join(lines) + "\n"


def load(path) -> ModelFile:
    return parse(Path(path).read_text(encoding="utf-8"))


def dump(model: ModelFile, path) -> None:
    Path(path).write_text(serialize(model), encoding="utf-8", newline="\n")
