"""``markovprune`` command line interface.

Exit codes: 0 success, 1 domain error (``error[E0xx]: ...`` on stderr),
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import bench, ci, dsl, reducer, sim
from .fit import effect_estimate, fit, target_metrics
from .errors import MarkovPruneError, ParseError

SEED_ENV = "MARKOVPRUNE_SEED"


def _nodes(text: str) -> list[str]:
    return [v for v in text.replace(",", " ").split() if v]


def _load(path: str) -> dsl.ModelFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise MarkovPruneError(f"cannot read {path}: {exc.strerror}", code="E031") from None
    except UnicodeDecodeError:
        raise MarkovPruneError(f"{path} is not UTF-8", code="E031") from None
    return dsl.parse(text)


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise MarkovPruneError(f"{SEED_ENV}={env!r} is not an integer", code="E032") from None


def cmd_validate(args):
    _load(args.file)
    print("OK")


def cmd_indep(args):
    model = _load(args.file)
    for st in ci.implied_independencies(model.graph, args.max_given):
        print(st)


def cmd_mblanket(args):
    g = _load(args.file).graph
    if g.latent:
        print(f"# projected out latent node(s): {', '.join(g.sort(g.latent))}")
        g = reducer.project(g, g.observed)
        if g.bidirected_edges:
            pairs = ", ".join(f"{a}<->{b}" for a, b in g.bidirected_edges)
            raise MarkovPruneError(
                f"projecting out latents leaves correlated errors ({pairs}); "
                "the Markov blanket is defined for DAGs only",
                code="E014",
            )
    mb = ci.markov_blanket(g, _nodes(args.of))
    print(", ".join(g.sort(mb)))


def cmd_project(args):
    model = _load(args.file)
    keep = _nodes(args.keep)
    g = reducer.project(model.graph, keep)
    targets = [t for t in model.targets if set(t.chain) <= set(keep)]
    sys.stdout.write(dsl.serialize(dsl.ModelFile(g, targets=targets)))


def cmd_adjust(args):
    g = _load(args.file).graph
    sets = reducer.adjustment_sets(g, args.cause, args.outcome)
    if not sets:
        raise MarkovPruneError(
            f"no backdoor adjustment set for {args.cause} -> {args.outcome}", code="E010"
        )
    for s in sets:
        print(str(s) if s.members else "{}")


def cmd_reduce(args):
    model = _load(args.file)
    red = reducer.reduce(model, keep_precision=args.keep_precision)
    if args.json:
        doc = {
            "graph": dsl.serialize(red.to_model()),
            "regressions": [{"outcome": o, "predictors": list(p)} for o, p in red.regressions],
            "plan": red.plan_lines(),
            "dropped": list(red.dropped),
            "adjustment": {str(t): sorted(s.members) for t, s in red.chosen_sets.items()},
        }
        print(json.dumps(doc, indent=2))
        if args.output:
            _write(red.to_text(comment_plan=True), args.output)
        return
    if args.output:
        _write(red.to_text(comment_plan=True), args.output)
        print("\n".join(red.plan_lines()))
        print("# dropped: " + (", ".join(red.dropped) if red.dropped else "(none)"))
    else:
        sys.stdout.write(red.to_text())


def cmd_simulate(args):
    model = _load(args.file)
    if args.n < 1:
        raise MarkovPruneError("--n must be >= 1", code="E030")
    seed = _seed(args)
    assignment = sim.fill_coefficients(model, seed)
    data = sim.simulate(model.graph, assignment, args.n, seed)
    _write(data.to_csv(), args.output)


def cmd_fit(args):
    model = _load(args.model)
    data = sim.Dataset.from_csv(args.data)
    g, dropped = bench.full_graph(model.graph)
    if model.graph.latent or dropped:
        msg = "note: fitted the observed projection"
        if dropped:
            msg += "; dropped correlated errors " + ", ".join(f"{a}<->{b}" for a, b in dropped)
        print(msg, file=sys.stderr)
    res = fit(g, data)
    effects = []
    for t in model.targets:
        try:
            est, se = effect_estimate(res, t)
        except MarkovPruneError as exc:
            print(f"note: {t}: {exc.message}", file=sys.stderr)
            continue
        p = target_metrics(res, t, 0.0).p_value
        effects.append((t, est, se, p))
    if args.json:
        doc = res.to_dict()
        doc["targets"] = {str(t): {"estimate": e, "se": s, "p": p} for t, e, s, p in effects}
        print(json.dumps(doc, indent=2))
    else:
        text = res.to_text()
        for t, e, s, p in effects:
            text += f"target {t} = {e:.6g} (se {s:.4g}, p {p:.4g})\n"
        sys.stdout.write(text)


def cmd_sweep(args):
    model = _load(args.file)
    spec = bench.SweepSpec(model, bench.parse_grid(args.n_grid), args.reps, _seed(args), args.variants)
    rows = bench.run_sweep(spec, workers=args.workers)
    if any(r.misspecified for r in rows):
        _, dropped = bench.full_graph(model.graph)
        print("note: full variant is misspecified (dropped correlated errors "
              + ", ".join(f"{a}<->{b}" for a, b in dropped) + ")", file=sys.stderr)
    for r in rows:
        if r.failed and r.metric == bench.METRICS[0]:
            print(f"note: n={r.n} {r.variant}: {r.failed} of {spec.reps} fits failed", file=sys.stderr)
    _write(bench.rows_to_csv(rows), args.output)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="markovprune",
        description="Reduce a structural causal model to what the target effects need.",
    )
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("validate", help="check a model file")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("indep", help="list implied conditional independencies")
    p.add_argument("file")
    p.add_argument("--max-given", type=int, default=2, metavar="K")
    p.set_defaults(func=cmd_indep)

    p = sub.add_parser("mblanket", help="Markov blanket of a node set")
    p.add_argument("file")
    p.add_argument("--of", required=True, metavar="NODES")
    p.set_defaults(func=cmd_mblanket)

    p = sub.add_parser("project", help="latent projection onto a node subset")
    p.add_argument("file")
    p.add_argument("--keep", required=True, metavar="NODES")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("adjust", help="minimal backdoor adjustment sets")
    p.add_argument("file")
    p.add_argument("--cause", required=True)
    p.add_argument("--outcome", required=True)
    p.set_defaults(func=cmd_adjust)

    p = sub.add_parser("reduce", help="minimal model, regression plan and dropped variables")
    p.add_argument("file")
    p.add_argument("--keep-precision", action="store_true")
    p.add_argument("-o", "--output")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("simulate", help="simulate a dataset (CSV)")
    p.add_argument("file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit a path model to CSV data")
    p.add_argument("model")
    p.add_argument("data")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sweep", help="full vs reduced sample-size sweep (CSV)")
    p.add_argument("file")
    p.add_argument("--n-grid", required=True, metavar="START:STOP:STEP")
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--seed", type=int)
    p.add_argument("--variants", choices=["full", "reduced", "both"], default="both")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_sweep)
    return ap


def _report(exc: MarkovPruneError) -> None:
    if isinstance(exc, ParseError):
        for d in exc.diagnostics:
            print(f"error[{d.code}]: {d.message} (line {d.line}, col {d.col})", file=sys.stderr)
    else:
        print(f"error[{exc.code}]: {exc.message}", file=sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except MarkovPruneError as exc:
        _report(exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
