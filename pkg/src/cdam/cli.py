"""Command-line front end: single simulations, named experiment
reproductions, and a label-driven automaton REPL.

Graph specs are compact strings: cycle:30, dicycle:50, barbell:10,10,
karate, tutte, regular:46,3,7 (p,k,seed), or file:PATH.  Pattern specs:
random:1000 (neuron count; one pattern per graph vertex), idx:IMAGES[,LABELS],
frames:DIR,N.  Exit codes: 0 ok, 2 usage/config error, 3 numeric divergence.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import experiments, reports
from .automata import family_tree, load_spec_file
from .dynamics import ModelParams, init_state, run
from .errors import CdamError, NumericDivergenceError
from .graphs import (
    build_barbell,
    build_cycle,
    build_named,
    build_random_regular,
    normalize,
    read_graph,
)
from .ingest import ingest_frames, load_idx, random_patterns
from .dynamics import PatternMatrix

EXPERIMENT_NAMES = (
    "four-modes", "hop-range", "miyashita", "karate", "tutte", "barbell",
    "sequence", "retrieval-sweep", "automaton-sweep", "ei-balance",
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3


class UsageError(CdamError):
    pass


def parse_graph_spec(spec: str):
    kind, _, rest = spec.partition(":")
    try:
        if kind == "cycle":
            return build_cycle(int(rest), directed=False)
        if kind == "dicycle":
            return build_cycle(int(rest), directed=True)
        if kind == "barbell":
            n, m = (int(v) for v in rest.split(","))
            return build_barbell(n, m)
        if kind == "regular":
            p, k, seed = (int(v) for v in rest.split(","))
            return build_random_regular(p, k, seed)
        if kind == "file":
            return read_graph(rest)
        if kind in ("karate", "tutte") and not rest:
            return build_named(kind)
    except (ValueError, CdamError) as exc:
        raise UsageError(f"bad graph spec {spec!r}: {exc}") from exc
    raise UsageError(f"unrecognized graph spec {spec!r}")


def parse_pattern_spec(spec: str, p: int, seed: int):
    kind, _, rest = spec.partition(":")
    try:
        if kind == "random":
            return random_patterns(int(rest), p, seed)
        if kind == "idx":
            paths = rest.split(",")
            images, _ = load_idx(*paths[:2]) if len(paths) > 1 else load_idx(paths[0])
            if images.shape[0] < p:
                raise UsageError(f"archive holds {images.shape[0]} images, graph needs {p}")
            return PatternMatrix(images[:p].T)
        if kind == "frames":
            directory, n = rest.rsplit(",", 1)
            patterns, _ = ingest_frames(directory, int(n), seed)
            if patterns.p != p:
                raise UsageError(f"{patterns.p} frames found, graph needs {p}")
            return patterns
    except UsageError:
        raise
    except (ValueError, CdamError) as exc:
        raise UsageError(f"bad pattern spec {spec!r}: {exc}") from exc
    raise UsageError(f"unrecognized pattern spec {spec!r}")


def _add_model_flags(parser):
    parser.add_argument("--a", type=float, default=1.0)
    parser.add_argument("--h", type=float, default=0.0)
    parser.add_argument("--beta", type=float, default=1.0)
    parser.add_argument("--eta", type=float, default=0.1)
    parser.add_argument("--steps", type=int, default=101)
    parser.add_argument("--tol", type=float, default=1e-9)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--noise-c", type=float, default=1.0)


def build_parser():
    parser = argparse.ArgumentParser(prog="cdam", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one simulation and export its trace")
    _add_model_flags(sim)
    sim.add_argument("--graph", required=True)
    sim.add_argument("--patterns", required=True)
    sim.add_argument("--trigger", type=int, default=0)
    sim.add_argument("--out", default="out")
    sim.add_argument("--energy", action="store_true", help="record the energy per step")

    exp = sub.add_parser("experiment", help="reproduce a named experiment")
    exp.add_argument("name")
    exp.add_argument("--out", default="out")
    exp.add_argument("--n", type=int, default=None)
    exp.add_argument("--seed", type=int, default=0)
    exp.add_argument("--graph", default=None, help="override the default graph (four-modes)")

    auto = sub.add_parser("automaton", help="drive a finite automaton by labels")
    auto.add_argument("--spec", default=None, help="JSON spec file (default: bundled family tree)")
    auto.add_argument("--script", default=None, help="comma-separated labels to replay")
    auto.add_argument("--repl", action="store_true", help="read labels from stdin")
    auto.add_argument("--start", default=None)
    auto.add_argument("--n", type=int, default=1000)
    auto.add_argument("--seed", type=int, default=0)
    auto.add_argument("--out", default=None, help="also write the transcript to this directory")
    return parser


def cmd_simulate(args) -> int:
    graph = parse_graph_spec(args.graph)
    patterns = parse_pattern_spec(args.patterns, graph.p, args.seed)
    if not 0 <= args.trigger < patterns.p:
        raise UsageError(f"trigger {args.trigger} outside [0, {patterns.p})")
    params = ModelParams(a=args.a, h=args.h, beta=args.beta, eta=args.eta)
    state = init_state(patterns, args.trigger, c=args.noise_c, seed=args.seed)
    coupling = normalize(graph)
    trace = run(state, patterns, coupling, params, max_steps=args.steps,
                fixed_point_tol=args.tol, energy_graph=graph if args.energy else None)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    reports.trace_to_csv(trace, out / "trace.csv")
    reports.write_manifest(
        {
            "command": "simulate",
            "a": args.a, "h": args.h, "beta": args.beta, "eta": args.eta,
            "steps": args.steps, "tol": args.tol, "seed": args.seed,
            "noise_c": args.noise_c, "trigger": args.trigger,
            "graph": args.graph, "patterns": args.patterns,
            "graph_fingerprint": graph.fingerprint(),
            "termination": trace.termination,
            "steps_executed": trace.steps,
        },
        out / "manifest.json",
    )
    print(f"wrote {out / 'trace.csv'} ({trace.steps} steps, {trace.termination})")
    return EXIT_OK


def cmd_experiment(args) -> int:
    name = args.name
    if name not in EXPERIMENT_NAMES:
        raise UsageError(f"unknown experiment {name!r}; valid: {', '.join(EXPERIMENT_NAMES)}")
    n = args.n
    if name == "four-modes":
        graph = parse_graph_spec(args.graph) if args.graph else build_cycle(30)
        report = experiments.four_modes(graph, n=n or 1000, seed=args.seed)
    elif name == "hop-range":
        report = experiments.hop_range(n=n or 1000, seed=args.seed)
    elif name == "miyashita":
        report = experiments.miyashita_fit(n=n or 1000)
    elif name in ("karate", "tutte"):
        report = experiments.community_matrices(build_named(name), n=n or 1000, seed=args.seed)
    elif name == "barbell":
        report = experiments.community_matrices(build_barbell(10, 10), n=n or 1000, seed=args.seed)
    elif name == "sequence":
        frames = experiments.surrogate_frames(seed=args.seed)
        report = experiments.sequence_recall(frames, seed=args.seed + 1)
    elif name == "retrieval-sweep":
        bank = experiments.surrogate_image_bank(seed=77)
        report = experiments.retrieval_sweep(bank, seed=args.seed)
    elif name == "automaton-sweep":
        sweep = experiments.automaton_sweep(family_tree(), n=n or 1000, seed=args.seed)
        report = experiments.ExperimentReport(
            "automaton-sweep", {"n": n or 1000, "seed": args.seed}, {"landed": sweep}
        )
    else:  # ei-balance
        report = experiments.ei_balance(n=n or 1000, seed=args.seed)
    report.write(args.out)
    print(f"wrote {Path(args.out) / 'report.json'}")
    return EXIT_OK


def cmd_automaton(args) -> int:
    spec = load_spec_file(args.spec) if args.spec else family_tree()
    runner = experiments.AutomatonRunner(spec, n=args.n, seed=args.seed)
    if args.start:
        runner.set_state(args.start)
    lines = []

    def emit(text):
        print(text)
        lines.append(text)

    if args.script is not None:
        for label in [s for s in args.script.split(",") if s]:
            before = runner.state
            if spec.label_vectors is None and label not in spec.labels():
                emit(f"{before} + {label!r}: unknown label, state unchanged")
                continue
            name, r = runner.query(label)
            emit(f"{before} + {label} -> {runner.state}  (r={r:.3f})")
    elif args.repl:
        emit("labels step the machine; :state NAME resets, :quit exits")
        for raw in sys.stdin:
            token = raw.strip()
            if not token:
                continue
            if token == ":quit":
                break
            if token.startswith(":state"):
                try:
                    runner.set_state(token.split(None, 1)[1].strip())
                    emit(f"state set to {runner.state}")
                except (IndexError, CdamError) as exc:
                    emit(f"cannot set state: {exc}")
                continue
            before = runner.state
            if spec.label_vectors is None and token not in spec.labels():
                emit(f"{before} + {token!r}: unknown label, state unchanged")
                continue
            name, r = runner.query(token)
            emit(f"{before} + {token} -> {runner.state}  (r={r:.3f})")
    else:
        raise UsageError("automaton needs --script or --repl")

    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "transcript.txt").write_text("\n".join(lines) + "\n")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"simulate": cmd_simulate, "experiment": cmd_experiment, "automaton": cmd_automaton}
    try:
        return handlers[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericDivergenceError as exc:
        print(f"numeric divergence: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except CdamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
