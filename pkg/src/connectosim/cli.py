"""Command-line interface.

Subcommands: classify, evolve, solve, metrics, export-facts, synth, train,
serve. Exit codes: 0 success, 1 domain error (validation, infeasibility),
2 usage error. Stochastic subcommands (evolve, synth, train) require an
explicit --seed so every run is reproducible.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import engine, validity
from .classifier import (
    NeuralStageClassifier,
    TrainingConfig,
    edge_importance,
    load_model,
    save_model,
    train,
)
from .errors import ConnectosimError
from .interop import (
    FactExtras,
    SyntheticSpec,
    emit_facts,
    load_matrix,
    save_history,
    save_matrix,
)
from .interop.synthetic import generate_synthetic
from .metrics import assortativity, density
from .optimizer import Direction, ImportanceBias, MetricTarget
from .errors import UndefinedMetricError
from .stages import Stage
from .substructures import ImportanceFilter, StructuralCriterion, Variant, solve

POLICY_CHOICES = (
    "clique",
    "independent-set",
    "max-degree",
    "k-hub",
    "mvc",
    "density",
    "assortativity",
    "random",
)
IMPORTANCE_CHOICES = (
    "none",
    "only-important",
    "only-unimportant",
    "prefer-important",
    "prefer-unimportant",
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="connectosim",
        description="Connectome evolution simulation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="stage probabilities for a connectome")
    p.add_argument("--input", required=True, help="adjacency matrix file")
    p.add_argument("--model", required=True, help="model checkpoint (.npz)")
    p.add_argument("--importance-out", help="write the saliency matrix here")

    p = sub.add_parser("evolve", help="run the evolution loop")
    p.add_argument("--input", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--policy", required=True, choices=POLICY_CHOICES)
    p.add_argument("--k", type=int, help="hub count for --policy k-hub")
    p.add_argument("--p", type=int, default=50, help="degradation percent (default 50)")
    p.add_argument(
        "--relative-change", type=float, default=0.10,
        help="relative metric change per iteration (default 0.10)",
    )
    p.add_argument(
        "--direction", choices=("decrease", "increase"),
        help="metric direction (defaults: density decrease, assortativity increase)",
    )
    p.add_argument("--iterations", type=int, default=4)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--importance", choices=IMPORTANCE_CHOICES, default="none")
    p.add_argument("--fraction", type=float, default=0.4,
                   help="importance fraction for filtered policies (default 0.4)")
    p.add_argument("--checker-threshold", type=int,
                   help="severe-disruption threshold (default: 10%% of initial edges)")
    p.add_argument("--checker-rules",
                   help="JSON rule file with forbidden transitions and threshold")
    p.add_argument("--initial-label", choices=[s.name.lower() for s in Stage])
    p.add_argument("--match", help="history file whose per-iteration counts a "
                                   "random baseline replays (required for --policy random)")
    p.add_argument("--out", required=True, help="history JSON output path")

    p = sub.add_parser("solve", help="solve a structural criterion")
    p.add_argument("--input", required=True)
    p.add_argument("--criterion", required=True,
                   choices=("clique", "independent-set", "max-degree", "k-hub", "mvc"))
    p.add_argument("--k", type=int)

    p = sub.add_parser("metrics", help="print density and assortativity")
    p.add_argument("--input", required=True)

    p = sub.add_parser("export-facts", help="emit the ground-fact document")
    p.add_argument("--input", required=True)
    p.add_argument("--model", help="include result/importance facts from this model")
    p.add_argument("--out", required=True)

    p = sub.add_parser("synth", help="generate synthetic connectomes")
    p.add_argument("--stage", required=True, choices=[s.name.lower() for s in Stage])
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True,
                   help="matrix file; a directory when --count is given")
    p.add_argument("--count", type=int, help="batch size (writes <stage>_<i>.txt files)")

    p = sub.add_parser("train", help="train a classifier on labeled matrices")
    p.add_argument("--data", required=True,
                   help="directory of matrices named <stage>_*.txt")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="checkpoint output path")
    p.add_argument("--epochs", type=int, default=TrainingConfig.max_epochs)
    p.add_argument("--batch-size", type=int, default=TrainingConfig.batch_size)
    p.add_argument("--learning-rate", type=float, default=TrainingConfig.learning_rate)
    p.add_argument("--patience", type=int, default=TrainingConfig.patience)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--port", type=int, required=True)
    p.add_argument("--static", help="directory of built UI assets to serve at /")
    p.add_argument("--models", help="directory of model checkpoints to preload")

    return parser


def _fail_usage(parser, message):
    parser.error(message)  # exits with code 2


def _policy_from_args(args, parser):
    structural = {
        "clique": Variant.MAX_CLIQUE,
        "independent-set": Variant.INDEPENDENT_SET,
        "max-degree": Variant.MAX_DEGREE_NODE,
        "k-hub": Variant.K_HUB,
        "mvc": Variant.MIN_VERTEX_COVER,
    }
    if args.k is not None and args.policy != "k-hub":
        _fail_usage(parser, "--k applies to --policy k-hub only")
    if args.match and args.policy != "random":
        _fail_usage(parser, "--match applies to --policy random only")
    if args.direction and args.policy not in ("density", "assortativity"):
        _fail_usage(parser, "--direction applies to metric policies only")
    if args.policy in structural:
        if args.policy == "k-hub" and args.k is None:
            _fail_usage(parser, "--policy k-hub requires --k")
        if args.importance in ("prefer-important", "prefer-unimportant"):
            _fail_usage(parser, "prefer-* biases apply to metric policies only")
        filt = ImportanceFilter(args.importance)
        criterion = StructuralCriterion(
            structural[args.policy],
            k=args.k if args.policy == "k-hub" else None,
            importance_filter=filt,
        )
        return engine.StructuralPolicy(criterion, fraction=args.fraction)
    if args.policy in ("density", "assortativity"):
        if args.importance in ("only-important", "only-unimportant"):
            _fail_usage(parser, "only-* filters apply to structural policies only")
        bias = ImportanceBias(args.importance)
        direction = args.direction or ("decrease" if args.policy == "density" else "increase")
        target = MetricTarget(
            metric=args.policy,
            direction=Direction(direction),
            relative_change=args.relative_change,
            importance_bias=bias,
        )
        return engine.MetricPolicy(target)
    # random baseline
    if not args.match:
        _fail_usage(parser, "--policy random requires --match <history file>")
    from .interop import load_history

    return engine.paired_baseline_policy(load_history(args.match))


def _cmd_classify(args) -> int:
    g = load_matrix(args.input)
    params = load_model(args.model)
    clf = NeuralStageClassifier(params)
    probs = clf.classify(g)
    for stage in Stage:
        print(f"{stage.name} {probs.of(stage):.6f}")
    print(f"predicted: {probs.argmax().name}")
    if args.importance_out:
        imp = clf.edge_importance(g)
        rows = (" ".join(repr(float(v)) for v in row) for row in imp.values)
        Path(args.importance_out).write_text("\n".join(rows) + "\n")
    return 0


def _cmd_evolve(args, parser) -> int:
    g = load_matrix(args.input)
    clf = NeuralStageClassifier(load_model(args.model))
    policy = _policy_from_args(args, parser)
    if args.checker_rules:
        cfg = validity.load_rules(args.checker_rules)
        if args.checker_threshold is not None:
            cfg = cfg.with_threshold(args.checker_threshold)
    else:
        cfg = validity.CheckerConfig(args.checker_threshold)
    label = Stage.from_name(args.initial_label) if args.initial_label else None
    iterations = args.iterations
    if isinstance(policy, engine.RandomBaselinePolicy):
        # a replay cannot run past the matched history
        iterations = min(iterations, max(len(policy.counts), 1))
    history = engine.run(
        g,
        policy,
        clf,
        engine.MaxIterations(iterations),
        checker_cfg=cfg,
        percent=args.p,
        seed=args.seed,
        initial_label=label,
        importance_fraction=args.fraction,
    )
    save_history(history, args.out)
    outcome = history.outcome
    print(f"outcome: {outcome.kind.value}"
          + (f" at iteration {outcome.abort_index} ({outcome.reason})"
             if outcome.abort_index is not None else ""))
    print(f"records: {len(history.records)} -> {args.out}")
    return 0


def _cmd_solve(args, parser) -> int:
    g = load_matrix(args.input)
    variants = {
        "clique": Variant.MAX_CLIQUE,
        "independent-set": Variant.INDEPENDENT_SET,
        "max-degree": Variant.MAX_DEGREE_NODE,
        "k-hub": Variant.K_HUB,
        "mvc": Variant.MIN_VERTEX_COVER,
    }
    if args.criterion == "k-hub" and args.k is None:
        _fail_usage(parser, "--criterion k-hub requires --k")
    criterion = StructuralCriterion(
        variants[args.criterion], k=args.k if args.criterion == "k-hub" else None
    )
    sol = solve(g, criterion)
    print(f"nodes: {' '.join(map(str, sol.sorted_nodes()))}")
    print(f"selection: {' '.join(f'{x}-{y}' for x, y in sol.sorted_selection())}")
    print(f"size: {sol.optimum_size}")
    return 0


def _cmd_metrics(args) -> int:
    g = load_matrix(args.input)
    print(f"density {density(g):.6f}")
    try:
        print(f"assortativity {assortativity(g):.6f}")
    except UndefinedMetricError:
        print("assortativity undefined")
    return 0


def _cmd_export_facts(args) -> int:
    g = load_matrix(args.input)
    extras = FactExtras()
    if args.model:
        params = load_model(args.model)
        clf = NeuralStageClassifier(params)
        probs = clf.classify(g)
        imp = clf.edge_importance(g)
        extras = FactExtras(importance=imp, result=probs)
    Path(args.out).write_text(emit_facts(g, extras))
    print(f"facts -> {args.out}")
    return 0


def _cmd_synth(args) -> int:
    stage = Stage.from_name(args.stage)
    spec = SyntheticSpec(stage=stage)
    if args.count is None:
        g, _ = generate_synthetic(spec, args.seed)
        save_matrix(g, args.out)
        print(f"{stage.name} connectome ({g.edge_count()} edges) -> {args.out}")
        return 0
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    for i in range(args.count):
        g, _ = generate_synthetic(spec, int(rng.integers(1 << 62)))
        save_matrix(g, out_dir / f"{stage.name.lower()}_{i:04d}.txt")
    print(f"{args.count} {stage.name} connectomes -> {out_dir}")
    return 0


def _cmd_train(args) -> int:
    data_dir = Path(args.data)
    dataset = []
    for path in sorted(data_dir.glob("*.txt")):
        prefix = path.stem.split("_")[0].upper()
        try:
            stage = Stage.from_name(prefix)
        except ConnectosimError:
            continue
        dataset.append((load_matrix(path), stage))
    if not dataset:
        raise ConnectosimError(
            f"no labeled matrices (<stage>_*.txt) found in {data_dir}"
        )
    cfg = TrainingConfig(
        seed=args.seed,
        max_epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        patience=args.patience,
    )
    params = train(dataset, cfg)
    save_model(params, args.out)
    print(f"trained on {len(dataset)} graphs -> {args.out}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(models_dir=args.models, static_dir=args.static)
    uvicorn.run(app, host="0.0.0.0", port=args.port, log_level="info")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "classify":
            return _cmd_classify(args)
        if args.command == "evolve":
            return _cmd_evolve(args, parser)
        if args.command == "solve":
            return _cmd_solve(args, parser)
        if args.command == "metrics":
            return _cmd_metrics(args)
        if args.command == "export-facts":
            return _cmd_export_facts(args)
        if args.command == "synth":
            return _cmd_synth(args)
        if args.command == "train":
            return _cmd_train(args)
        if args.command == "serve":
            return _cmd_serve(args)
        parser.error(f"unknown command {args.command!r}")
    except ConnectosimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
