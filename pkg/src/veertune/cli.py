"""Command-line interface: generate landscapes, run the evaluation rig,
aggregate records, and inspect saved optimizer states."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from .analysis import detect_conflicts, model_disagreement, render_conflicts
from .cart import extract_rules
from .dataspace import (
    ObjectiveSchema,
    OptionSchema,
    apply_minmax,
    load_dataset,
    minmax_bounds,
    save_dataset,
    split_holdout,
)
from .experiment import (
    ExperimentConfig,
    aggregate,
    load_state,
    read_records,
    run_experiment,
    timing_ratio,
    write_aggregate,
)
from .optimize import VARIANTS, SmboOptimizer
from .pareto import generational_distance, non_dominated_front
from .synth import LandscapeSpec, concave_front_space, generate


def _add_optimizer_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--initial-samples", type=int, default=20)
    parser.add_argument("--budget", type=int, default=10)
    parser.add_argument("--max-depth", type=int, default=None)
    parser.add_argument("--min-split", type=int, default=4)
    parser.add_argument("--min-leaf", type=int, default=2)
    parser.add_argument("--n-unlabeled", type=int, default=None)
    parser.add_argument("--weights", type=str, default=None, help="comma-separated objective weights")


def _parse_weights(text: str | None) -> tuple[float, ...] | None:
    if text is None:
        return None
    return tuple(float(tok) for tok in text.split(","))


def _cmd_synth(args: argparse.Namespace) -> int:
    if args.concave:
        space = concave_front_space(n_rows=args.rows, seed=args.seed, noise=args.noise)
    else:
        spec = LandscapeSpec(
            n_binary=args.binary,
            n_numeric=args.numeric,
            n_rows=args.rows,
            n_objectives=args.objectives,
            correlation=args.correlation,
            noise=args.noise,
            seed=args.seed,
        )
        space = generate(spec)
    save_dataset(space, args.csv, args.manifest)
    print(f"wrote {space.n_rows} rows x ({space.n_options} options + {space.n_objectives} objectives)")
    print(f"dataset: {args.csv}\nmanifest: {args.manifest}")
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = ExperimentConfig(
        dataset=args.dataset,
        manifest=args.manifest,
        variants=tuple(args.variants.split(",")),
        repeats=args.repeats,
        split_fraction=args.split,
        base_seed=args.seed,
        initial_samples=args.initial_samples,
        budget=args.budget,
        max_depth=args.max_depth,
        min_split=args.min_split,
        min_leaf=args.min_leaf,
        n_unlabeled=args.n_unlabeled,
        weights=_parse_weights(args.weights),
        output_dir=args.out,
        save_states=args.save_states,
    )
    records = run_experiment(cfg)
    print(f"wrote {len(records)} records to {Path(args.out) / 'records.csv'}")
    return 0


def _cmd_aggregate(args: argparse.Namespace) -> int:
    records = read_records(args.records)
    result = aggregate(records, delta_threshold=args.delta)
    write_aggregate(result, args.out)
    for variant, medians in sorted(result.medians.items()):
        flag = "  [worst gd]" if variant in result.flagged_worst else ""
        print(
            f"{variant:13s} gd={medians['gd']:.4f} tau={medians['tau']:.2f} "
            f"apply={medians['holdout_apply_time']:.5f}s{flag}"
        )
    try:
        for variant, ratio in sorted(timing_ratio(records).items()):
            print(f"{variant:13s} speedup vs flash: {ratio:.1f}x")
    except ValueError:
        pass
    print(f"wrote medians.csv and sk_ranks.csv to {args.out}")
    return 0


def _restore(state: dict) -> tuple[SmboOptimizer, dict]:
    return SmboOptimizer.from_dict(state["optimizer"]), state


def _cmd_evaluate(args: argparse.Namespace) -> int:
    state = load_state(args.state)
    opt, state = _restore(state)
    space = load_dataset(args.dataset, args.manifest)
    if space.n_rows != state["dataset"]["n_rows"]:
        raise SystemExit("dataset row count does not match the saved state")
    _, holdout = split_holdout(space, state["split"]["fraction"], state["split"]["seed"])
    low, high = minmax_bounds(space.Y, holdout)
    front_ids = holdout[non_dominated_front(space.Y[holdout])]

    start = time.perf_counter()
    rows = opt.select_rows(space, holdout)
    elapsed = time.perf_counter() - start
    solution = opt.finalize(space, rows)
    gd = generational_distance(
        apply_minmax(solution.perf, low, high), apply_minmax(space.Y[front_ids], low, high)
    )
    tau = model_disagreement(opt, space, holdout).tau
    print(f"variant:        {opt.variant}")
    print(f"measurements:   {opt.measurements_}")
    print(f"gd:             {gd:.6f}")
    print(f"tau:            {'undefined' if tau is None else f'{tau:.4f}'}")
    print(f"apply time:     {elapsed:.5f}s")
    print(f"solutions:      {len(solution.row_ids)} rows")
    return 0


def _cmd_explain(args: argparse.Namespace) -> int:
    state = load_state(args.state)
    opt, state = _restore(state)
    options = [
        OptionSchema(o["name"], o["kind"], tuple(o["domain"])) for o in state["dataset"]["options"]
    ]
    objectives = [ObjectiveSchema(o["name"], o["direction"]) for o in state["dataset"]["objectives"]]

    def label(obj: ObjectiveSchema) -> str:
        return f"{'minimize' if obj.direction == 'min' else 'maximize'} {obj.name}"

    rule_sets = []
    if opt.variant in ("flash", "veer"):
        for k, tree in enumerate(opt.surrogates_):
            rules = extract_rules(tree, args.top_k, options)
            rule_sets.append((label(objectives[k]), rules))
    elif opt.variant == "multi_out":
        for k in range(len(objectives)):
            rules = extract_rules(opt.surrogates_[0], args.top_k, options, output=k)
            rule_sets.append((label(objectives[k]), rules))
    else:
        rules = extract_rules(opt.surrogates_[0], args.top_k, options)
        rule_sets.append(("weighted objective sum", rules))

    lines = []
    for name, rules in rule_sets:
        lines.append(f"== best rules for {name} ==")
        lines.extend(f"  {rule}" for rule in rules)
        lines.append("")
    if opt.variant == "veer" and opt.rank_model_ is not None:
        lines.append("== final interpretation (overall dominance rank model) ==")
        lines.extend(f"  {rule}" for rule in extract_rules(opt.rank_model_, args.top_k, options))
        lines.append("")

    conflict_text = []
    for i in range(len(rule_sets)):
        for j in range(i + 1, len(rule_sets)):
            name_i, rules_i = rule_sets[i]
            name_j, rules_j = rule_sets[j]
            conflicts = detect_conflicts(rules_i, rules_j, (name_i, name_j))
            conflict_text.append(render_conflicts(conflicts))
    report = "\n".join(lines + conflict_text)
    print(report)
    if args.out is not None:
        Path(args.out).write_text(report)
        print(f"wrote conflict report to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="veertune")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset CSV + manifest")
    p.add_argument("--binary", type=int, default=0)
    p.add_argument("--numeric", type=int, default=5)
    p.add_argument("--rows", type=int, default=1000)
    p.add_argument("--objectives", type=int, default=2)
    p.add_argument("--correlation", type=float, default=0.0)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--concave", action="store_true", help="circle-arc front benchmark instead")
    p.add_argument("--csv", required=True)
    p.add_argument("--manifest", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("run", help="run the evaluation rig over a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--variants", default=",".join(VARIANTS))
    p.add_argument("--repeats", type=int, default=20)
    p.add_argument("--split", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--save-states", action="store_true")
    _add_optimizer_args(p)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("aggregate", help="medians + Scott-Knott ranks from records.csv")
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--delta", type=float, default=0.147)
    p.set_defaults(func=_cmd_aggregate)

    p = sub.add_parser("evaluate", help="recompute metrics for a saved optimizer state")
    p.add_argument("--state", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--manifest", required=True)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("explain", help="rules and conflict report for a saved state")
    p.add_argument("--state", required=True)
    p.add_argument("--top-k", type=int, default=3)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_explain)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
