"""Evaluation rig: split, run every variant over repeated seeds, time the
holdout application in isolation, score solutions by generational distance
against the brute-force true front, and aggregate across runs."""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .analysis import SKGroup, model_disagreement, scott_knott
from .dataspace import (
    ConfigSpace,
    ObjectiveSchema,
    apply_minmax,
    load_dataset,
    minmax_bounds,
    split_holdout,
)
from .optimize import SmboOptimizer
from .pareto import COMPARISONS, generational_distance, non_dominated_front
from .synth import LandscapeSpec, generate

logger = logging.getLogger(__name__)

RECORD_FIELDS = (
    "variant",
    "seed",
    "gd",
    "tau",
    "measurements",
    "n_solutions",
    "holdout_apply_time",
    "dominance_comparisons",
    "solution_ids",
)

# Columns that vary between otherwise identical runs.
TIMING_FIELDS = ("holdout_apply_time",)


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: ConfigSpace | LandscapeSpec | str | Path
    manifest: str | Path | Sequence[ObjectiveSchema] | None = None
    variants: tuple[str, ...] = ("flash", "single_weight", "multi_out", "veer")
    repeats: int = 20
    split_fraction: float = 0.5
    base_seed: int = 0
    initial_samples: int = 20
    budget: int = 10
    max_depth: int | None = None
    min_split: int = 4
    min_leaf: int = 2
    n_unlabeled: int | None = None
    weights: tuple[float, ...] | None = None
    output_dir: str | Path | None = None
    save_states: bool = False

    def __post_init__(self) -> None:
        if self.repeats < 1:
            raise ValueError("repeats must be at least 1")


@dataclass
class RunRecord:
    variant: str
    seed: int
    gd: float
    tau: float | None
    measurements: int
    n_solutions: int
    holdout_apply_time: float
    dominance_comparisons: int
    solution_ids: tuple[int, ...]


def resolve_space(
    dataset: ConfigSpace | LandscapeSpec | str | Path,
    manifest: str | Path | Sequence[ObjectiveSchema] | None = None,
) -> ConfigSpace:
    if isinstance(dataset, ConfigSpace):
        return dataset
    if isinstance(dataset, LandscapeSpec):
        return generate(dataset)
    if manifest is None:
        raise ValueError("a manifest is required when loading a dataset from disk")
    return load_dataset(dataset, manifest)


def _optimizer(cfg: ExperimentConfig, variant: str, seed: int) -> SmboOptimizer:
    return SmboOptimizer(
        variant=variant,
        initial_samples=cfg.initial_samples,
        budget=cfg.budget,
        max_depth=cfg.max_depth,
        min_split=cfg.min_split,
        min_leaf=cfg.min_leaf,
        n_unlabeled=cfg.n_unlabeled,
        weights=cfg.weights,
        seed=seed,
    )


def run_experiment(cfg: ExperimentConfig) -> list[RunRecord]:
    """Run every (repeat, variant) cell and return one record per run.

    Repeat ``i`` uses seed ``base_seed + i`` for both the holdout split and
    the optimizer.  Holdout application is timed on its own, after the
    true front is already computed, and its dominance-comparison count is
    snapshotted before solutions are reduced for reporting.  Records are
    bit-reproducible from the config apart from the timing column.
    """
    space = resolve_space(cfg.dataset, cfg.manifest)
    records: list[RunRecord] = []
    out_dir = Path(cfg.output_dir) if cfg.output_dir is not None else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)

    for repeat in range(cfg.repeats):
        seed = cfg.base_seed + repeat
        pool, holdout = split_holdout(space, cfg.split_fraction, seed)
        low, high = minmax_bounds(space.Y, holdout)
        front_ids = holdout[non_dominated_front(space.Y[holdout])]
        front = apply_minmax(space.Y[front_ids], low, high)

        for variant in cfg.variants:
            opt = _optimizer(cfg, variant, seed)
            opt.fit(space, pool)

            COMPARISONS.reset()
            start = time.perf_counter()
            rows = opt.select_rows(space, holdout)
            elapsed = time.perf_counter() - start
            comparisons = COMPARISONS.count

            solution = opt.finalize(space, rows)
            gd = generational_distance(apply_minmax(solution.perf, low, high), front)
            tau = model_disagreement(opt, space, holdout).tau
            record = RunRecord(
                variant=variant,
                seed=seed,
                gd=gd,
                tau=tau,
                measurements=opt.measurements_,
                n_solutions=len(solution.row_ids),
                holdout_apply_time=elapsed,
                dominance_comparisons=comparisons,
                solution_ids=tuple(solution.row_ids),
            )
            records.append(record)
            logger.info(
                "repeat %d %s: gd=%.4f tau=%s measurements=%d apply=%.4fs",
                repeat, variant, gd, "n/a" if tau is None else f"{tau:.2f}",
                opt.measurements_, elapsed,
            )
            if out_dir is not None and cfg.save_states:
                _save_state(out_dir / f"state_{variant}_seed{seed}.json", opt, cfg, seed, space)

    if out_dir is not None:
        write_records(out_dir / "records.csv", records)
    return records


def _save_state(
    path: Path, opt: SmboOptimizer, cfg: ExperimentConfig, seed: int, space: ConfigSpace
) -> None:
    payload = {
        "optimizer": opt.to_dict(),
        "split": {"fraction": cfg.split_fraction, "seed": seed},
        "dataset": {
            "n_rows": space.n_rows,
            "options": [
                {"name": o.name, "kind": o.kind, "domain": list(o.domain)} for o in space.options
            ],
            "objectives": [{"name": o.name, "direction": o.direction} for o in space.objectives],
        },
    }
    path.write_text(json.dumps(payload, indent=2, sort_keys=True))


def load_state(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())


# -- records IO ---------------------------------------------------------------


def write_records(path: str | Path, records: Sequence[RunRecord]) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RECORD_FIELDS)
        for r in records:
            writer.writerow(
                [
                    r.variant,
                    r.seed,
                    str(float(r.gd)),
                    "" if r.tau is None else str(float(r.tau)),
                    r.measurements,
                    r.n_solutions,
                    str(float(r.holdout_apply_time)),
                    r.dominance_comparisons,
                    ";".join(str(i) for i in r.solution_ids),
                ]
            )


def read_records(path: str | Path) -> list[RunRecord]:
    records = []
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            records.append(
                RunRecord(
                    variant=row["variant"],
                    seed=int(row["seed"]),
                    gd=float(row["gd"]),
                    tau=None if row["tau"] == "" else float(row["tau"]),
                    measurements=int(row["measurements"]),
                    n_solutions=int(row["n_solutions"]),
                    holdout_apply_time=float(row["holdout_apply_time"]),
                    dominance_comparisons=int(row["dominance_comparisons"]),
                    solution_ids=tuple(
                        int(i) for i in row["solution_ids"].split(";") if i != ""
                    ),
                )
            )
    return records


# -- aggregation ----------------------------------------------------------------

METRICS = ("gd", "tau", "holdout_apply_time")


@dataclass
class AggregateResult:
    medians: dict[str, dict[str, float]]
    groups: dict[str, list[SKGroup]]
    flagged_worst: list[str] = field(default_factory=list)


def timing_ratio(records: Sequence[RunRecord]) -> dict[str, float]:
    """Mean flash holdout-apply time divided by each variant's mean (so
    higher is better and flash itself is exactly 1.0)."""
    times: dict[str, list[float]] = {}
    for r in records:
        times.setdefault(r.variant, []).append(r.holdout_apply_time)
    if "flash" not in times:
        raise ValueError("timing_ratio needs flash records as the baseline")
    flash_mean = float(np.mean(times["flash"]))
    return {variant: flash_mean / float(np.mean(ts)) for variant, ts in times.items()}


def aggregate(records: Sequence[RunRecord], delta_threshold: float = 0.147) -> AggregateResult:
    """Per-metric medians and Scott-Knott ranks across variants; variants
    in the strictly worst generational-distance rank group are flagged."""
    by_variant: dict[str, list[RunRecord]] = {}
    for r in records:
        by_variant.setdefault(r.variant, []).append(r)

    medians: dict[str, dict[str, float]] = {}
    groups: dict[str, list[SKGroup]] = {}
    for metric in METRICS:
        treatments: dict[str, list[float]] = {}
        for variant, recs in by_variant.items():
            values = [getattr(r, metric) for r in recs]
            values = [v for v in values if v is not None]
            if len(values) < 2:
                raise ValueError(f"variant {variant!r} has fewer than 2 {metric} samples")
            treatments[variant] = values
        groups[metric] = scott_knott(treatments, delta_threshold)
        for variant, values in treatments.items():
            medians.setdefault(variant, {})[metric] = float(np.median(values))

    gd_groups = groups["gd"]
    worst_rank = max(g.rank for g in gd_groups)
    flagged = [g.treatment for g in gd_groups if g.rank == worst_rank] if worst_rank > 0 else []
    return AggregateResult(medians, groups, flagged)


def write_aggregate(result: AggregateResult, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "medians.csv").open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["variant", *METRICS])
        for variant in sorted(result.medians):
            row = [variant] + [str(result.medians[variant][m]) for m in METRICS]
            writer.writerow(row)
    with (out / "sk_ranks.csv").open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["metric", "variant", "rank", "median", "flagged_worst"])
        for metric, groups in result.groups.items():
            for g in groups:
                flagged = metric == "gd" and g.treatment in result.flagged_worst
                writer.writerow([metric, g.treatment, g.rank, str(g.median), str(flagged).lower()])
