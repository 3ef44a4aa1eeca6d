"""Multi-objective software configuration tuning with tree surrogates.

The library covers the full loop: load or synthesize an enumerated
configuration table, run sequential model-based optimization in four
variants (flash, single_weight, multi_out, veer), compress the objective
space into dominance ranks, and evaluate solution quality, model
disagreement, and holdout inference time across repeated seeded runs.
"""

from .analysis import (
    RuleConflict,
    SKGroup,
    TauReport,
    cliffs_delta,
    detect_conflicts,
    kendall_tau,
    model_disagreement,
    render_conflicts,
    scott_knott,
)
from .cart import CartRegressor, Condition, Rule, extract_rules, render_tree
from .dataspace import (
    ConfigSpace,
    ObjectiveSchema,
    OptionSchema,
    apply_minmax,
    load_dataset,
    minmax_bounds,
    minmax_normalize,
    read_manifest,
    save_dataset,
    split_holdout,
    write_manifest,
)
from .experiment import (
    AggregateResult,
    ExperimentConfig,
    RunRecord,
    aggregate,
    read_records,
    run_experiment,
    timing_ratio,
    write_records,
)
from .optimize import VARIANTS, SmboOptimizer, Solution
from .pareto import (
    COMPARISONS,
    binary_dominates,
    cdom_dominates,
    cdom_loss,
    generational_distance,
    nd_sort,
    non_dominated_front,
    zigzag_key,
    zigzag_rank,
)
from .synth import LandscapeSpec, concave_front_space, generate

__version__ = "0.1.0"

__all__ = [
    "AggregateResult",
    "COMPARISONS",
    "CartRegressor",
    "Condition",
    "ConfigSpace",
    "ExperimentConfig",
    "LandscapeSpec",
    "ObjectiveSchema",
    "OptionSchema",
    "Rule",
    "RuleConflict",
    "RunRecord",
    "SKGroup",
    "SmboOptimizer",
    "Solution",
    "TauReport",
    "VARIANTS",
    "aggregate",
    "apply_minmax",
    "binary_dominates",
    "cdom_dominates",
    "cdom_loss",
    "cliffs_delta",
    "concave_front_space",
    "detect_conflicts",
    "extract_rules",
    "generate",
    "generational_distance",
    "kendall_tau",
    "load_dataset",
    "minmax_bounds",
    "minmax_normalize",
    "model_disagreement",
    "nd_sort",
    "non_dominated_front",
    "read_manifest",
    "read_records",
    "render_conflicts",
    "render_tree",
    "run_experiment",
    "save_dataset",
    "scott_knott",
    "split_holdout",
    "timing_ratio",
    "write_manifest",
    "write_records",
    "zigzag_key",
    "zigzag_rank",
]
