"""Disagreement quantification (Kendall tau), rule-conflict detection, and
cross-run statistics (Scott-Knott splitting gated by Cliff's delta)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

import numpy as np

from .base import as_float_matrix
from .cart import Condition, Rule

if TYPE_CHECKING:  # pragma: no cover
    from .dataspace import ConfigSpace
    from .optimize import SmboOptimizer


@dataclass
class TauReport:
    """Kendall tau over row pairs: tau is None when every pair ties.

    ``n_pairs`` counts all row pairs, including the fully tied ones that
    are excluded from both the concordant and discordant tallies.
    """

    tau: float | None
    concordant: int
    discordant: int
    n_pairs: int


def kendall_tau(score_vectors: Sequence[Sequence[float]]) -> TauReport:
    """Multi-list Kendall tau: a row pair is concordant iff one row is
    strictly better in every score vector, and excluded only when the rows
    tie in every vector; all other pairs are discordant.

    With two vectors this reduces to the classic concordant/discordant
    definition; duplicated vectors can only produce concordant pairs, so
    single-output models score tau = 1 by construction.
    """
    scores = as_float_matrix(score_vectors, "score_vectors")
    k, n = scores.shape
    if k < 2:
        raise ValueError("kendall_tau needs at least 2 score vectors")
    if n < 2:
        raise ValueError("kendall_tau needs at least 2 rows")
    total = n * (n - 1) // 2

    if (scores == scores[0]).all():
        # Identical vectors: no pair can be discordant; count exact ties.
        _, counts = np.unique(scores[0], return_counts=True)
        ties = int((counts * (counts - 1) // 2).sum())
        concordant = total - ties
        discordant = 0
    else:
        concordant = 0
        ties = 0
        chunk = max(1, int(2**22 // max(n * k, 1)))
        for start in range(0, n, chunk):
            block = scores[:, start : start + chunk, None]
            rest = scores[:, None, :]
            better = (block < rest).all(axis=0) | (block > rest).all(axis=0)
            tied = (block == rest).all(axis=0)
            concordant += int(better.sum())
            ties += int(tied.sum()) - (min(start + chunk, n) - start)  # drop the diagonal
        concordant //= 2
        ties //= 2
        discordant = total - concordant - ties

    if concordant + discordant == 0:
        return TauReport(None, concordant, discordant, total)
    tau = (concordant - discordant) / (concordant + discordant)
    return TauReport(float(tau), concordant, discordant, total)


def model_disagreement(opt: "SmboOptimizer", space: "ConfigSpace", holdout: Iterable[int]) -> TauReport:
    """Kendall tau across the per-output holdout score vectors of a trained
    optimizer.  Variants with one output duplicate their single vector and
    therefore always agree with themselves (tau = 1), including the
    degenerate constant-prediction case where the raw tau would be 0/0: a
    single learner cannot disagree with itself."""
    scores = opt.objective_scores(space, holdout)
    report = kendall_tau(scores)
    if report.tau is None and bool((scores == scores[0]).all()):
        return TauReport(1.0, report.concordant, report.discordant, report.n_pairs)
    return report


# -- rule-level conflicts ---------------------------------------------------

_LOWER_OPS = {">", ">="}
_UPPER_OPS = {"<", "<="}


@dataclass
class RuleConflict:
    """Two rule conditions on one option pulling in opposite directions."""

    option: str
    direction_a: Condition
    direction_b: Condition
    objectives: tuple[str, str]

    def __str__(self) -> str:
        return f"{self.option}: [{self.direction_a}] vs [{self.direction_b}]"


def _assertions(rules: Sequence[Rule]) -> dict[str, list[tuple[str, Condition]]]:
    out: dict[str, list[tuple[str, Condition]]] = {}
    for rule in rules:
        for cond in rule.conditions:
            if cond.op == "==":
                direction = "true" if cond.threshold >= 0.5 else "false"
            elif cond.op in _LOWER_OPS:
                direction = "lower"
            elif cond.op in _UPPER_OPS:
                direction = "upper"
            else:
                raise ValueError(f"unknown condition operator {cond.op!r}")
            out.setdefault(cond.option, []).append((direction, cond))
    return out


_OPPOSITES = {("true", "false"), ("false", "true"), ("lower", "upper"), ("upper", "lower")}


def detect_conflicts(
    rules_a: Sequence[Rule],
    rules_b: Sequence[Rule],
    objectives: tuple[str, str] = ("model_a", "model_b"),
) -> list[RuleConflict]:
    """Options asserted in opposite optimizing directions by two rule sets.

    Binary options conflict when asserted True on one side and False on
    the other; numeric options conflict when one side gives a lower bound
    and the other an upper bound, even if the two ranges overlap.
    """
    asserts_a = _assertions(rules_a)
    asserts_b = _assertions(rules_b)
    conflicts: list[RuleConflict] = []
    for option in sorted(set(asserts_a) & set(asserts_b)):
        found = None
        for dir_a, cond_a in asserts_a[option]:
            for dir_b, cond_b in asserts_b[option]:
                if (dir_a, dir_b) in _OPPOSITES:
                    found = RuleConflict(option, cond_a, cond_b, objectives)
                    break
            if found:
                break
        if found:
            conflicts.append(found)
    return conflicts


def render_conflicts(conflicts: Sequence[RuleConflict]) -> str:
    """Aligned two-column text report, one row per conflicting option."""
    if not conflicts:
        return "no conflicting options\n"
    header_a, header_b = conflicts[0].objectives
    rows = [("option", header_a, header_b)]
    rows += [(c.option, str(c.direction_a), str(c.direction_b)) for c in conflicts]
    widths = [max(len(r[i]) for r in rows) for i in range(3)]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip() for row in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


# -- cross-run statistics ----------------------------------------------------


def cliffs_delta(a: Sequence[float], b: Sequence[float]) -> float:
    """(#{x > y} - #{x < y}) / (|a| * |b|) over all cross pairs."""
    xs = np.asarray(a, dtype=float)
    ys = np.asarray(b, dtype=float)
    if xs.size == 0 or ys.size == 0:
        raise ValueError("cliffs_delta needs two non-empty lists")
    more = int((xs[:, None] > ys[None, :]).sum())
    less = int((xs[:, None] < ys[None, :]).sum())
    return (more - less) / (xs.size * ys.size)


@dataclass
class SKGroup:
    """One treatment's Scott-Knott placement (rank 0 is the best medians)."""

    treatment: str
    rank: int
    median: float
    samples: list[float]


def _expected_delta(left: np.ndarray, right: np.ndarray) -> float:
    merged_mean = np.concatenate([left, right]).mean()
    n = left.size + right.size
    return (
        left.size / n * abs(left.mean() - merged_mean) ** 2
        + right.size / n * abs(right.mean() - merged_mean) ** 2
    )


def scott_knott(
    treatments: Mapping[str, Sequence[float]],
    delta_threshold: float = 0.147,
) -> list[SKGroup]:
    """Recursive median-ordered splitting of treatments into rank groups.

    Treatments are sorted by median, the boundary maximizing the expected
    difference of means is proposed, and the split is accepted only when
    the two sides differ by at least ``delta_threshold`` in absolute
    Cliff's delta (0.147 is the usual "small effect" cutoff).  Treatments
    left in one group share a rank; ranks are dense with 0 best.
    """
    if not treatments:
        raise ValueError("scott_knott needs at least one treatment")
    items = []
    for name, samples in treatments.items():
        arr = np.asarray(samples, dtype=float)
        if arr.size < 2:
            raise ValueError(f"treatment {name!r} needs at least 2 samples")
        items.append((name, arr))
    items.sort(key=lambda kv: (np.median(kv[1]), kv[0]))

    def split(block: list[tuple[str, np.ndarray]]) -> list[list[tuple[str, np.ndarray]]]:
        if len(block) == 1:
            return [block]
        pooled = [kv[1] for kv in block]
        best_i, best_score = None, -1.0
        for i in range(1, len(block)):
            left = np.concatenate(pooled[:i])
            right = np.concatenate(pooled[i:])
            score = _expected_delta(left, right)
            if score > best_score:
                best_i, best_score = i, score
        left = np.concatenate(pooled[:best_i])
        right = np.concatenate(pooled[best_i:])
        if abs(cliffs_delta(left, right)) < delta_threshold:
            return [block]
        return split(block[:best_i]) + split(block[best_i:])

    groups: list[SKGroup] = []
    for rank, block in enumerate(split(items)):
        for name, arr in block:
            groups.append(SKGroup(name, rank, float(np.median(arr)), arr.tolist()))
    return groups
