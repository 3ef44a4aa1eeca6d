"""From-scratch CART regression trees, single- or multi-output.

Induction is greedy top-down: at each node the (option, threshold) pair
minimizing the size-weighted within-child variance is chosen, with target
columns min-max normalized per node so no output's scale dominates the
split.  Candidate thresholds are midpoints between consecutive distinct
option values; ties break toward the lowest option index, then the lowest
threshold, so fits are reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .base import ParamsMixin, as_float_matrix
from .dataspace import BINARY, OptionSchema


@dataclass
class LeafNode:
    prediction: np.ndarray
    n_samples: int


@dataclass
class SplitNode:
    option_index: int
    threshold: float
    left: "SplitNode | LeafNode"
    right: "SplitNode | LeafNode"


def _node_normalize(Y: np.ndarray) -> np.ndarray:
    low = Y.min(axis=0)
    span = Y.max(axis=0) - low
    safe = np.where(span > 0, span, 1.0)
    return np.where(span > 0, (Y - low) / safe, 0.0)


def _best_split(X: np.ndarray, Y: np.ndarray, min_leaf: int) -> tuple[float, int, float] | None:
    """Lowest-score (sum of child SSEs over node-normalized outputs) split,
    or None when no candidate respects min_leaf."""
    n = len(X)
    Yn = _node_normalize(Y)
    best: tuple[float, int, float] | None = None
    for j in range(X.shape[1]):
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        ys = Yn[order]
        cuts = np.flatnonzero(xs[1:] > xs[:-1]) + 1
        cuts = cuts[(cuts >= min_leaf) & (cuts <= n - min_leaf)]
        if cuts.size == 0:
            continue
        c1 = np.cumsum(ys, axis=0)
        c2 = np.cumsum(ys * ys, axis=0)
        left_n = cuts.astype(float)
        right_n = n - left_n
        sse_left = (c2[cuts - 1] - c1[cuts - 1] ** 2 / left_n[:, None]).clip(min=0).sum(axis=1)
        sse_right = (
            (c2[-1] - c2[cuts - 1]) - (c1[-1] - c1[cuts - 1]) ** 2 / right_n[:, None]
        ).clip(min=0).sum(axis=1)
        scores = sse_left + sse_right
        i = int(np.argmin(scores))  # first minimum -> lowest threshold
        threshold = (xs[cuts[i] - 1] + xs[cuts[i]]) / 2.0
        if not xs[cuts[i] - 1] <= threshold < xs[cuts[i]]:
            threshold = float(xs[cuts[i] - 1])  # float midpoint collapsed onto a neighbor
        if best is None or scores[i] < best[0]:
            best = (float(scores[i]), j, float(threshold))
    return best


class CartRegressor(ParamsMixin):
    """Binary regression tree with mean-per-output leaf predictions.

    Parameters mirror common CART knobs: ``max_depth`` (None = unbounded),
    ``min_split`` (smallest node that may still split) and ``min_leaf``
    (smallest child a split may produce).
    """

    def __init__(self, max_depth: int | None = None, min_split: int = 4, min_leaf: int = 2):
        self.max_depth = max_depth
        self.min_split = min_split
        self.min_leaf = min_leaf

    def fit(self, X: Sequence[Sequence[float]], y: Sequence[float]) -> "CartRegressor":
        X = as_float_matrix(X, "X")
        y_arr = np.asarray(y, dtype=float)
        if y_arr.size == 0:
            raise ValueError("y must be non-empty")
        self._single_output = y_arr.ndim == 1
        Y = y_arr.reshape(-1, 1) if self._single_output else y_arr
        if len(Y) != len(X):
            raise ValueError("X and y row counts differ")
        if self.min_leaf < 1 or self.min_split < 2:
            raise ValueError("min_leaf must be >= 1 and min_split >= 2")
        self.n_features_ = X.shape[1]
        self.n_outputs_ = Y.shape[1]
        self.root_ = self._grow(X, Y, depth=0)
        return self

    def _grow(self, X: np.ndarray, Y: np.ndarray, depth: int) -> SplitNode | LeafNode:
        n = len(X)
        if (
            n < self.min_split
            or (self.max_depth is not None and depth >= self.max_depth)
            or bool((Y == Y[0]).all())
        ):
            return LeafNode(Y.mean(axis=0), n)
        best = _best_split(X, Y, self.min_leaf)
        if best is None:
            return LeafNode(Y.mean(axis=0), n)
        _, j, threshold = best
        mask = X[:, j] <= threshold
        return SplitNode(
            j,
            threshold,
            self._grow(X[mask], Y[mask], depth + 1),
            self._grow(X[~mask], Y[~mask], depth + 1),
        )

    def _check_fitted(self) -> None:
        if not hasattr(self, "root_"):
            raise RuntimeError("this CartRegressor is not fitted yet")

    def predict(self, X: Sequence[Sequence[float]]) -> np.ndarray:
        """Predict for a batch; output shape matches the fitted target
        (``(n,)`` for single-output trees, ``(n, m)`` otherwise)."""
        self._check_fitted()
        X = as_float_matrix(X, "X")
        if X.shape[1] != self.n_features_:
            raise ValueError(f"X has {X.shape[1]} options, tree was fit on {self.n_features_}")
        out = np.empty((len(X), self.n_outputs_))
        self._predict_into(self.root_, X, np.arange(len(X)), out)
        return out[:, 0] if self._single_output else out

    def predict_one(self, config: Sequence[float]) -> np.ndarray:
        """Walk a single configuration root to leaf; returns the leaf mean."""
        self._check_fitted()
        x = np.asarray(config, dtype=float)
        if x.ndim != 1 or len(x) != self.n_features_:
            raise ValueError(f"expected a configuration of {self.n_features_} options")
        node = self.root_
        while isinstance(node, SplitNode):
            node = node.left if x[node.option_index] <= node.threshold else node.right
        return node.prediction.copy()

    def _predict_into(
        self, node: SplitNode | LeafNode, X: np.ndarray, idx: np.ndarray, out: np.ndarray
    ) -> None:
        if isinstance(node, LeafNode):
            out[idx] = node.prediction
            return
        mask = X[idx, node.option_index] <= node.threshold
        self._predict_into(node.left, X, idx[mask], out)
        self._predict_into(node.right, X, idx[~mask], out)

    @property
    def depth_(self) -> int:
        self._check_fitted()

        def walk(node: SplitNode | LeafNode) -> int:
            if isinstance(node, LeafNode):
                return 0
            return 1 + max(walk(node.left), walk(node.right))

        return walk(self.root_)

    @property
    def n_leaves_(self) -> int:
        self._check_fitted()

        def walk(node: SplitNode | LeafNode) -> int:
            if isinstance(node, LeafNode):
                return 1
            return walk(node.left) + walk(node.right)

        return walk(self.root_)

    # -- persistence ----------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        self._check_fitted()

        def encode(node: SplitNode | LeafNode) -> dict[str, Any]:
            if isinstance(node, LeafNode):
                return {"leaf": {"prediction": node.prediction.tolist(), "n_samples": node.n_samples}}
            return {
                "split": {
                    "option": node.option_index,
                    "threshold": node.threshold,
                    "left": encode(node.left),
                    "right": encode(node.right),
                }
            }

        return {
            "params": self.get_params(),
            "n_features": self.n_features_,
            "n_outputs": self.n_outputs_,
            "single_output": self._single_output,
            "root": encode(self.root_),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "CartRegressor":
        def decode(node: dict[str, Any]) -> SplitNode | LeafNode:
            if "leaf" in node:
                leaf = node["leaf"]
                return LeafNode(np.asarray(leaf["prediction"], dtype=float), int(leaf["n_samples"]))
            split = node["split"]
            return SplitNode(
                int(split["option"]),
                float(split["threshold"]),
                decode(split["left"]),
                decode(split["right"]),
            )

        tree = cls(**data["params"])
        tree.n_features_ = int(data["n_features"])
        tree.n_outputs_ = int(data["n_outputs"])
        tree._single_output = bool(data["single_output"])
        tree.root_ = decode(data["root"])
        return tree

    def to_text(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_text(cls, text: str) -> "CartRegressor":
        return cls.from_dict(json.loads(text))


def render_tree(tree: CartRegressor, options: Sequence[OptionSchema] | None = None) -> str:
    """Human-readable nested view with option names, thresholds, leaf means."""
    names = _option_names(tree, options)

    def walk(node: SplitNode | LeafNode, indent: int) -> list[str]:
        pad = "  " * indent
        if isinstance(node, LeafNode):
            mean = ", ".join(f"{v:.6g}" for v in node.prediction)
            return [f"{pad}leaf: [{mean}] (n={node.n_samples})"]
        lines = [f"{pad}if {names[node.option_index]} <= {node.threshold:.6g}:"]
        lines += walk(node.left, indent + 1)
        lines.append(f"{pad}else:")
        lines += walk(node.right, indent + 1)
        return lines

    return "\n".join(walk(tree.root_, 0))


# -- rule extraction ------------------------------------------------------


@dataclass(frozen=True)
class Condition:
    """One clause of a decision path: ``option <op> threshold``.

    Binary options are asserted as equalities (op ``==`` with threshold
    1.0 for True, 0.0 for False).
    """

    option: str
    op: str
    threshold: float

    def __str__(self) -> str:
        if self.op == "==":
            return f"{self.option} = {self.threshold >= 0.5}"
        return f"{self.option} {self.op} {self.threshold:.6g}"


@dataclass
class Rule:
    """A conjunction of conditions leading to a leaf, plus what it predicts."""

    conditions: list[Condition]
    prediction: np.ndarray
    n_samples: int
    score: float

    def __str__(self) -> str:
        clause = " and ".join(str(c) for c in self.conditions) if self.conditions else "(always)"
        mean = ", ".join(f"{v:.6g}" for v in np.atleast_1d(self.prediction))
        return f"{clause} -> [{mean}]"


def _option_names(tree: CartRegressor, options: Sequence[OptionSchema] | None) -> list[str]:
    if options is None:
        return [f"x{i}" for i in range(tree.n_features_)]
    if len(options) != tree.n_features_:
        raise ValueError("option schema count does not match the tree")
    return [o.name for o in options]


def _simplify_path(
    path: list[tuple[int, str, float]],
    names: list[str],
    options: Sequence[OptionSchema] | None,
) -> list[Condition]:
    upper: dict[int, float] = {}
    lower: dict[int, float] = {}
    for j, op, thr in path:
        if op == "<=":
            upper[j] = min(upper.get(j, thr), thr)
        else:
            lower[j] = max(lower.get(j, thr), thr)
    conditions: list[Condition] = []
    for j in sorted(set(upper) | set(lower)):
        is_binary = options is not None and options[j].kind == BINARY
        if j in lower:
            if is_binary:
                conditions.append(Condition(names[j], "==", 1.0))
            else:
                conditions.append(Condition(names[j], ">", lower[j]))
        if j in upper:
            if is_binary:
                conditions.append(Condition(names[j], "==", 0.0))
            else:
                conditions.append(Condition(names[j], "<=", upper[j]))
    return conditions


def extract_rules(
    tree: CartRegressor,
    top_k: int,
    options: Sequence[OptionSchema] | None = None,
    output: int | None = None,
) -> list[Rule]:
    """Decision paths to the ``top_k`` best (lowest-predicting) leaves.

    Paths are simplified so each option keeps only its tightest bound per
    side.  For multi-output trees ``output`` selects which output orders
    the leaves; by default outputs are averaged.
    """
    tree._check_fitted()
    names = _option_names(tree, options)
    leaves: list[tuple[float, list[tuple[int, str, float]], LeafNode]] = []

    def walk(node: SplitNode | LeafNode, path: list[tuple[int, str, float]]) -> None:
        if isinstance(node, LeafNode):
            if output is None:
                score = float(node.prediction.mean())
            else:
                score = float(node.prediction[output])
            leaves.append((score, list(path), node))
            return
        walk(node.left, path + [(node.option_index, "<=", node.threshold)])
        walk(node.right, path + [(node.option_index, ">", node.threshold)])

    walk(tree.root_, [])
    leaves.sort(key=lambda item: item[0])
    rules = []
    for score, path, leaf in leaves[: max(top_k, 0)]:
        rules.append(Rule(_simplify_path(path, names, options), leaf.prediction.copy(), leaf.n_samples, score))
    return rules
