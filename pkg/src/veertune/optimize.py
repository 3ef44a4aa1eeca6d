"""Sequential model-based optimization over a pre-measured configuration
table, in four variants.

``flash`` fits one tree per objective and picks holdout solutions by
non-dominated sorting of the predictions.  ``multi_out`` swaps in a single
multi-output tree.  ``single_weight`` scalarizes objectives to a weighted
sum and fits one tree on it.  ``veer`` runs the flash loop, then distills
the surrogates into a single rank-predicting tree: it ranks the measured
rows together with surrogate-predicted (never measured) extra rows by
dominance strength and fits a tree on those ranks, so applying it to a
holdout needs no dominance sorting at all.

The acquisition loop keeps a budget of "lives": each iteration measures
the most promising unevaluated row, refits, and spends a life only when
the non-dominated archive fails to improve.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np

from .base import ParamsMixin, as_id_array
from .cart import CartRegressor
from .dataspace import ConfigSpace, apply_minmax, minmax_bounds
from .pareto import non_dominated_front, zigzag_key, zigzag_rank

VARIANTS = ("flash", "single_weight", "multi_out", "veer")


@dataclass
class Solution:
    """Rows an optimizer proposes, reduced to their mutually non-dominated
    subset under true objective values; ``perf`` is aligned with ``row_ids``."""

    row_ids: list[int]
    perf: np.ndarray


class SmboOptimizer(ParamsMixin):
    """Estimator-style wrapper around the optimization loop.

    ``fit(space, pool)`` runs the full loop on the pool rows (and, for
    ``veer``, trains the rank model afterwards); the fitted state lives in
    trailing-underscore attributes.  True objective values are only ever
    read through :meth:`_measure`, so ``measurements_`` is an exact audit
    of lookup cost.
    """

    def __init__(
        self,
        variant: str = "flash",
        initial_samples: int = 20,
        budget: int = 10,
        max_depth: int | None = None,
        min_split: int = 4,
        min_leaf: int = 2,
        n_unlabeled: int | None = None,
        weights: Sequence[float] | None = None,
        seed: int = 0,
    ):
        self.variant = variant
        self.initial_samples = initial_samples
        self.budget = budget
        self.max_depth = max_depth
        self.min_split = min_split
        self.min_leaf = min_leaf
        self.n_unlabeled = n_unlabeled
        self.weights = weights
        self.seed = seed

    # -- internals --------------------------------------------------------

    def _tree(self) -> CartRegressor:
        return CartRegressor(max_depth=self.max_depth, min_split=self.min_split, min_leaf=self.min_leaf)

    def _weight_vector(self, arity: int) -> np.ndarray:
        if self.weights is None:
            return np.ones(arity)
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or len(w) != arity:
            raise ValueError(f"weights must have one entry per objective ({arity})")
        if (w <= 0).any():
            raise ValueError("weights must be positive")
        return w

    def _measure(self, space: ConfigSpace, row_id: int) -> None:
        # The single gate to true performance values.
        self.measurements_ += 1
        self._measured[row_id] = np.array(space.Y[row_id])

    def _measured_matrix(self) -> np.ndarray:
        return np.array([self._measured[i] for i in self.evaluated_])

    def _refit(self, space: ConfigSpace) -> None:
        X = space.X[self.evaluated_]
        Ym = self._measured_matrix()
        if self.variant in ("flash", "veer"):
            self.surrogates_ = [self._tree().fit(X, Ym[:, k]) for k in range(Ym.shape[1])]
        elif self.variant == "multi_out":
            self.surrogates_ = [self._tree().fit(X, Ym)]
        elif self.variant == "single_weight":
            low, high = minmax_bounds(Ym)
            target = apply_minmax(Ym, low, high) @ self._weight_vector(Ym.shape[1])
            self.surrogates_ = [self._tree().fit(X, target)]
        else:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")

    def _update_archive(self) -> None:
        front = non_dominated_front(self._measured_matrix())
        self.archive_ = frozenset(self.evaluated_[i] for i in front)

    def _predict_objectives(self, X: np.ndarray) -> np.ndarray:
        if self.variant == "multi_out":
            return self.surrogates_[0].predict(X)
        return np.column_stack([tree.predict(X) for tree in self.surrogates_])

    def _check_fitted(self) -> None:
        if not hasattr(self, "surrogates_"):
            raise RuntimeError("this SmboOptimizer is not fitted yet")

    # -- training ----------------------------------------------------------

    def fit(self, space: ConfigSpace, pool: Iterable[int]) -> "SmboOptimizer":
        """Run the optimization loop over the pool rows."""
        pool_ids = as_id_array(pool, "pool")
        if pool_ids.min() < 0 or pool_ids.max() >= space.n_rows:
            raise ValueError("pool contains ids outside the space")
        if len(pool_ids) <= self.initial_samples:
            raise ValueError("pool must be larger than initial_samples")
        if self.budget < 1:
            raise ValueError("budget must be at least 1")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")

        self.evaluated_: list[int] = []
        self._measured: dict[int, np.ndarray] = {}
        self.measurements_ = 0
        self.improvement_log_: list[bool] = []
        self.rank_model_: CartRegressor | None = None

        rng = np.random.default_rng(self.seed)
        for row_id in rng.choice(pool_ids, size=self.initial_samples, replace=False):
            self._measure(space, int(row_id))
            self.evaluated_.append(int(row_id))
        self._refit(space)
        self._update_archive()

        in_pool = ~np.isin(pool_ids, self.evaluated_)
        lives = self.budget
        while lives > 0 and in_pool.any():
            row_id = self.acquire(space, pool_ids[in_pool])
            in_pool[np.searchsorted(pool_ids, row_id)] = False
            self._measure(space, row_id)
            self.evaluated_.append(row_id)
            self._refit(space)
            previous = self.archive_
            self._update_archive()
            improved = self.archive_ != previous
            self.improvement_log_.append(improved)
            if not improved:
                lives -= 1

        if self.variant == "veer":
            self.fit_rank_model(space, pool_ids)
        return self

    def acquire(self, space: ConfigSpace, candidates: Iterable[int]) -> int:
        """Most promising unevaluated row under the variant's selection rule;
        prediction ties break toward the lowest row id."""
        self._check_fitted()
        cands = as_id_array(candidates, "candidates")
        X = space.X[cands]
        if self.variant == "single_weight":
            scores = self.surrogates_[0].predict(X)
        elif self.variant == "veer" and self.rank_model_ is not None:
            scores = self.rank_model_.predict(X)
        else:
            predictions = self._predict_objectives(X)
            low, high = minmax_bounds(predictions)
            scores = zigzag_key(apply_minmax(predictions, low, high))
        return int(cands[np.argmin(scores)])

    def fit_rank_model(
        self,
        space: ConfigSpace,
        pool: Iterable[int],
        n_unlabeled: int | None = None,
    ) -> "SmboOptimizer":
        """Distill the per-objective surrogates into one rank model.

        Extra rows are drawn from the unevaluated pool and labeled with
        surrogate *predictions*, never with table lookups, so this step
        adds nothing to ``measurements_``.
        """
        if self.variant != "veer":
            raise ValueError("the rank model belongs to the veer variant")
        self._check_fitted()
        pool_ids = as_id_array(pool, "pool")
        remaining = np.setdiff1d(pool_ids, np.asarray(self.evaluated_, dtype=int))
        if n_unlabeled is None:
            n_unlabeled = self.n_unlabeled if self.n_unlabeled is not None else min(1000, len(remaining))
        if n_unlabeled > len(remaining):
            raise ValueError(f"n_unlabeled={n_unlabeled} exceeds the {len(remaining)} unevaluated pool rows")

        rng = np.random.default_rng([self.seed, 1])
        if n_unlabeled > 0:
            unlabeled = np.sort(rng.choice(remaining, size=n_unlabeled, replace=False))
            points = np.vstack([self._measured_matrix(), self._predict_objectives(space.X[unlabeled])])
            rows = self.evaluated_ + unlabeled.tolist()
        else:
            points = self._measured_matrix()
            rows = list(self.evaluated_)
        low, high = minmax_bounds(points)
        weights = None if self.weights is None else self._weight_vector(points.shape[1])
        ranks = zigzag_rank(apply_minmax(points, low, high), "continuous", weights)
        self.rank_model_ = self._tree().fit(space.X[rows], ranks.astype(float))
        return self

    # -- application --------------------------------------------------------

    def objective_scores(self, space: ConfigSpace, ids: Iterable[int]) -> np.ndarray:
        """One holdout score vector per learner output (single-output
        variants duplicate theirs), for disagreement measurement."""
        self._check_fitted()
        rows = as_id_array(ids, "ids")
        X = space.X[rows]
        if self.variant == "flash":
            return np.vstack([tree.predict(X) for tree in self.surrogates_])
        if self.variant == "multi_out":
            return self.surrogates_[0].predict(X).T
        if self.variant == "single_weight":
            scores = self.surrogates_[0].predict(X)
            return np.vstack([scores, scores])
        if self.rank_model_ is None:
            raise RuntimeError("veer optimizer has no rank model; call fit or fit_rank_model")
        scores = self.rank_model_.predict(X)
        return np.vstack([scores, scores])

    def select_rows(self, space: ConfigSpace, holdout: Iterable[int]) -> np.ndarray:
        """Apply the trained model to the holdout and return the rows it
        proposes.  This path reads predictions only; flash and multi_out
        pay the pairwise dominance sort here, veer and single_weight just
        take the argmin set of one predicted score."""
        self._check_fitted()
        ids = as_id_array(holdout, "holdout")
        X = space.X[ids]
        if self.variant in ("flash", "multi_out"):
            predictions = self._predict_objectives(X)
            return ids[non_dominated_front(predictions)]
        if self.variant == "single_weight":
            scores = self.surrogates_[0].predict(X)
            return ids[scores == scores.min()]
        if self.rank_model_ is None:
            raise RuntimeError("veer optimizer has no rank model; call fit or fit_rank_model")
        ranks = self.rank_model_.predict(X)
        return ids[ranks == ranks.min()]

    def finalize(self, space: ConfigSpace, rows: Iterable[int]) -> Solution:
        """Reduce proposed rows to their non-dominated subset under true
        values (reporting only; selection never reads true holdout data)."""
        ids = as_id_array(rows, "rows")
        keep = ids[non_dominated_front(space.Y[ids])]
        return Solution(keep.tolist(), np.array(space.Y[keep]))

    def final_solutions(self, space: ConfigSpace, holdout: Iterable[int]) -> Solution:
        return self.finalize(space, self.select_rows(space, holdout))

    # -- persistence ---------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        self._check_fitted()
        return {
            "params": self.get_params(),
            "evaluated": [int(i) for i in self.evaluated_],
            "measured": [self._measured[i].tolist() for i in self.evaluated_],
            "archive": sorted(int(i) for i in self.archive_),
            "measurements": int(self.measurements_),
            "improvement_log": [bool(b) for b in self.improvement_log_],
            "surrogates": [tree.to_dict() for tree in self.surrogates_],
            "rank_model": None if self.rank_model_ is None else self.rank_model_.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SmboOptimizer":
        params = dict(data["params"])
        if params.get("weights") is not None:
            params["weights"] = tuple(params["weights"])
        opt = cls(**params)
        opt.evaluated_ = [int(i) for i in data["evaluated"]]
        opt._measured = {
            i: np.asarray(y, dtype=float) for i, y in zip(opt.evaluated_, data["measured"])
        }
        opt.archive_ = frozenset(int(i) for i in data["archive"])
        opt.measurements_ = int(data["measurements"])
        opt.improvement_log_ = [bool(b) for b in data["improvement_log"]]
        opt.surrogates_ = [CartRegressor.from_dict(d) for d in data["surrogates"]]
        opt.rank_model_ = (
            None if data["rank_model"] is None else CartRegressor.from_dict(data["rank_model"])
        )
        return opt
