from __future__ import annotations

import json

import numpy as np
import pytest

from veertune.analysis import kendall_tau
from veertune.cart import CartRegressor
from veertune.dataspace import apply_minmax, minmax_bounds, split_holdout
from veertune.optimize import VARIANTS, SmboOptimizer
from veertune.pareto import COMPARISONS, generational_distance, zigzag_rank
from veertune.synth import LandscapeSpec, generate

from conftest import space_from_table


def brute_front_ids(space, ids):
    ids = sorted(ids)
    Y = space.Y[ids]
    keep = set()
    for i, a in enumerate(Y):
        if not any(((b <= a).all() and (b < a).any()) for j, b in enumerate(Y) if j != i):
            keep.add(ids[i])
    return keep


class OracleModel:
    """Duck-typed stand-in surrogate that predicts the true table values."""

    def __init__(self, space, column=None):
        self.space = space
        self.column = column

    def predict(self, X):
        # rows are identified by their full option vector
        lookup = {tuple(row): i for i, row in enumerate(self.space.X)}
        ids = [lookup[tuple(row)] for row in np.asarray(X)]
        if self.column is None:
            return np.array(self.space.Y[ids])
        return np.array(self.space.Y[ids, self.column])


@pytest.fixture(scope="module")
def small_space():
    return generate(LandscapeSpec(2, 3, 300, correlation=0.2, noise=0.05, seed=21))


class TestFitLoop:
    def test_budget_trace(self):
        # lives=1: an improving acquisition keeps the budget, the next
        # non-improving one spends it, so exactly 2 iterations happen.
        seed = 5
        initial = 3
        pool = np.arange(6)
        drawn = set(np.random.default_rng(seed).choice(pool, size=initial, replace=False).tolist())
        remaining = sorted(set(range(6)) - drawn)
        Y = np.zeros((6, 2))
        for rid in drawn:
            Y[rid] = (10.0 + rid, 20.0 - rid)  # seeds: mutually incomparable
        Y[remaining[0]] = (0.0, 0.0)  # dominates everything
        Y[remaining[1]] = (5.0, 5.0)
        Y[remaining[2]] = (6.0, 6.0)
        space = space_from_table(Y)

        opt = SmboOptimizer(variant="flash", initial_samples=initial, budget=1, seed=seed)
        opt.fit(space, pool)
        # 3 seeds < min_split: constant predictions, ties break to the lowest id
        assert opt.evaluated_[initial] == remaining[0]
        assert opt.improvement_log_ == [True, False]
        assert opt.measurements_ == initial + 2
        assert opt.archive_ == {remaining[0]}

    def test_pool_exhausted_evaluates_everything(self):
        space = space_from_table(np.arange(10, dtype=float).reshape(5, 2))
        opt = SmboOptimizer(initial_samples=2, budget=100, seed=0)
        opt.fit(space, range(5))
        assert sorted(opt.evaluated_) == [0, 1, 2, 3, 4]
        assert opt.measurements_ == 5

    def test_measurement_accounting(self, small_space):
        pool, _ = split_holdout(small_space, 0.5, 1)
        for variant in VARIANTS:
            opt = SmboOptimizer(variant=variant, initial_samples=10, budget=4, seed=2)
            opt.fit(small_space, pool)
            iterations = len(opt.improvement_log_)
            assert opt.measurements_ == 10 + iterations
            assert opt.measurements_ == len(opt.evaluated_)

    def test_archive_is_front_zero_of_evaluated(self, small_space):
        pool, _ = split_holdout(small_space, 0.5, 1)
        for variant in ("flash", "single_weight"):
            for seed in (0, 1, 2):
                opt = SmboOptimizer(variant=variant, initial_samples=8, budget=3, seed=seed)
                opt.fit(small_space, pool)
                assert opt.archive_ == brute_front_ids(small_space, opt.evaluated_)
                assert opt.archive_ <= set(opt.evaluated_)

    def test_archive_correct_after_every_iteration(self, small_space):
        space = small_space
        checks = []

        class Audited(SmboOptimizer):
            def _update_archive(self):
                super()._update_archive()
                checks.append(self.archive_ == brute_front_ids(space, self.evaluated_))

        pool, _ = split_holdout(space, 0.5, 1)
        Audited(variant="flash", initial_samples=8, budget=3, seed=5).fit(space, pool)
        assert len(checks) > 3 and all(checks)

    def test_determinism_across_runs(self, small_space):
        pool, holdout = split_holdout(small_space, 0.5, 3)
        for variant in VARIANTS:
            runs = []
            for _ in range(2):
                opt = SmboOptimizer(variant=variant, initial_samples=10, budget=3, seed=9)
                opt.fit(small_space, pool)
                sol = opt.final_solutions(small_space, holdout)
                runs.append((list(opt.evaluated_), set(opt.archive_), sol.row_ids))
            assert runs[0] == runs[1]

    def test_pool_too_small_rejected(self, small_space):
        with pytest.raises(ValueError, match="initial_samples"):
            SmboOptimizer(initial_samples=10).fit(small_space, range(10))

    def test_bad_budget_rejected(self, small_space):
        with pytest.raises(ValueError, match="budget"):
            SmboOptimizer(initial_samples=2, budget=0).fit(small_space, range(20))

    def test_unknown_variant_rejected(self, small_space):
        with pytest.raises(ValueError, match="variant"):
            SmboOptimizer(variant="nsga2", initial_samples=2).fit(small_space, range(20))

    def test_surrogate_arity_per_variant(self, small_space):
        pool, _ = split_holdout(small_space, 0.5, 1)
        shapes = {}
        for variant in VARIANTS:
            opt = SmboOptimizer(variant=variant, initial_samples=10, budget=2, seed=4)
            opt.fit(small_space, pool)
            shapes[variant] = (len(opt.surrogates_), opt.surrogates_[0].n_outputs_)
        assert shapes["flash"] == (2, 1)
        assert shapes["veer"] == (2, 1)
        assert shapes["multi_out"] == (1, 2)
        assert shapes["single_weight"] == (1, 1)


class TestAcquire:
    def make_opt(self, space, predictions):
        opt = SmboOptimizer(variant="flash")
        opt.evaluated_ = []
        opt.rank_model_ = None

        class Stub:
            def __init__(self, col):
                self.col = col

            def predict(inner, X):
                return np.array([predictions[int(x[0])][inner.col] for x in X])

        opt.surrogates_ = [Stub(0), Stub(1)]
        return opt

    def test_single_candidate(self, small_space):
        pool, _ = split_holdout(small_space, 0.5, 1)
        opt = SmboOptimizer(initial_samples=10, budget=2, seed=4).fit(small_space, pool)
        assert opt.acquire(small_space, [int(pool[0])]) == int(pool[0])

    def test_dominant_prediction_wins(self):
        space = space_from_table(np.zeros((10, 2)))
        predictions = {i: (0.9, 0.9) for i in range(10)}
        predictions[7] = (0.1, 0.1)
        opt = self.make_opt(space, predictions)
        assert opt.acquire(space, range(10)) == 7

    def test_tie_breaks_to_lowest_row_id(self):
        space = space_from_table(np.zeros((10, 2)))
        predictions = {i: (0.5, 0.5) for i in range(10)}
        opt = self.make_opt(space, predictions)
        assert opt.acquire(space, [4, 9, 6]) == 4

    def test_empty_pool_rejected(self, small_space):
        pool, _ = split_holdout(small_space, 0.5, 1)
        opt = SmboOptimizer(initial_samples=10, budget=2, seed=4).fit(small_space, pool)
        with pytest.raises(ValueError):
            opt.acquire(small_space, [])


class TestRankModel:
    def test_zero_unlabeled_uses_evaluated_only(self, small_space):
        pool, _ = split_holdout(small_space, 0.5, 2)
        opt = SmboOptimizer(variant="veer", initial_samples=10, budget=3, seed=1)
        opt.fit(small_space, pool)
        opt.fit_rank_model(small_space, pool, n_unlabeled=0)
        assert opt.rank_model_ is not None
        assert opt.rank_model_.predict(small_space.X[:5]).shape == (5,)

    def test_adds_zero_measurements(self, small_space):
        pool, _ = split_holdout(small_space, 0.5, 2)
        opt = SmboOptimizer(variant="veer", initial_samples=10, budget=3, seed=1)
        opt.fit(small_space, pool)
        before = opt.measurements_
        opt.fit_rank_model(small_space, pool, n_unlabeled=50)
        assert opt.measurements_ == before

    def test_unlabeled_budget_checked(self, small_space):
        pool, _ = split_holdout(small_space, 0.5, 2)
        opt = SmboOptimizer(variant="veer", initial_samples=10, budget=2, seed=1)
        opt.fit(small_space, pool)
        with pytest.raises(ValueError, match="exceeds"):
            opt.fit_rank_model(small_space, pool, n_unlabeled=10**6)

    def test_wrong_variant_rejected(self, small_space):
        pool, _ = split_holdout(small_space, 0.5, 2)
        opt = SmboOptimizer(variant="flash", initial_samples=10, budget=2, seed=1)
        opt.fit(small_space, pool)
        with pytest.raises(ValueError, match="veer"):
            opt.fit_rank_model(small_space, pool)

    def test_learns_monotone_landscape_exactly(self):
        # x alternates pool/holdout; y0 = y1 = x, so the true rank order is x
        n = 40
        Y = np.column_stack([np.arange(n, dtype=float), np.arange(n, dtype=float)])
        space = space_from_table(Y)
        pool = np.arange(0, n, 2)
        holdout = np.arange(1, n, 2)
        opt = SmboOptimizer(
            variant="veer", initial_samples=len(pool) - 1, budget=1,
            min_split=2, min_leaf=1, seed=3,
        )
        opt.fit(space, pool)
        assert sorted(opt.evaluated_) == pool.tolist()  # exhausted
        predicted = opt.rank_model_.predict(space.X[holdout])
        low, high = minmax_bounds(space.Y[holdout])
        truth = zigzag_rank(apply_minmax(space.Y[holdout], low, high), "continuous")
        report = kendall_tau([predicted, truth.astype(float)])
        assert report.tau == 1.0


class TestSelection:
    def test_single_row_holdout(self, small_space):
        pool, holdout = split_holdout(small_space, 0.5, 5)
        opt = SmboOptimizer(initial_samples=10, budget=2, seed=0).fit(small_space, pool)
        sol = opt.final_solutions(small_space, [int(holdout[0])])
        assert sol.row_ids == [int(holdout[0])]

    def test_constant_rank_model_returns_true_front(self, small_space):
        pool, holdout = split_holdout(small_space, 0.5, 5)
        opt = SmboOptimizer(variant="veer", initial_samples=10, budget=2, seed=0)
        opt.fit(small_space, pool)
        opt.rank_model_ = CartRegressor().fit(small_space.X[:8], np.zeros(8))
        rows = opt.select_rows(small_space, holdout)
        np.testing.assert_array_equal(rows, holdout)  # degenerate model keeps everything
        sol = opt.finalize(small_space, rows)
        assert set(sol.row_ids) == brute_front_ids(small_space, holdout.tolist())

    def test_oracle_surrogates_recover_true_front(self, small_space):
        pool, holdout = split_holdout(small_space, 0.5, 5)
        opt = SmboOptimizer(variant="flash", initial_samples=10, budget=2, seed=0)
        opt.fit(small_space, pool)
        opt.surrogates_ = [OracleModel(small_space, 0), OracleModel(small_space, 1)]
        sol = opt.final_solutions(small_space, holdout)
        assert set(sol.row_ids) == brute_front_ids(small_space, holdout.tolist())
        low, high = minmax_bounds(small_space.Y, holdout)
        front = apply_minmax(small_space.Y[sorted(brute_front_ids(small_space, holdout.tolist()))], low, high)
        assert generational_distance(apply_minmax(sol.perf, low, high), front) == 0.0

    def test_veer_selection_makes_zero_dominance_comparisons(self, small_space):
        pool, holdout = split_holdout(small_space, 0.5, 5)
        counts = {}
        for variant in ("veer", "flash"):
            opt = SmboOptimizer(variant=variant, initial_samples=10, budget=2, seed=0)
            opt.fit(small_space, pool)
            COMPARISONS.reset()
            opt.select_rows(small_space, holdout)
            counts[variant] = COMPARISONS.count
        assert counts["veer"] == 0
        assert counts["flash"] == len(holdout) * (len(holdout) - 1)

    def test_solution_is_internally_non_dominated(self, small_space):
        pool, holdout = split_holdout(small_space, 0.5, 5)
        for variant in VARIANTS:
            opt = SmboOptimizer(variant=variant, initial_samples=10, budget=2, seed=0)
            opt.fit(small_space, pool)
            sol = opt.final_solutions(small_space, holdout)
            assert set(sol.row_ids) == brute_front_ids(small_space, sol.row_ids)

    def test_duplicated_objective_collapse(self):
        # with y1 == y0 dominance is a total order: every variant must land
        # on the same single argmin row of the holdout
        n = 60
        values = np.linspace(0.0, 5.0, n)
        space = space_from_table(np.column_stack([values, values]))
        pool = np.arange(0, n, 2)
        holdout = np.arange(1, n, 2)
        winners = set()
        for variant in VARIANTS:
            opt = SmboOptimizer(
                variant=variant, initial_samples=len(pool) - 1, budget=2,
                min_split=2, min_leaf=1, seed=7,
            )
            opt.fit(space, pool)
            sol = opt.final_solutions(space, holdout)
            assert len(sol.row_ids) == 1
            winners.add(sol.row_ids[0])
        assert winners == {int(holdout[0])}

    def test_empty_holdout_rejected(self, small_space):
        pool, _ = split_holdout(small_space, 0.5, 5)
        opt = SmboOptimizer(initial_samples=10, budget=2, seed=0).fit(small_space, pool)
        with pytest.raises(ValueError):
            opt.final_solutions(small_space, [])


class TestPersistence:
    def test_state_round_trip(self, small_space):
        pool, holdout = split_holdout(small_space, 0.5, 4)
        for variant in VARIANTS:
            opt = SmboOptimizer(variant=variant, initial_samples=10, budget=2, seed=8)
            opt.fit(small_space, pool)
            payload = json.dumps(opt.to_dict())  # must be valid JSON
            back = SmboOptimizer.from_dict(json.loads(payload))
            assert back.evaluated_ == opt.evaluated_
            assert back.archive_ == opt.archive_
            assert back.measurements_ == opt.measurements_
            np.testing.assert_array_equal(
                back.select_rows(small_space, holdout), opt.select_rows(small_space, holdout)
            )

    def test_estimator_params_round_trip(self):
        opt = SmboOptimizer(variant="veer", budget=7, weights=(2.0, 1.0))
        clone = SmboOptimizer(**opt.get_params())
        assert clone.get_params() == opt.get_params()
        with pytest.raises(ValueError):
            clone.set_params(nonsense=1)

    def test_unfitted_use_rejected(self, small_space):
        opt = SmboOptimizer()
        with pytest.raises(RuntimeError):
            opt.select_rows(small_space, [0, 1])
        with pytest.raises(RuntimeError):
            opt.to_dict()
