"""Dominance relations, non-dominated sorting, dominance-strength ranking,
and generational distance.

Two domination flavors are supported: ``binary`` (componentwise, with at
least one strict inequality) and ``continuous`` (exponential loss
comparison, total on points with distinct losses).  All functions assume
minimize form; continuous-domination inputs must be min-max normalized.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .base import as_float_matrix, as_float_vector, check_same_arity, check_unit_interval

try:  # compiled all-pairs kernel; the numpy fallback below is ~10x slower
    from numba import njit
except ImportError:  # pragma: no cover
    njit = None

KINDS = ("binary", "continuous")


class ComparisonCounter:
    """Counts candidate-pair dominance evaluations (test instrumentation).

    Bulk routines add the number of ordered pairs they examine.  Reset it
    before a code path to assert how many comparisons that path performs.
    """

    def __init__(self) -> None:
        self.count = 0

    def add(self, n: int) -> None:
        self.count += int(n)

    def reset(self) -> None:
        self.count = 0


COMPARISONS = ComparisonCounter()


def binary_dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """True iff ``a <= b`` componentwise and strictly better somewhere."""
    va = as_float_vector(a, "a")
    vb = as_float_vector(b, "b")
    check_same_arity(va, vb)
    return bool((va <= vb).all() and (va < vb).any())


def cdom_loss(a: Sequence[float], b: Sequence[float]) -> float:
    """Continuous-domination loss of ``a`` against ``b``:
    ``mean_j(-exp(b_j - a_j))`` over normalized objective values."""
    va = as_float_vector(a, "a")
    vb = as_float_vector(b, "b")
    check_same_arity(va, vb)
    check_unit_interval(va, "a")
    check_unit_interval(vb, "b")
    return float(np.mean(-np.exp(vb - va)))


def cdom_dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """True iff ``a`` continuous-dominates ``b`` (lower loss wins)."""
    return cdom_loss(a, b) < cdom_loss(b, a)


def _dominance_matrix(values: np.ndarray, kind: str) -> np.ndarray:
    """D[i, j] = True iff point i dominates point j."""
    n = len(values)
    if kind == "binary":
        le = (values[:, None, :] <= values[None, :, :]).all(axis=2)
        lt = (values[:, None, :] < values[None, :, :]).any(axis=2)
        dom = le & lt
    elif kind == "continuous":
        check_unit_interval(values, "points")
        loss = -np.exp(values[None, :, :] - values[:, None, :]).mean(axis=2)
        dom = loss < loss.T
        np.fill_diagonal(dom, False)
    else:
        raise ValueError(f"unknown dominance kind {kind!r}")
    COMPARISONS.add(n * (n - 1))
    return dom


def nd_sort(values: Sequence[Sequence[float]], kind: str = "binary") -> list[list[int]]:
    """Fast non-dominated sort into successive fronts of point indexes.

    Front 0 holds the points dominated by nothing; front k holds the
    non-dominated remainder after removing fronts < k.  Dominance counts
    come from one O(M*N^2) vectorized pass.
    """
    arr = as_float_matrix(values, "points")
    dom = _dominance_matrix(arr, kind)
    counts = dom.sum(axis=0).astype(int)
    remaining = np.ones(len(arr), dtype=bool)
    fronts: list[list[int]] = []
    while remaining.any():
        members = np.flatnonzero(remaining & (counts == 0))
        if members.size == 0:
            raise ValueError("dominance relation contains a cycle; no front can be peeled")
        fronts.append(members.tolist())
        remaining[members] = False
        counts -= dom[members].sum(axis=0)
    return fronts


def _dominated_mask_numpy(arr: np.ndarray, chunk: int = 256) -> np.ndarray:
    n = len(arr)
    dominated = np.zeros(n, dtype=bool)
    for start in range(0, n, chunk):
        block = arr[start : start + chunk]
        le = (arr[None, :, :] <= block[:, None, :]).all(axis=2)
        lt = (arr[None, :, :] < block[:, None, :]).any(axis=2)
        dominated[start : start + chunk] = (le & lt).any(axis=1)
    return dominated


if njit is not None:

    @njit(cache=True)
    def _dominated_mask_compiled(arr):  # pragma: no cover - exercised via wrapper
        n, m = arr.shape
        out = np.zeros(n, dtype=np.bool_)
        for i in range(n):
            dominated = False
            for j in range(n):
                if j == i:
                    continue
                le = True
                lt = False
                for k in range(m):
                    if arr[j, k] > arr[i, k]:
                        le = False
                        break
                    if arr[j, k] < arr[i, k]:
                        lt = True
                if le and lt:
                    dominated = True
            out[i] = dominated
        return out

else:
    _dominated_mask_compiled = None


def non_dominated_front(values: Sequence[Sequence[float]]) -> np.ndarray:
    """Indexes of the binary-domination front 0.

    This is the full N*(N-1) comparison pass of the fast non-dominated
    sort (every point is checked against every other, the cost the
    single-dimension rank model sidesteps); only the constant factor is
    tuned, via a compiled kernel when numba is importable."""
    arr = as_float_matrix(values, "points")
    n = len(arr)
    if _dominated_mask_compiled is not None:
        dominated = _dominated_mask_compiled(np.ascontiguousarray(arr))
    else:
        dominated = _dominated_mask_numpy(arr)
    COMPARISONS.add(n * (n - 1))
    return np.flatnonzero(~dominated)


def zigzag_key(values: Sequence[Sequence[float]], weights: Sequence[float] | None = None) -> np.ndarray:
    """Scalar dominance-strength key of each normalized point: its
    continuous-domination loss against the heaven point (0, ..., 0).

    Lower keys belong to stronger points, so sorting ascending puts the
    most dominant configurations first.  A weight w_j scales the j-th
    exponent term, steering the ranking toward preferred objectives.
    """
    arr = as_float_matrix(values, "points")
    check_unit_interval(arr, "points")
    if weights is None:
        w = np.ones(arr.shape[1])
    else:
        w = as_float_vector(weights, "weights")
        if len(w) != arr.shape[1]:
            raise ValueError("weights arity does not match points")
        if (w <= 0).any():
            raise ValueError("weights must be positive")
    return -np.exp(-arr * w).mean(axis=1)


def zigzag_rank(
    values: Sequence[Sequence[float]],
    kind: str = "continuous",
    weights: Sequence[float] | None = None,
) -> np.ndarray:
    """Dense dominance ranks (0 is best) compressing the objective space
    into one dimension.

    ``continuous`` ranks by the heaven-point key; exact key ties share a
    rank.  ``binary`` assigns each point the index of its non-dominated
    sorting front, so mutually non-dominating points share a rank.
    """
    arr = as_float_matrix(values, "points")
    if kind == "continuous":
        keys = zigzag_key(arr, weights)
        _, ranks = np.unique(keys, return_inverse=True)
        return ranks.astype(int)
    if kind == "binary":
        if weights is not None:
            raise ValueError("weights only apply to continuous ranking")
        ranks = np.empty(len(arr), dtype=int)
        for depth, front in enumerate(nd_sort(arr, "binary")):
            ranks[front] = depth
        return ranks
    raise ValueError(f"unknown dominance kind {kind!r}")


def generational_distance(
    solution: Sequence[Sequence[float]],
    true_front: Sequence[Sequence[float]],
    chunk: int = 512,
) -> float:
    """Mean Euclidean distance from each solution point to its nearest
    true-front point; both sets must live in the same normalized frame."""
    sol = as_float_matrix(solution, "solution")
    front = as_float_matrix(true_front, "true_front")
    check_same_arity(sol, front)
    total = 0.0
    for start in range(0, len(sol), chunk):
        block = sol[start : start + chunk]
        d2 = ((block[:, None, :] - front[None, :, :]) ** 2).sum(axis=2)
        total += np.sqrt(d2.min(axis=1)).sum()
    return total / len(sol)
