"""Synthetic configuration landscapes for desk-scale verification.

Objectives are sparse random polynomials over the option values with
quadratic interaction terms, so trees have real structure to learn, and
the inter-objective correlation is controlled by a single knob.  A
separate constructor builds a landscape whose true front is a circle arc
(non-convex), the classic failure case for weighted-sum scalarization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataspace import BINARY, NUMERIC, ConfigSpace, ObjectiveSchema, OptionSchema

NUMERIC_LEVELS = 10


@dataclass(frozen=True)
class LandscapeSpec:
    n_binary: int
    n_numeric: int
    n_rows: int
    n_objectives: int = 2
    correlation: float = 0.0
    noise: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_binary < 0 or self.n_numeric < 0 or self.n_binary + self.n_numeric == 0:
            raise ValueError("need at least one option")
        if self.n_rows < 1:
            raise ValueError("n_rows must be positive")
        if self.n_objectives < 2:
            raise ValueError("need at least 2 objectives")
        if not -1.0 <= self.correlation <= 1.0:
            raise ValueError("correlation must lie in [-1, 1]")
        if self.noise < 0:
            raise ValueError("noise must be non-negative")


def _sample_lattice(rng: np.random.Generator, sizes: list[int], n_rows: int) -> np.ndarray:
    """Distinct uniform draws from the mixed-radix option lattice."""
    total = math.prod(sizes)
    if n_rows > total:
        raise ValueError(f"n_rows={n_rows} exceeds the option lattice ({total} cells)")
    if total <= 2**24:
        codes = rng.choice(total, size=n_rows, replace=False)
    else:
        seen: set[int] = set()
        while len(seen) < n_rows:
            for c in rng.integers(0, total, size=n_rows):
                seen.add(int(c))
                if len(seen) == n_rows:
                    break
        codes = np.fromiter(seen, dtype=np.int64)
    digits = np.empty((n_rows, len(sizes)), dtype=np.int64)
    for j, size in enumerate(reversed(sizes)):
        col = len(sizes) - 1 - j
        digits[:, col] = codes % size
        codes = codes // size
    return digits


def _sparse_poly(rng: np.random.Generator, n_options: int, n_interactions: int = 3):
    linear = rng.normal(0.0, 1.0, n_options)
    pairs = rng.integers(0, n_options, size=(n_interactions, 2))
    coefs = rng.normal(0.0, 1.5, n_interactions)

    def evaluate(X: np.ndarray) -> np.ndarray:
        y = X @ linear
        for (i, j), c in zip(pairs, coefs):
            y = y + c * X[:, i] * X[:, j]
        return y

    return evaluate


def generate(spec: LandscapeSpec) -> ConfigSpace:
    """Sample a full synthetic table: distinct configurations, objective 1
    a fixed sparse polynomial, later objectives blended toward it by
    ``correlation`` plus Gaussian noise.  Deterministic per seed."""
    rng = np.random.default_rng(spec.seed)
    sizes = [2] * spec.n_binary + [NUMERIC_LEVELS] * spec.n_numeric
    digits = _sample_lattice(rng, sizes, spec.n_rows)

    levels = np.linspace(0.0, 1.0, NUMERIC_LEVELS)
    X = np.empty(digits.shape, dtype=float)
    options: list[OptionSchema] = []
    for j in range(spec.n_binary):
        X[:, j] = digits[:, j]
        options.append(OptionSchema(f"b{j}", BINARY, (0.0, 1.0)))
    for j in range(spec.n_numeric):
        col = spec.n_binary + j
        X[:, col] = levels[digits[:, col]]
        options.append(OptionSchema(f"x{j}", NUMERIC, tuple(np.unique(X[:, col]))))

    d = X.shape[1]
    base = _sparse_poly(rng, d)(X)
    cols = [base]
    for _ in range(1, spec.n_objectives):
        independent = _sparse_poly(rng, d)(X)
        blended = spec.correlation * base + (1.0 - abs(spec.correlation)) * independent
        cols.append(blended + rng.normal(0.0, spec.noise, spec.n_rows))
    Y = np.column_stack(cols)
    objectives = [ObjectiveSchema(f"y{k}", "min") for k in range(spec.n_objectives)]
    return ConfigSpace(options, objectives, X, Y)


def concave_front_space(
    n_rows: int = 640,
    seed: int = 0,
    bow: float = 0.02,
    noise: float = 0.08,
) -> ConfigSpace:
    """A two-objective landscape whose ideal front is a concave arc and
    whose equal-weight objective sum carries almost no usable signal.

    One option sweeps an anti-correlated front from (0, 1) to (1, 0) with
    a slight outward bow, so the sum of objectives is constant up to the
    bow and is minimized only at the sweep's two extremes.  Measurement
    noise is scaled by an envelope that vanishes at those extremes: a
    scalarized model's argmin therefore chases lucky-noise pockets in the
    mid sweep (where unlucky neighbors hide), while dominance-strength
    ranking structurally prefers the clean extreme corners and the
    per-objective models still see the strong sweep signal.  A binary
    flag and one numeric option are pure decoys.
    """
    rng = np.random.default_rng(seed)
    sizes = [32, 2, 10]
    digits = _sample_lattice(rng, sizes, n_rows)
    a = np.linspace(0.0, 1.0, 32)[digits[:, 0]]
    b = digits[:, 1].astype(float)
    z = np.linspace(0.0, 1.0, 10)[digits[:, 2]]

    envelope = 4.0 * a * (1.0 - a)
    y1 = a + bow * envelope + envelope * rng.normal(0.0, noise, n_rows)
    y2 = (1.0 - a) + bow * envelope + envelope * rng.normal(0.0, noise, n_rows)

    options = [
        OptionSchema("sweep", NUMERIC, tuple(np.unique(a))),
        OptionSchema("flag", BINARY, (0.0, 1.0)),
        OptionSchema("decoy", NUMERIC, tuple(np.unique(z))),
    ]
    objectives = [ObjectiveSchema("y0", "min"), ObjectiveSchema("y1", "min")]
    return ConfigSpace(options, objectives, np.column_stack([a, b, z]), np.column_stack([y1, y2]))
