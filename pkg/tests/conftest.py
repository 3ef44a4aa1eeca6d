from __future__ import annotations

import numpy as np
import pytest

from veertune.dataspace import NUMERIC, ConfigSpace, ObjectiveSchema, OptionSchema


def space_from_table(Y, X=None) -> ConfigSpace:
    """Small hand-built space: numeric options inferred from observed values."""
    Y = np.asarray(Y, dtype=float)
    if X is None:
        X = np.arange(len(Y), dtype=float).reshape(-1, 1)
    X = np.asarray(X, dtype=float)
    options = [
        OptionSchema(f"x{j}", NUMERIC, tuple(np.unique(X[:, j]))) for j in range(X.shape[1])
    ]
    objectives = [ObjectiveSchema(f"y{k}", "min") for k in range(Y.shape[1])]
    return ConfigSpace(options, objectives, X, Y)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
