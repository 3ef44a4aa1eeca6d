"""Shared estimator plumbing and input validation helpers."""

from __future__ import annotations

import inspect
from typing import Any

import numpy as np


class ParamsMixin:
    """Minimal ``get_params``/``set_params`` so estimators compose with
    scikit-learn style tooling (cloning, grid construction) without a
    scikit-learn dependency."""

    @classmethod
    def _param_names(cls) -> list[str]:
        sig = inspect.signature(cls.__init__)
        return sorted(name for name in sig.parameters if name != "self")

    def get_params(self, deep: bool = True) -> dict[str, Any]:
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params: Any):
        valid = set(self._param_names())
        for key, value in params.items():
            if key not in valid:
                raise ValueError(
                    f"unknown parameter {key!r} for {type(self).__name__}; "
                    f"valid parameters are {sorted(valid)}"
                )
            setattr(self, key, value)
        return self


def as_float_matrix(values: Any, name: str = "values") -> np.ndarray:
    """Coerce to a non-empty 2-D float array, rejecting NaN/inf."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def as_float_vector(values: Any, name: str = "values") -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D array, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def as_id_array(ids: Any, name: str = "ids") -> np.ndarray:
    """Coerce a collection of row ids to a sorted, duplicate-free int array."""
    arr = np.asarray(sorted(int(i) for i in ids), dtype=int)
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if arr.size > 1 and (np.diff(arr) == 0).any():
        raise ValueError(f"{name} contains duplicate ids")
    return arr


def check_same_arity(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape[-1] != b.shape[-1]:
        raise ValueError(f"arity mismatch: {a.shape[-1]} vs {b.shape[-1]}")


def check_unit_interval(arr: np.ndarray, name: str = "values") -> None:
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        raise ValueError(f"{name} must be min-max normalized to [0, 1]")
