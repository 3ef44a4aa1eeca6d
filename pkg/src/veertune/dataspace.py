"""Configuration-space data model, dataset IO, and objective normalization.

A dataset is a fully enumerated table: one row per valid configuration,
option columns plus at least two objective columns.  Objectives declared
``max`` in the manifest are negated at load time so that every downstream
computation minimizes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .base import as_id_array

BINARY = "binary"
NUMERIC = "numeric"

_BOOL_TOKENS = {"true": 1.0, "false": 0.0}


@dataclass(frozen=True)
class OptionSchema:
    """One configuration option; binary flags are encoded 0/1."""

    name: str
    kind: str
    domain: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.kind not in (BINARY, NUMERIC):
            raise ValueError(f"unknown option kind {self.kind!r}")
        if not self.domain:
            raise ValueError(f"option {self.name!r} has an empty domain")
        if any(b <= a for a, b in zip(self.domain, self.domain[1:])):
            raise ValueError(f"option {self.name!r} domain must be strictly increasing")
        if self.kind == BINARY and not set(self.domain) <= {0.0, 1.0}:
            raise ValueError(f"binary option {self.name!r} domain must be within {{0, 1}}")


@dataclass(frozen=True)
class ObjectiveSchema:
    """A performance measure and its optimization direction ("min" or "max")."""

    name: str
    direction: str = "min"

    def __post_init__(self) -> None:
        if self.direction not in ("min", "max"):
            raise ValueError(f"objective direction must be 'min' or 'max', got {self.direction!r}")


@dataclass
class ConfigSpace:
    """An immutable table of configurations and their measured objectives.

    ``X`` holds option values (one row per configuration, columns aligned
    with ``options``); ``Y`` holds objective values in minimize form
    (``max`` objectives already negated).  Row ids are the row indexes,
    dense in ``[0, n_rows)``.  ``Y_norm`` is filled by
    :func:`minmax_normalize` and is ``None`` until then.
    """

    options: list[OptionSchema]
    objectives: list[ObjectiveSchema]
    X: np.ndarray
    Y: np.ndarray
    Y_norm: np.ndarray | None = field(default=None)

    def __post_init__(self) -> None:
        self.X = np.asarray(self.X, dtype=float)
        self.Y = np.asarray(self.Y, dtype=float)
        if self.X.ndim != 2 or self.Y.ndim != 2:
            raise ValueError("X and Y must be 2-D arrays")
        if len(self.X) != len(self.Y):
            raise ValueError("X and Y row counts differ")
        if self.X.shape[1] != len(self.options):
            raise ValueError("X column count does not match option schemas")
        if self.Y.shape[1] != len(self.objectives):
            raise ValueError("Y column count does not match objective schemas")
        if self.Y.shape[1] < 2:
            raise ValueError("a configuration space needs at least 2 objectives")
        names = [o.name for o in self.options] + [o.name for o in self.objectives]
        if len(set(names)) != len(names):
            raise ValueError("option/objective names must be unique")
        for j, opt in enumerate(self.options):
            if not np.isin(self.X[:, j], opt.domain).all():
                raise ValueError(f"column {opt.name!r} contains values outside its domain")
        self.X.setflags(write=False)
        self.Y.setflags(write=False)
        if self.Y_norm is not None:
            self.Y_norm = np.asarray(self.Y_norm, dtype=float)
            self.Y_norm.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return len(self.X)

    @property
    def n_options(self) -> int:
        return len(self.options)

    @property
    def n_objectives(self) -> int:
        return len(self.objectives)

    def config(self, row_id: int) -> np.ndarray:
        return self.X[row_id]

    def perf(self, row_id: int) -> np.ndarray:
        return self.Y[row_id]


def read_manifest(path: str | Path) -> list[ObjectiveSchema]:
    """Parse a manifest of ``objective <name> <min|max>`` lines."""
    objectives: list[ObjectiveSchema] = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 3 or tokens[0] != "objective":
            raise ValueError(f"{path}:{lineno}: expected 'objective <name> <min|max>', got {raw!r}")
        objectives.append(ObjectiveSchema(tokens[1], tokens[2]))
    return objectives


def write_manifest(objectives: Sequence[ObjectiveSchema], path: str | Path) -> None:
    lines = [f"objective {o.name} {o.direction}" for o in objectives]
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_option_column(name: str, raw: list[str]) -> tuple[OptionSchema, np.ndarray]:
    values = np.empty(len(raw), dtype=float)
    for i, token in enumerate(raw):
        key = token.strip().lower()
        if key in _BOOL_TOKENS:
            values[i] = _BOOL_TOKENS[key]
            continue
        try:
            values[i] = float(token)
        except ValueError:
            raise ValueError(f"non-numeric value {token!r} in option column {name!r}") from None
    domain = tuple(np.unique(values))
    if domain == (0.0, 1.0):
        return OptionSchema(name, BINARY, domain), values
    return OptionSchema(name, NUMERIC, domain), values


def load_dataset(path: str | Path, objectives: Sequence[ObjectiveSchema] | str | Path) -> ConfigSpace:
    """Load a CSV dataset given its objective manifest.

    Columns named in the manifest become objectives (negated when their
    direction is ``max``); every other column becomes an option.  A column
    whose distinct values are exactly {0, 1} (or true/false) is binary.
    """
    if isinstance(objectives, (str, Path)):
        objectives = read_manifest(objectives)
    objectives = list(objectives)
    if len(objectives) < 2:
        raise ValueError("at least 2 objective columns are required")

    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path} is empty") from None
        rows = [row for row in reader if row]
    header = [h.strip() for h in header]
    missing = [o.name for o in objectives if o.name not in header]
    if missing:
        raise ValueError(f"objective columns {missing} not found in {path}")

    columns = {name: [row[i] for row in rows] for i, name in enumerate(header)}
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"{path}: row width differs from header width")

    objective_names = {o.name for o in objectives}
    option_schemas: list[OptionSchema] = []
    option_cols: list[np.ndarray] = []
    for name in header:
        if name in objective_names:
            continue
        schema, values = _parse_option_column(name, columns[name])
        option_schemas.append(schema)
        option_cols.append(values)

    y_cols = []
    for obj in objectives:
        col = np.empty(len(rows), dtype=float)
        for i, token in enumerate(columns[obj.name]):
            try:
                col[i] = float(token)
            except ValueError:
                raise ValueError(
                    f"non-numeric value {token!r} in objective column {obj.name!r}"
                ) from None
        if obj.direction == "max":
            col = -col
        y_cols.append(col)

    X = np.column_stack(option_cols) if option_cols else np.empty((len(rows), 0))
    Y = np.column_stack(y_cols)
    return ConfigSpace(option_schemas, objectives, X, Y)


def save_dataset(space: ConfigSpace, csv_path: str | Path, manifest_path: str | Path | None = None) -> None:
    """Write a space back to CSV (+ manifest), undoing the internal negation
    of ``max`` objectives so files round-trip through :func:`load_dataset`."""
    header = [o.name for o in space.options] + [o.name for o in space.objectives]
    signs = np.array([-1.0 if o.direction == "max" else 1.0 for o in space.objectives])
    with Path(csv_path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i in range(space.n_rows):
            raw_y = space.Y[i] * signs
            writer.writerow([str(v) for v in space.X[i]] + [str(v) for v in raw_y])
    if manifest_path is not None:
        write_manifest(space.objectives, manifest_path)


def minmax_bounds(values: np.ndarray, reference: Iterable[int] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Per-column (low, high) over the reference rows (all rows if None)."""
    arr = np.asarray(values, dtype=float)
    if reference is not None:
        arr = arr[as_id_array(reference, "reference")]
    if arr.size == 0:
        raise ValueError("reference selects no rows")
    return arr.min(axis=0), arr.max(axis=0)


def apply_minmax(values: np.ndarray, low: np.ndarray, high: np.ndarray) -> np.ndarray:
    """Scale columns to [0, 1] against (low, high), clamping values outside
    the bounds.  A degenerate column (high == low) maps to all zeros."""
    arr = np.asarray(values, dtype=float)
    span = high - low
    safe = np.where(span > 0, span, 1.0)
    scaled = np.clip((arr - low) / safe, 0.0, 1.0)
    return np.where(span > 0, scaled, 0.0)


def minmax_normalize(space: ConfigSpace, reference: Iterable[int]) -> ConfigSpace:
    """Return a copy of ``space`` with ``Y_norm`` filled.

    Bounds come only from the ``reference`` rows; other rows clamp into
    [0, 1].  Which rows to pass is the caller's call: an optimizer passes
    the rows it has measured, an evaluator passes the holdout.
    """
    ref = as_id_array(reference, "reference")
    if ref.min() < 0 or ref.max() >= space.n_rows:
        raise ValueError("reference contains ids outside the space")
    low, high = minmax_bounds(space.Y, ref)
    return replace(space, Y_norm=apply_minmax(space.Y, low, high))


def split_holdout(space: ConfigSpace, fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Partition row ids into (pool, holdout), deterministic per seed.

    The holdout side gets ``round-half-up(fraction * n_rows)`` ids.  The
    partition depends only on the row count and the seed, so re-ordering
    the underlying table does not change which ids land where.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must lie strictly between 0 and 1")
    n = space.n_rows
    n_holdout = int(math.floor(fraction * n + 0.5))
    if n_holdout == 0 or n_holdout == n:
        raise ValueError(f"fraction {fraction} yields an empty side for {n} rows")
    perm = np.random.default_rng(seed).permutation(n)
    holdout = np.sort(perm[:n_holdout])
    pool = np.sort(perm[n_holdout:])
    return pool, holdout
