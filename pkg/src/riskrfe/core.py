"""Shared domain types, dataset I/O, and deterministic seed derivation."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Iterable

import numpy as np

if TYPE_CHECKING:
    from .kernels import KernelSpec
    from .learner import LossSpec
    from .stopping import StoppingRule

_MASK64 = (1 << 64) - 1


class RiskRfeError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(RiskRfeError):
    """Invalid input data, configuration, or file contents."""


class NonNumericCellError(ValidationError):
    """A CSV cell that cannot be parsed as a number (1-based row/column)."""

    def __init__(self, row: int, col: int, text: str):
        super().__init__(f"non-numeric cell at row {row}, column {col}: {text!r}")
        self.row = row
        self.col = col


class NumericalError(RiskRfeError):
    """Numerical failure: solver breakdown or a failed simulation replication."""


class Task(Enum):
    CLASSIFICATION = "classification"
    REGRESSION = "regression"


@dataclass(frozen=True, eq=False)
class Dataset:
    """An in-memory sample: feature matrix, target vector, and task kind.

    Arrays are copied to float64, validated (finite, shape-consistent,
    classification targets in {-1, +1}), and frozen so instances can be
    shared across threads.
    """

    features: np.ndarray
    targets: np.ndarray
    task: Task
    feature_names: tuple[str, ...] | None = None

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.features, dtype=np.float64))
        y = np.ascontiguousarray(np.asarray(self.targets, dtype=np.float64))
        if X.ndim != 2:
            raise ValidationError(f"features must be a 2-D matrix, got shape {X.shape}")
        if y.ndim != 1:
            raise ValidationError(f"targets must be a 1-D vector, got shape {y.shape}")
        n, d = X.shape
        if n < 1 or d < 1:
            raise ValidationError(f"dataset needs n >= 1 and d >= 1, got n={n}, d={d}")
        if y.shape[0] != n:
            raise ValidationError(f"targets length {y.shape[0]} != number of rows {n}")
        if not np.isfinite(X).all():
            raise ValidationError("features contain NaN or Inf")
        if not np.isfinite(y).all():
            raise ValidationError("targets contain NaN or Inf")
        if self.task is Task.CLASSIFICATION and not np.isin(y, (-1.0, 1.0)).all():
            bad = y[~np.isin(y, (-1.0, 1.0))][0]
            raise ValidationError(f"classification target outside {{-1, +1}}: {bad}")
        if self.feature_names is not None:
            names = tuple(str(s) for s in self.feature_names)
            if len(names) != d:
                raise ValidationError(f"{len(names)} feature names for {d} columns")
            object.__setattr__(self, "feature_names", names)
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "targets", y)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def subset(self, indices) -> "Dataset":
        """Row subset as a new Dataset (used by cross-validation)."""
        idx = np.asarray(indices, dtype=np.intp)
        return Dataset(self.features[idx], self.targets[idx], self.task, self.feature_names)

    def to_dict(self) -> dict:
        return {
            "task": self.task.value,
            "features": self.features.tolist(),
            "targets": self.targets.tolist(),
            "feature_names": list(self.feature_names) if self.feature_names else None,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Dataset":
        names = data.get("feature_names")
        return cls(
            np.asarray(data["features"], dtype=np.float64),
            np.asarray(data["targets"], dtype=np.float64),
            Task(data["task"]),
            tuple(names) if names else None,
        )


@dataclass(frozen=True)
class FeatureMask:
    """The set J of eliminated feature indices (0-based) out of d columns."""

    d: int
    removed: tuple[int, ...] = ()

    def __post_init__(self):
        if self.d < 1:
            raise ValidationError(f"mask dimension must be >= 1, got {self.d}")
        rem = tuple(sorted({int(i) for i in self.removed}))
        for i in rem:
            if not 0 <= i < self.d:
                raise ValidationError(f"removed index {i} out of range for d={self.d}")
        object.__setattr__(self, "removed", rem)

    @classmethod
    def empty(cls, d: int) -> "FeatureMask":
        return cls(d=d)

    @property
    def active(self) -> tuple[int, ...]:
        removed = set(self.removed)
        return tuple(i for i in range(self.d) if i not in removed)

    @property
    def n_active(self) -> int:
        return self.d - len(self.removed)

    def with_removed(self, indices: int | Iterable[int]) -> "FeatureMask":
        if isinstance(indices, (int, np.integer)):
            indices = (int(indices),)
        return FeatureMask(self.d, self.removed + tuple(int(i) for i in indices))

    def without(self, index: int) -> "FeatureMask":
        return FeatureMask(self.d, tuple(i for i in self.removed if i != index))

    def to_dict(self) -> dict:
        return {"d": self.d, "removed": list(self.removed)}

    @classmethod
    def from_dict(cls, data: dict) -> "FeatureMask":
        return cls(d=int(data["d"]), removed=tuple(data["removed"]))


@dataclass(frozen=True)
class SeedStream:
    """A named, reproducible stream of derived seeds."""

    root_seed: int
    stream_label: str


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to run one elimination pass on a dataset.

    ``learner`` selects the compared objective: "kernel" uses the regularized
    kernel objective, "linear-erm" uses plain least-squares empirical risk
    (backward elimination by mean squared residual).
    """

    kernel: "KernelSpec"
    loss: "LossSpec"
    lam: float
    stopping: "StoppingRule"
    seed: int = 0
    cycle_size: int = 1
    solver_tolerance: float = 1e-8
    max_solver_iterations: int = 100000
    learner: str = "kernel"
    fit_bias: bool = True

    def __post_init__(self):
        if not self.lam > 0:
            raise ValidationError(f"lambda must be positive, got {self.lam}")
        if self.cycle_size < 1:
            raise ValidationError(f"cycle_size must be >= 1, got {self.cycle_size}")
        if not self.solver_tolerance > 0:
            raise ValidationError("solver_tolerance must be positive")
        if self.max_solver_iterations < 1:
            raise ValidationError("max_solver_iterations must be >= 1")
        if self.learner not in ("kernel", "linear-erm"):
            raise ValidationError(f"unknown learner kind: {self.learner!r}")
        if not 0 <= self.seed <= _MASK64:
            raise ValidationError("seed must fit in 64 unsigned bits")


def _fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & _MASK64
    return h


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(stream: SeedStream, index: int) -> int:
    """Pure 64-bit seed derivation: splitmix finalizer over
    (root_seed XOR fnv1a(stream_label)) + index.

    Distinct (label, index) pairs give well-dispersed, reproducible seeds,
    so replications and folds can be seeded independently and in parallel.
    """
    if index < 0:
        raise ValidationError(f"seed index must be nonnegative, got {index}")
    base = (stream.root_seed ^ _fnv1a64(stream.stream_label.encode("utf-8"))) & _MASK64
    return _splitmix64((base + index) & _MASK64)


def load_dataset(
    path,
    task: Task,
    has_header: bool = False,
    coerce_binary_labels: bool = False,
) -> Dataset:
    """Load a CSV dataset ('.' decimal point, last column is the target).

    Classification targets must already be in {-1, +1}; with
    ``coerce_binary_labels`` they must be in {0, 1} and are mapped
    order-preserving (0 -> -1, 1 -> +1). Row/column numbers in errors are
    1-based file coordinates.
    """
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"dataset file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    names: tuple[str, ...] | None = None
    if has_header:
        if not rows:
            raise ValidationError(f"empty dataset file: {path}")
        header, rows = rows[0], rows[1:]
        names = tuple(s.strip() for s in header[:-1])
    if not rows:
        raise ValidationError(f"empty dataset file: {path}")
    width = len(rows[0])
    if width < 2:
        raise ValidationError("rows need at least one feature column plus the target")
    values = np.empty((len(rows), width), dtype=np.float64)
    offset = 2 if has_header else 1
    for r, row in enumerate(rows):
        if len(row) != width:
            raise ValidationError(
                f"ragged row {r + offset}: expected {width} columns, got {len(row)}"
            )
        for c, cell in enumerate(row):
            try:
                values[r, c] = float(cell)
            except ValueError:
                raise NonNumericCellError(r + offset, c + 1, cell) from None
    X, y = values[:, :-1], values[:, -1]
    if task is Task.CLASSIFICATION:
        if coerce_binary_labels:
            if not np.isin(y, (0.0, 1.0)).all():
                bad = y[~np.isin(y, (0.0, 1.0))][0]
                raise ValidationError(f"target outside {{0, 1}} with coercion enabled: {bad}")
            y = np.where(y == 1.0, 1.0, -1.0)
        elif not np.isin(y, (-1.0, 1.0)).all():
            bad = y[~np.isin(y, (-1.0, 1.0))][0]
            raise ValidationError(f"classification target outside {{-1, +1}}: {bad}")
    return Dataset(X, y, task, names)


def _fmt(v: float) -> str:
    # 17 significant digits: round-trips every float64 bit-exactly.
    return format(v, ".17g")


def save_dataset(dataset: Dataset, path) -> None:
    """Write a Dataset back to CSV (target last, 17 significant digits)."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if dataset.feature_names is not None:
            writer.writerow(list(dataset.feature_names) + ["target"])
        for i in range(dataset.n):
            writer.writerow(
                [_fmt(v) for v in dataset.features[i]] + [_fmt(dataset.targets[i])]
            )
