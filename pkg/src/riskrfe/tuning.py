"""k-fold cross-validation over the (2/(n lambda), gamma) grid.

Grid values g parameterize the regularization through lambda = 2 / (n g)
where n is the full sample size, so the conventional grid
{0.01 * 10^i} x {1, 2, 3, 4} can be used verbatim. Classification is scored
by 0-1 error of the sign decision, regression by the mean of the training
loss on held-out predictions.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import Dataset, FeatureMask, Task, ValidationError
from .kernels import GAUSSIAN, LINEAR, KernelSpec
from .learner import LossSpec, empirical_risk, fit, predict, predict_labels

DEFAULT_GRID_C = (0.01, 0.1, 1.0, 10.0, 100.0)
DEFAULT_GRID_GAMMA = (1.0, 2.0, 3.0, 4.0)


class CvScore(Enum):
    ZERO_ONE_ERROR = "zero-one-error"
    MEAN_LOSS = "mean-loss"


@dataclass(frozen=True)
class CvConfig:
    """Cross-validation setup; ``score=None`` resolves by task
    (classification -> 0-1 error, regression -> mean loss)."""

    folds: int = 5
    grid_c: tuple[float, ...] = DEFAULT_GRID_C
    grid_gamma: tuple[float, ...] = DEFAULT_GRID_GAMMA
    seed: int = 0
    score: CvScore | None = None

    def __post_init__(self):
        if self.folds < 2:
            raise ValidationError(f"folds must be >= 2, got {self.folds}")
        if not self.grid_c or any(not g > 0 for g in self.grid_c):
            raise ValidationError("grid_c must be nonempty and positive")
        if self.grid_gamma is not None and any(not g > 0 for g in self.grid_gamma):
            raise ValidationError("grid_gamma values must be positive")
        object.__setattr__(self, "grid_c", tuple(float(g) for g in self.grid_c))
        object.__setattr__(self, "grid_gamma", tuple(float(g) for g in self.grid_gamma))


@dataclass(frozen=True)
class CvCell:
    g: float
    gamma: float | None
    lam: float
    mean_score: float
    fold_scores: tuple[float, ...]


@dataclass(frozen=True)
class CvResult:
    lam: float
    gamma: float | None
    g: float
    score: float
    table: dict[tuple[float, float | None], CvCell]


def kfold_split(n: int, folds: int, seed: int) -> list[np.ndarray]:
    """Seed-deterministic shuffle, then contiguous folds whose sizes differ
    by at most one (larger folds first)."""
    if folds < 2:
        raise ValidationError(f"folds must be >= 2, got {folds}")
    if folds > n:
        raise ValidationError(f"folds ({folds}) exceeds sample size ({n})")
    perm = np.random.default_rng(seed).permutation(n)
    return np.array_split(perm, folds)


def _grid(kernel_family: str, cv: CvConfig) -> list[tuple[float, float | None]]:
    if kernel_family == LINEAR:
        return [(g, None) for g in cv.grid_c]
    if kernel_family == GAUSSIAN:
        if not cv.grid_gamma:
            raise ValidationError("gaussian kernel needs a nonempty grid_gamma")
        return [(g, gamma) for g in cv.grid_c for gamma in cv.grid_gamma]
    raise ValidationError(f"unsupported kernel family for CV: {kernel_family!r}")


def _kernel_for(kernel_family: str, gamma: float | None) -> KernelSpec:
    if kernel_family == LINEAR:
        return KernelSpec.linear()
    return KernelSpec.gaussian(gamma)


def cross_validate(
    dataset: Dataset,
    kernel_family: str,
    loss: LossSpec,
    cv: CvConfig,
    tol: float = 1e-6,
    max_iter: int = 50000,
    fit_bias: bool = True,
) -> CvResult:
    """Mean validation score per grid point; returns the argmin.

    Ties break toward the smaller g, then the smaller gamma. Every validation
    prediction comes from a model fit only on the complementary folds.
    """
    n = dataset.n
    score_kind = cv.score
    if score_kind is None:
        score_kind = (
            CvScore.ZERO_ONE_ERROR
            if dataset.task is Task.CLASSIFICATION
            else CvScore.MEAN_LOSS
        )
    folds = kfold_split(n, cv.folds, cv.seed)
    mask = FeatureMask.empty(dataset.d)
    table: dict[tuple[float, float | None], CvCell] = {}
    for g, gamma in _grid(kernel_family, cv):
        lam = 2.0 / (n * g)
        kernel = _kernel_for(kernel_family, gamma)
        fold_scores = []
        for v, val_idx in enumerate(folds):
            train_idx = np.concatenate([folds[u] for u in range(len(folds)) if u != v])
            train = dataset.subset(train_idx)
            model = fit(
                train, mask, kernel, loss, lam, tol=tol, max_iter=max_iter, fit_bias=fit_bias
            )
            X_val = dataset.features[val_idx]
            y_val = dataset.targets[val_idx]
            if score_kind is CvScore.ZERO_ONE_ERROR:
                fold_scores.append(float(np.mean(predict_labels(model, X_val) != y_val)))
            else:
                fold_scores.append(empirical_risk(loss, predict(model, X_val), y_val))
        table[(g, gamma)] = CvCell(
            g=g,
            gamma=gamma,
            lam=lam,
            mean_score=float(np.mean(fold_scores)),
            fold_scores=tuple(fold_scores),
        )
    best = min(
        table.values(), key=lambda cell: (cell.mean_score, cell.g, cell.gamma or 0.0)
    )
    return CvResult(lam=best.lam, gamma=best.gamma, g=best.g, score=best.mean_score, table=table)


def cv_table_rows(result: CvResult) -> list[list]:
    """Rows for the CV audit CSV: g, gamma, lambda, mean score, fold scores."""
    n_folds = len(next(iter(result.table.values())).fold_scores)
    header = ["g", "gamma", "lambda", "mean_score"] + [f"fold_{k}" for k in range(n_folds)]
    rows: list[list] = [header]
    for cell in result.table.values():
        rows.append(
            [cell.g, "" if cell.gamma is None else cell.gamma, cell.lam, cell.mean_score]
            + list(cell.fold_scores)
        )
    return rows
