"""Stopping rules, scree extraction, and the linear-quadratic change-point fit.

In-loop rules stop the elimination once the smallest per-cycle objective
increase exceeds a threshold, either fixed or scheduled to shrink with the
sample size (n^(-1/2) for plain risk minimization, n^(-beta/(2 beta + 1)) for
the regularized kernel objective). The change-point rule is post hoc: fit a
line left of a candidate index and a quadratic right of it over the scree
sequence, and keep the split with minimal total squared error.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .core import ValidationError

if TYPE_CHECKING:
    from .rfe import RfeTrace

FIXED = "fixed"
ERM_RATE = "erm-rate"
SVM_RATE = "svm-rate"
RANK_ALL = "rank-all"
CHANGE_POINT = "change-point"

_SCHEDULED = (ERM_RATE, SVM_RATE)
_IN_LOOP = (FIXED, ERM_RATE, SVM_RATE)


@dataclass(frozen=True)
class StoppingRule:
    kind: str
    delta: float | None = None
    c: float | None = None
    beta: float | None = None
    min_left: int = 2
    min_right: int = 3

    def __post_init__(self):
        if self.kind not in (FIXED, ERM_RATE, SVM_RATE, RANK_ALL, CHANGE_POINT):
            raise ValidationError(f"unknown stopping rule: {self.kind!r}")
        if self.kind == FIXED and (self.delta is None or not self.delta > 0):
            raise ValidationError(f"fixed threshold must be positive, got {self.delta}")
        if self.kind in _SCHEDULED and (self.c is None or not self.c > 0):
            raise ValidationError(f"schedule constant must be positive, got {self.c}")
        if self.kind == SVM_RATE and (self.beta is None or not 0 < self.beta <= 1):
            raise ValidationError(f"beta must be in (0, 1], got {self.beta}")
        if self.kind == CHANGE_POINT and (self.min_left < 1 or self.min_right < 1):
            raise ValidationError("min_left and min_right must be positive")

    @classmethod
    def fixed_threshold(cls, delta: float) -> "StoppingRule":
        return cls(FIXED, delta=float(delta))

    @classmethod
    def erm_rate(cls, c: float) -> "StoppingRule":
        return cls(ERM_RATE, c=float(c))

    @classmethod
    def svm_rate(cls, c: float, beta: float) -> "StoppingRule":
        return cls(SVM_RATE, c=float(c), beta=float(beta))

    @classmethod
    def rank_all(cls) -> "StoppingRule":
        return cls(RANK_ALL)

    @classmethod
    def change_point(cls, min_left: int = 2, min_right: int = 3) -> "StoppingRule":
        return cls(CHANGE_POINT, min_left=min_left, min_right=min_right)

    @property
    def in_loop(self) -> bool:
        return self.kind in _IN_LOOP

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind == FIXED:
            out["delta"] = self.delta
        if self.kind in _SCHEDULED:
            out["c"] = self.c
        if self.kind == SVM_RATE:
            out["beta"] = self.beta
        if self.kind == CHANGE_POINT:
            out["min_left"] = self.min_left
            out["min_right"] = self.min_right
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "StoppingRule":
        return cls(
            data["kind"],
            delta=data.get("delta"),
            c=data.get("c"),
            beta=data.get("beta"),
            min_left=data.get("min_left", 2),
            min_right=data.get("min_right", 3),
        )


def delta_schedule(rule: StoppingRule, n: int) -> float:
    """Threshold at sample size n: c * n^(-1/2) or c * n^(-beta/(2 beta + 1))."""
    if n < 1:
        raise ValidationError(f"sample size must be positive, got {n}")
    if rule.kind == ERM_RATE:
        return rule.c * float(n) ** -0.5
    if rule.kind == SVM_RATE:
        return rule.c * float(n) ** (-rule.beta / (2.0 * rule.beta + 1.0))
    raise ValidationError(f"rule {rule.kind!r} has no threshold schedule")


def should_stop(rule: StoppingRule, best_delta: float, n: int) -> bool:
    """Stop once the smallest objective increase strictly exceeds the threshold."""
    if rule.kind == FIXED:
        return best_delta > rule.delta
    if rule.kind in _SCHEDULED:
        return best_delta > delta_schedule(rule, n)
    raise ValidationError(f"rule {rule.kind!r} is not an in-loop stopping test")


def scree_values(trace: "RfeTrace") -> np.ndarray:
    """Per-cycle minimum candidate objective, in cycle order."""
    if not trace.cycles:
        raise ValidationError("trace has no cycles")
    return np.array(
        [
            min(obj.regularized for obj in record.candidate_objectives.values())
            for record in trace.cycles
        ]
    )


@dataclass(frozen=True)
class ChangePointFit:
    """Best linear-left / quadratic-right split of a scree sequence.

    Coefficients are in ascending order of degree: left (intercept, slope),
    right (intercept, slope, quadratic) on the cycle-index axis. The left
    segment covers cycles 0..change_index inclusive.
    """

    change_index: int
    left_coeffs: tuple[float, float]
    right_coeffs: tuple[float, float, float]
    sse: float

    def to_dict(self) -> dict:
        return {
            "change_index": self.change_index,
            "left_coeffs": list(self.left_coeffs),
            "right_coeffs": list(self.right_coeffs),
            "sse": self.sse,
        }


def _ols(x: np.ndarray, y: np.ndarray, degree: int) -> tuple[np.ndarray, float]:
    A = np.vander(x, degree + 1, increasing=True)
    coeffs, _, _, _ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coeffs
    return coeffs, float(resid @ resid)


def fit_change_point(scree, min_left: int = 2, min_right: int = 3) -> ChangePointFit:
    """Exhaustive change-point search over the scree sequence.

    For each admissible split t fit a line to cycles 0..t and a quadratic to
    cycles t+1..end by unweighted least squares (no continuity constraint at
    the join); return the t with minimal total SSE, ties to the smallest t.
    """
    s = np.asarray(scree, dtype=np.float64)
    if s.ndim != 1:
        raise ValidationError("scree must be a 1-D sequence")
    L = s.shape[0]
    if L < min_left + min_right:
        raise ValidationError(
            f"scree length {L} shorter than min_left + min_right = {min_left + min_right}"
        )
    x = np.arange(L, dtype=np.float64)
    best: ChangePointFit | None = None
    for t in range(min_left - 1, L - min_right):
        left, sse_l = _ols(x[: t + 1], s[: t + 1], 1)
        right, sse_r = _ols(x[t + 1 :], s[t + 1 :], 2)
        total = sse_l + sse_r
        if best is None or total < best.sse:
            best = ChangePointFit(
                change_index=t,
                left_coeffs=(float(left[0]), float(left[1])),
                right_coeffs=(float(right[0]), float(right[1]), float(right[2])),
                sse=total,
            )
    assert best is not None
    return best


def change_point_selection(trace: "RfeTrace", cp: ChangePointFit) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """(eliminated, retained) feature sets implied by a change-point fit.

    Features removed in cycles 0..change_index are the redundant set;
    survivors and features removed after the change point are retained.
    """
    eliminated: list[int] = []
    for record in trace.cycles[: cp.change_index + 1]:
        eliminated.extend(record.removed)
    eliminated_set = set(eliminated)
    retained = tuple(i for i in range(trace.final_mask.d) if i not in eliminated_set)
    return tuple(sorted(eliminated_set)), retained
