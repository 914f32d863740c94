"""Kernels, coordinate projections, projected kernels, and Gram construction.

A projected kernel evaluates the base kernel on inputs whose masked
coordinates are zeroed; for radial and dot-product kernels this coincides
with evaluating the kernel formula on the physically shortened vectors, which
is what justifies the classic Gram-deletion shortcut.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .core import FeatureMask, ValidationError

GAUSSIAN = "gaussian"
LINEAR = "linear"
WEIGHTED_GAUSSIAN = "weighted-gaussian"


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus its parameters.

    kinds: "gaussian" (exp(-||x-y||^2 / gamma^2)), "linear" (<x, y>), and
    "weighted-gaussian" (exp(-sum_i w_i (x_i-y_i)^2 / gamma^2)).
    """

    kind: str
    gamma: float | None = None
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in (GAUSSIAN, LINEAR, WEIGHTED_GAUSSIAN):
            raise ValidationError(f"unknown kernel kind: {self.kind!r}")
        if self.kind in (GAUSSIAN, WEIGHTED_GAUSSIAN):
            if self.gamma is None or not self.gamma > 0:
                raise ValidationError(f"gamma must be positive, got {self.gamma}")
        if self.kind == WEIGHTED_GAUSSIAN:
            if not self.weights:
                raise ValidationError("weighted-gaussian kernel needs weights")
            w = tuple(float(v) for v in self.weights)
            if any(not v > 0 for v in w):
                raise ValidationError("all kernel weights must be positive")
            object.__setattr__(self, "weights", w)
        elif self.weights is not None:
            raise ValidationError(f"{self.kind} kernel takes no weights")
        if self.kind == LINEAR and self.gamma is not None:
            raise ValidationError("linear kernel takes no gamma")

    @classmethod
    def gaussian(cls, gamma: float) -> "KernelSpec":
        return cls(GAUSSIAN, gamma=float(gamma))

    @classmethod
    def linear(cls) -> "KernelSpec":
        return cls(LINEAR)

    @classmethod
    def weighted_gaussian(cls, gamma: float, weights) -> "KernelSpec":
        return cls(WEIGHTED_GAUSSIAN, gamma=float(gamma), weights=tuple(weights))

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.gamma is not None:
            out["gamma"] = self.gamma
        if self.weights is not None:
            out["weights"] = list(self.weights)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "KernelSpec":
        return cls(
            data["kind"],
            gamma=data.get("gamma"),
            weights=tuple(data["weights"]) if data.get("weights") else None,
        )


def _check_pair(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError(f"point shapes differ: {x.shape} vs {y.shape}")
    return x, y


def project_point(x: np.ndarray, mask: FeatureMask) -> np.ndarray:
    """Zero the coordinates of ``x`` indexed by ``mask.removed``."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != mask.d:
        raise ValidationError(f"point has shape {x.shape}, mask expects length {mask.d}")
    out = x.copy()
    if mask.removed:
        out[list(mask.removed)] = 0.0
    return out


def project_matrix(X: np.ndarray, mask: FeatureMask) -> np.ndarray:
    """Row-wise projection of an (m, d) matrix."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != mask.d:
        raise ValidationError(f"matrix has shape {X.shape}, mask expects {mask.d} columns")
    out = X.copy()
    if mask.removed:
        out[:, list(mask.removed)] = 0.0
    return out


def eval_kernel(spec: KernelSpec, x, y) -> float:
    """Evaluate the kernel on a pair of full-dimensional points."""
    x, y = _check_pair(x, y)
    if spec.kind == LINEAR:
        return float(np.dot(x, y))
    if spec.kind == GAUSSIAN:
        return float(np.exp(-np.sum((x - y) ** 2) / spec.gamma**2))
    w = np.asarray(spec.weights, dtype=np.float64)
    if w.shape[0] != x.shape[0]:
        raise ValidationError(f"{w.shape[0]} kernel weights for {x.shape[0]}-dim points")
    return float(np.exp(-np.sum(w * (x - y) ** 2) / spec.gamma**2))


def eval_projected_kernel(spec: KernelSpec, mask: FeatureMask, x, y) -> float:
    """k(pi(x), pi(y)): the kernel evaluated on the zero-projected points."""
    return eval_kernel(spec, project_point(x, mask), project_point(y, mask))


def deleted_kernel_equivalent(spec: KernelSpec, mask: FeatureMask, x, y) -> float:
    """Evaluate the kernel formula directly on the shortened vectors.

    Masked coordinates (and their weights, for the weighted variant) are
    physically deleted. For the kernel families implemented here this equals
    ``eval_projected_kernel`` up to rounding.
    """
    x, y = _check_pair(x, y)
    if x.shape[0] != mask.d:
        raise ValidationError(f"point has shape {x.shape}, mask expects length {mask.d}")
    keep = list(mask.active)
    xs, ys = x[keep], y[keep]
    if spec.kind == LINEAR:
        return float(np.dot(xs, ys))
    if spec.kind == GAUSSIAN:
        return float(np.exp(-np.sum((xs - ys) ** 2) / spec.gamma**2))
    w = np.asarray(spec.weights, dtype=np.float64)
    if w.shape[0] != mask.d:
        raise ValidationError(f"{w.shape[0]} kernel weights for {mask.d}-dim points")
    return float(np.exp(-np.sum(w[keep] * (xs - ys) ** 2) / spec.gamma**2))


def kernel_matrix(spec: KernelSpec, mask: FeatureMask, X, Y) -> np.ndarray:
    """Cross-kernel matrix K[i, j] = k(pi(X_i), pi(Y_j)), shape (m, n)."""
    Xp = project_matrix(X, mask)
    Yp = project_matrix(Y, mask)
    if spec.kind == LINEAR:
        return Xp @ Yp.T
    if spec.kind == GAUSSIAN:
        sq = cdist(Xp, Yp, "sqeuclidean")
        return np.exp(-sq / spec.gamma**2)
    w = np.asarray(spec.weights, dtype=np.float64)
    if w.shape[0] != mask.d:
        raise ValidationError(f"{w.shape[0]} kernel weights for {mask.d} columns")
    sq = (Xp[:, None, :] - Yp[None, :, :]) ** 2 @ w
    return np.exp(-sq / spec.gamma**2)


def gram_matrix(spec: KernelSpec, mask: FeatureMask, X) -> np.ndarray:
    """Projected Gram matrix, exactly symmetric (one evaluation per pair)."""
    X = np.asarray(X, dtype=np.float64)
    if not np.isfinite(X).all():
        raise ValidationError("Gram input contains NaN or Inf")
    G = kernel_matrix(spec, mask, X, X)
    G = np.tril(G) + np.tril(G, -1).T
    if spec.kind in (GAUSSIAN, WEIGHTED_GAUSSIAN):
        np.fill_diagonal(G, 1.0)
    return np.ascontiguousarray(G)
