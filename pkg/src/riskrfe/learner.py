"""Loss functions and regularized-risk solvers.

Kernel models minimize  lambda * ||f||^2_H + (1/n) sum L(y_i, f(x_i))  over
the RKHS of the projected kernel, in representer form
f(x) = sum_i alpha_i k(pi(x), pi(x_i)) + b. Hinge and epsilon-insensitive
losses go through the working-set dual solver with box constant
C = 1/(2 n lambda); squared error is a direct dense solve. The unregularized
linear least-squares learner backs the plain-ERM elimination path.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import solvers
from .core import Dataset, FeatureMask, Task, ValidationError
from .kernels import LINEAR, KernelSpec, gram_matrix, kernel_matrix

HINGE = "hinge"
SQUARED = "squared-error"
EPSILON_INSENSITIVE = "epsilon-insensitive"


@dataclass(frozen=True)
class LossSpec:
    kind: str
    epsilon: float | None = None

    def __post_init__(self):
        if self.kind not in (HINGE, SQUARED, EPSILON_INSENSITIVE):
            raise ValidationError(f"unknown loss kind: {self.kind!r}")
        if self.kind == EPSILON_INSENSITIVE:
            if self.epsilon is None or self.epsilon < 0:
                raise ValidationError(f"epsilon must be >= 0, got {self.epsilon}")
        elif self.epsilon is not None:
            raise ValidationError(f"{self.kind} loss takes no epsilon")

    @classmethod
    def hinge(cls) -> "LossSpec":
        return cls(HINGE)

    @classmethod
    def squared_error(cls) -> "LossSpec":
        return cls(SQUARED)

    @classmethod
    def epsilon_insensitive(cls, epsilon: float) -> "LossSpec":
        return cls(EPSILON_INSENSITIVE, epsilon=float(epsilon))

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.epsilon is not None:
            out["epsilon"] = self.epsilon
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "LossSpec":
        return cls(data["kind"], epsilon=data.get("epsilon"))


def loss_value(spec: LossSpec, y: float, t: float) -> float:
    """Pointwise loss L(y, t) for target y and predicted value t."""
    if spec.kind == HINGE:
        return max(0.0, 1.0 - y * t)
    if spec.kind == SQUARED:
        return (t - y) ** 2
    return max(0.0, abs(y - t) - spec.epsilon)


def _loss_vector(spec: LossSpec, predictions: np.ndarray, targets: np.ndarray) -> np.ndarray:
    if spec.kind == HINGE:
        return np.maximum(0.0, 1.0 - targets * predictions)
    if spec.kind == SQUARED:
        return (predictions - targets) ** 2
    return np.maximum(0.0, np.abs(targets - predictions) - spec.epsilon)


def empirical_risk(spec: LossSpec, predictions, targets) -> float:
    """Mean loss over (prediction, target) pairs."""
    predictions = np.asarray(predictions, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if predictions.shape != targets.shape or predictions.ndim != 1:
        raise ValidationError(
            f"length mismatch: {predictions.shape} predictions vs {targets.shape} targets"
        )
    if predictions.shape[0] < 1:
        raise ValidationError("empirical risk needs at least one pair")
    return float(np.mean(_loss_vector(spec, predictions, targets)))


@dataclass(frozen=True)
class ObjectiveValue:
    """Decomposition of the regularized objective at a fitted model."""

    empirical_risk: float
    rkhs_norm_sq: float
    regularized: float

    def to_dict(self) -> dict:
        return {
            "empirical_risk": self.empirical_risk,
            "rkhs_norm_sq": self.rkhs_norm_sq,
            "regularized": self.regularized,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ObjectiveValue":
        return cls(data["empirical_risk"], data["rkhs_norm_sq"], data["regularized"])


@dataclass(frozen=True, eq=False)
class RegularizedModel:
    """A fitted kernel expansion plus its independently recomputed objective."""

    dual_coefficients: np.ndarray
    bias: float
    mask: FeatureMask
    lam: float
    kernel: KernelSpec
    loss: LossSpec
    training_points: np.ndarray
    objective: ObjectiveValue
    converged: bool
    iterations: int
    kkt_violation: float
    fit_bias: bool = True

    def to_dict(self) -> dict:
        return {
            "dual_coefficients": self.dual_coefficients.tolist(),
            "bias": self.bias,
            "mask": self.mask.to_dict(),
            "lambda": self.lam,
            "kernel": self.kernel.to_dict(),
            "loss": self.loss.to_dict(),
            "training_points": self.training_points.tolist(),
            "objective": self.objective.to_dict(),
            "converged": self.converged,
            "iterations": self.iterations,
            "kkt_violation": self.kkt_violation,
            "fit_bias": self.fit_bias,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RegularizedModel":
        return cls(
            dual_coefficients=np.asarray(data["dual_coefficients"], dtype=np.float64),
            bias=data["bias"],
            mask=FeatureMask.from_dict(data["mask"]),
            lam=data["lambda"],
            kernel=KernelSpec.from_dict(data["kernel"]),
            loss=LossSpec.from_dict(data["loss"]),
            training_points=np.asarray(data["training_points"], dtype=np.float64),
            objective=ObjectiveValue.from_dict(data["objective"]),
            converged=data["converged"],
            iterations=data["iterations"],
            kkt_violation=data["kkt_violation"],
            fit_bias=data["fit_bias"],
        )


@dataclass(frozen=True, eq=False)
class LinearModel:
    """Ordinary least squares restricted to the active columns."""

    weights: np.ndarray
    bias: float
    mask: FeatureMask
    empirical_risk: float
    rank_deficient: bool = False


def _hinge_dual(G, y, lam, tol, max_iter, fit_bias):
    n = y.shape[0]
    C = 1.0 / (2.0 * n * lam)
    Q = np.ascontiguousarray((y[:, None] * y[None, :]) * G)
    p = np.full(n, -1.0)
    if fit_bias:
        beta, bias, iters, viol = solvers.smo_solve(Q, p, y, C, tol, max_iter)
    else:
        beta, bias, iters, viol = solvers.box_solve(Q, p, C, tol, max_iter)
    return beta * y, bias, iters, viol


def _svr_dual(G, y, lam, eps, tol, max_iter, fit_bias):
    n = y.shape[0]
    C = 1.0 / (2.0 * n * lam)
    yhat = np.concatenate([np.ones(n), -np.ones(n)])
    K2 = np.block([[G, G], [G, G]])
    Q = np.ascontiguousarray((yhat[:, None] * yhat[None, :]) * K2)
    p = np.concatenate([eps - y, eps + y])
    if fit_bias:
        beta, bias, iters, viol = solvers.smo_solve(Q, p, yhat, C, tol, max_iter)
    else:
        beta, bias, iters, viol = solvers.box_solve(Q, p, C, tol, max_iter)
    return beta[:n] - beta[n:], bias, iters, viol


def _ridge_solve(G, y, lam, fit_bias):
    n = y.shape[0]
    reg = G + n * lam * np.eye(n)
    if fit_bias:
        A = np.zeros((n + 1, n + 1))
        A[:n, :n] = reg
        A[:n, n] = 1.0
        A[n, :n] = 1.0
        rhs = np.concatenate([y, [0.0]])
    else:
        A = reg
        rhs = y
    try:
        sol = np.linalg.solve(A, rhs)
        singular = not np.isfinite(sol).all()
    except np.linalg.LinAlgError:
        singular = True
    if singular:
        warnings.warn("singular ridge system; regularizing diagonal by 1e-12")
        sol = np.linalg.solve(A + 1e-12 * np.eye(A.shape[0]), rhs)
    if fit_bias:
        return sol[:n], float(sol[n])
    return sol, 0.0


def _objective_from_scratch(G, coef, bias, lam, loss, targets) -> ObjectiveValue:
    predictions = G @ coef + bias
    risk = empirical_risk(loss, predictions, targets)
    norm_sq = float(coef @ G @ coef)
    if norm_sq < 0.0:
        # PSD Gram: any negativity is rounding noise.
        norm_sq = 0.0
    return ObjectiveValue(risk, norm_sq, lam * norm_sq + risk)


def fit(
    dataset: Dataset,
    mask: FeatureMask,
    kernel: KernelSpec,
    loss: LossSpec,
    lam: float,
    tol: float = 1e-8,
    max_iter: int = 100000,
    fit_bias: bool = True,
    gram: np.ndarray | None = None,
) -> RegularizedModel:
    """Fit the regularized kernel model on the masked feature space.

    ``gram`` optionally supplies a precomputed projected Gram matrix (the
    elimination engine reuses rank-one updates for the linear kernel); when
    given it must equal ``gram_matrix(kernel, mask, dataset.features)``.
    The returned objective is always recomputed from the coefficients, not
    taken from solver internals.
    """
    if mask.d != dataset.d:
        raise ValidationError(f"mask is for d={mask.d}, dataset has d={dataset.d}")
    if not lam > 0:
        raise ValidationError(f"lambda must be positive, got {lam}")
    if (dataset.task is Task.CLASSIFICATION) != (loss.kind == HINGE):
        raise ValidationError("classification requires the hinge loss and vice versa")
    y = dataset.targets
    G = gram if gram is not None else gram_matrix(kernel, mask, dataset.features)
    if loss.kind == HINGE:
        coef, bias, iters, viol = _hinge_dual(G, y, lam, tol, max_iter, fit_bias)
        converged = viol <= tol
    elif loss.kind == EPSILON_INSENSITIVE:
        coef, bias, iters, viol = _svr_dual(G, y, lam, loss.epsilon, tol, max_iter, fit_bias)
        converged = viol <= tol
    else:
        coef, bias = _ridge_solve(G, y, lam, fit_bias)
        iters, viol, converged = 0, 0.0, True
    if not fit_bias:
        bias = 0.0
    objective = _objective_from_scratch(G, coef, bias, lam, loss, y)
    return RegularizedModel(
        dual_coefficients=coef,
        bias=float(bias),
        mask=mask,
        lam=lam,
        kernel=kernel,
        loss=loss,
        training_points=dataset.features,
        objective=objective,
        converged=bool(converged),
        iterations=int(iters),
        kkt_violation=float(viol),
        fit_bias=fit_bias,
    )


def predict(model: RegularizedModel, X) -> np.ndarray:
    """Evaluate the kernel expansion at the rows of X."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.mask.d:
        raise ValidationError(f"query has {X.shape[1]} columns, model expects {model.mask.d}")
    K = kernel_matrix(model.kernel, model.mask, X, model.training_points)
    return K @ model.dual_coefficients + model.bias


def predict_labels(model: RegularizedModel, X) -> np.ndarray:
    """Classification decision: sign of the prediction, with sign(0) = +1."""
    return np.where(predict(model, X) >= 0.0, 1.0, -1.0)


def fit_linear_erm(dataset: Dataset, mask: FeatureMask) -> LinearModel:
    """Unregularized least squares on the active columns (removed weights 0).

    Empirical risk is the mean squared residual. Rank-deficient designs fall
    back to the minimum-norm solution (singular values below 1e-10 of the
    largest are dropped) and the model is flagged.
    """
    if mask.d != dataset.d:
        raise ValidationError(f"mask is for d={mask.d}, dataset has d={dataset.d}")
    if dataset.task is not Task.REGRESSION:
        raise ValidationError("linear ERM expects a regression dataset")
    X, y = dataset.features, dataset.targets
    active = list(mask.active)
    A = np.column_stack([X[:, active], np.ones(dataset.n)])
    sol, _, rank, _ = np.linalg.lstsq(A, y, rcond=1e-10)
    rank_deficient = rank < A.shape[1]
    weights = np.zeros(dataset.d)
    weights[active] = sol[:-1]
    bias = float(sol[-1])
    residuals = y - (X @ weights + bias)
    risk = float(np.mean(residuals**2))
    return LinearModel(
        weights=weights,
        bias=bias,
        mask=mask,
        empirical_risk=risk,
        rank_deficient=bool(rank_deficient),
    )
