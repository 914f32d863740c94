"""Monte-Carlo study of ranking accuracy on sparse synthetic models.

Covariates are uniform on [-1, 1]^d; only the first d0 coefficients are
nonzero, drawn i.i.d. from a small pool, so the important features are known
by construction. Each replication regenerates data, tunes (lambda, gamma) by
cross-validation, ranks all features by elimination order, and counts how
many noise features outlasted an important one. Replications are seeded
independently so parallel and serial runs tally identically.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed

from .core import (
    Dataset,
    NumericalError,
    RunConfig,
    SeedStream,
    Task,
    ValidationError,
    derive_seed,
)
from .kernels import GAUSSIAN, LINEAR, KernelSpec
from .learner import EPSILON_INSENSITIVE, HINGE, LossSpec
from .rfe import Ranking, run_rfe
from .stopping import StoppingRule
from .tuning import CvConfig, cross_validate

DEFAULT_COEFFICIENT_POOL = (-1.0, -0.5, 0.5, 1.0)


class ErrorCategory(Enum):
    NONE = "none"
    ONE = "one"
    MANY = "many"


@dataclass(frozen=True)
class SimulationScenario:
    d: int
    d0: int
    n: int
    task: Task
    replications: int
    seed: int
    coefficient_pool: tuple[float, ...] = DEFAULT_COEFFICIENT_POOL
    noise_scale: float = 1.0 / 3.0
    epsilon: float = 0.1

    def __post_init__(self):
        if self.d < 1 or self.n < 1 or self.replications < 1:
            raise ValidationError("d, n, and replications must be positive")
        if not 1 <= self.d0 <= self.d:
            raise ValidationError(f"d0 must be in [1, d], got d0={self.d0}, d={self.d}")
        pool = tuple(float(c) for c in self.coefficient_pool)
        if not pool or any(c == 0.0 for c in pool):
            raise ValidationError("coefficient pool must be nonempty and zero-free")
        object.__setattr__(self, "coefficient_pool", pool)
        if self.noise_scale < 0:
            raise ValidationError("noise_scale must be nonnegative")
        if self.epsilon < 0:
            raise ValidationError("epsilon must be nonnegative")


@dataclass(frozen=True)
class RunTemplate:
    """Per-replication run setup: kernel family, loss, CV grids, solver knobs."""

    kernel_family: str
    loss: LossSpec
    cv: CvConfig = CvConfig()
    cycle_size: int = 1
    solver_tolerance: float = 1e-6
    max_solver_iterations: int = 100000
    fit_bias: bool = True
    n_jobs: int = 1

    def __post_init__(self):
        if self.kernel_family not in (GAUSSIAN, LINEAR):
            raise ValidationError(f"unsupported kernel family: {self.kernel_family!r}")


@dataclass(frozen=True)
class ErrorTally:
    none_count: int
    one_count: int
    many_count: int
    replications: int

    def __post_init__(self):
        if self.none_count + self.one_count + self.many_count != self.replications:
            raise ValidationError("tally counts must sum to the replication count")

    @property
    def proportions(self) -> tuple[float, float, float]:
        r = self.replications
        return (self.none_count / r, self.one_count / r, self.many_count / r)


@dataclass(frozen=True)
class ScenarioResult:
    scenario: SimulationScenario
    tally: ErrorTally
    records: tuple[dict, ...]


class ScenarioError(NumericalError):
    """A replication failed; ``partial`` holds the records completed so far."""

    def __init__(self, message: str, partial: list[dict]):
        super().__init__(message)
        self.partial = partial


def _draw_model(scenario: SimulationScenario, rng: np.random.Generator):
    pool = np.asarray(scenario.coefficient_pool)
    omega = np.zeros(scenario.d)
    omega[: scenario.d0] = rng.choice(pool, size=scenario.d0, replace=True)
    X = rng.uniform(-1.0, 1.0, size=(scenario.n, scenario.d))
    return omega, X


def generate_classification(scenario: SimulationScenario, replication_index: int) -> Dataset:
    """X ~ U[-1,1]^d, Y = sign(omega'X); rows with omega'X = 0 are redrawn."""
    if scenario.task is not Task.CLASSIFICATION:
        raise ValidationError("scenario task is not classification")
    rng = np.random.default_rng(
        derive_seed(SeedStream(scenario.seed, "replication"), replication_index)
    )
    omega, X = _draw_model(scenario, rng)
    margins = X @ omega
    while True:
        ties = margins == 0.0
        if not ties.any():
            break
        X[ties] = rng.uniform(-1.0, 1.0, size=(int(ties.sum()), scenario.d))
        margins[ties] = X[ties] @ omega
    y = np.where(margins > 0.0, 1.0, -1.0)
    return Dataset(X, y, Task.CLASSIFICATION)


def generate_regression(scenario: SimulationScenario, replication_index: int) -> Dataset:
    """X ~ U[-1,1]^d, Y = omega'X + noise_scale * z with scalar standard
    normal z per sample."""
    if scenario.task is not Task.REGRESSION:
        raise ValidationError("scenario task is not regression")
    rng = np.random.default_rng(
        derive_seed(SeedStream(scenario.seed, "replication"), replication_index)
    )
    omega, X = _draw_model(scenario, rng)
    y = X @ omega + scenario.noise_scale * rng.standard_normal(scenario.n)
    return Dataset(X, y, Task.REGRESSION)


def count_errors(ranking: Ranking, d0: int) -> tuple[ErrorCategory, int]:
    """Number of noise features (index >= d0) ranked above some important one.

    A noise feature counts as an error when it was not removed before every
    important feature, i.e. its importance rank exceeds the smallest
    importance rank among features 0..d0-1.
    """
    d = len(ranking.order)
    if not 1 <= d0 <= d:
        raise ValidationError(f"d0 must be in [1, d], got d0={d0}, d={d}")
    ranks = ranking.importance_rank
    weakest_important = min(ranks[i] for i in range(d0))
    errors = sum(1 for j in range(d0, d) if ranks[j] > weakest_important)
    if errors == 0:
        return ErrorCategory.NONE, 0
    if errors == 1:
        return ErrorCategory.ONE, 1
    return ErrorCategory.MANY, errors


def _run_replication(scenario: SimulationScenario, template: RunTemplate, r: int) -> dict:
    if scenario.task is Task.CLASSIFICATION:
        dataset = generate_classification(scenario, r)
    else:
        dataset = generate_regression(scenario, r)
    cv = CvConfig(
        folds=template.cv.folds,
        grid_c=template.cv.grid_c,
        grid_gamma=template.cv.grid_gamma,
        seed=derive_seed(SeedStream(scenario.seed, "cv"), r),
        score=template.cv.score,
    )
    result = cross_validate(dataset, template.kernel_family, template.loss, cv)
    kernel = (
        KernelSpec.linear()
        if template.kernel_family == LINEAR
        else KernelSpec.gaussian(result.gamma)
    )
    config = RunConfig(
        kernel=kernel,
        loss=template.loss,
        lam=result.lam,
        stopping=StoppingRule.rank_all(),
        seed=derive_seed(SeedStream(scenario.seed, "rfe"), r),
        cycle_size=template.cycle_size,
        solver_tolerance=template.solver_tolerance,
        max_solver_iterations=template.max_solver_iterations,
        fit_bias=template.fit_bias,
    )
    trace, ranking = run_rfe(dataset, config)
    category, errors = count_errors(ranking, scenario.d0)
    return {
        "replication": r,
        "lambda": result.lam,
        "gamma": result.gamma,
        "cv_score": result.score,
        "order": list(ranking.order),
        "errors": errors,
        "category": category.value,
        "non_converged_cycles": sum(1 for c in trace.cycles if c.non_converged),
    }


def _worker_count(requested: int, replications: int) -> int:
    workers = requested if requested > 0 else (os.cpu_count() or 1)
    cap = os.environ.get("RISK_RFE_THREADS")
    if cap:
        try:
            workers = min(workers, max(1, int(cap)))
        except ValueError:
            raise ValidationError(f"RISK_RFE_THREADS must be an integer, got {cap!r}")
    return max(1, min(workers, replications))


def tally_records(records: list[dict], replications: int) -> ErrorTally:
    counts = {cat: 0 for cat in ErrorCategory}
    for rec in records:
        counts[ErrorCategory(rec["category"])] += 1
    return ErrorTally(
        none_count=counts[ErrorCategory.NONE],
        one_count=counts[ErrorCategory.ONE],
        many_count=counts[ErrorCategory.MANY],
        replications=replications,
    )


def run_scenario(scenario: SimulationScenario, template: RunTemplate) -> ScenarioResult:
    """Run every replication (optionally in parallel) and tally the errors.

    Replications own derived seeds, so the tally is identical for any worker
    count. A failing replication raises ScenarioError carrying the records
    completed so far.
    """
    workers = _worker_count(template.n_jobs, scenario.replications)
    indices = range(scenario.replications)
    records: list[dict] = []
    if workers == 1:
        for r in indices:
            try:
                records.append(_run_replication(scenario, template, r))
            except Exception as exc:
                raise ScenarioError(f"replication {r} failed: {exc}", records) from exc
    else:
        def _safe(r: int) -> dict:
            try:
                return _run_replication(scenario, template, r)
            except Exception as exc:  # pragma: no cover - exercised via error path
                return {"replication": r, "error": repr(exc)}

        results = Parallel(n_jobs=workers)(delayed(_safe)(r) for r in indices)
        for rec in results:
            if "error" in rec:
                ok = [r for r in results if "error" not in r]
                raise ScenarioError(
                    f"replication {rec['replication']} failed: {rec['error']}", ok
                )
        records = list(results)
    return ScenarioResult(scenario, tally_records(records, scenario.replications), tuple(records))


def load_scenario_file(path) -> tuple[list[SimulationScenario], RunTemplate]:
    """Parse a scenario JSON spec into one scenario per sample size plus the
    shared run template."""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"scenario file not found: {path}")
    try:
        spec = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed scenario JSON: {exc}") from exc
    try:
        task = Task(spec["task"])
        kernel_family = spec["kernel"]
        d = int(spec["d"])
        d0 = int(spec["d0"])
        sizes = [int(n) for n in spec["sample_sizes"]]
        replications = int(spec["replications"])
        seed = int(spec.get("seed", 0))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed scenario spec: {exc}") from exc
    if not sizes:
        raise ValidationError("scenario needs at least one sample size")
    epsilon = float(spec.get("epsilon", 0.1))
    scenarios = [
        SimulationScenario(
            d=d,
            d0=d0,
            n=n,
            task=task,
            replications=replications,
            seed=seed,
            coefficient_pool=tuple(spec.get("coefficient_pool", DEFAULT_COEFFICIENT_POOL)),
            noise_scale=float(spec.get("noise_scale", 1.0 / 3.0)),
            epsilon=epsilon,
        )
        for n in sizes
    ]
    if task is Task.CLASSIFICATION:
        loss = LossSpec.hinge()
    else:
        loss = LossSpec.epsilon_insensitive(epsilon)
    cv_spec = spec.get("cv", {})
    cv = CvConfig(
        folds=int(cv_spec.get("folds", 5)),
        grid_c=tuple(cv_spec.get("grid_c", (0.01, 0.1, 1.0, 10.0, 100.0))),
        grid_gamma=tuple(cv_spec.get("grid_gamma", (1.0, 2.0, 3.0, 4.0))),
    )
    template = RunTemplate(
        kernel_family=kernel_family,
        loss=loss,
        cv=cv,
        cycle_size=int(spec.get("cycle_size", 1)),
        solver_tolerance=float(spec.get("solver_tolerance", 1e-6)),
        max_solver_iterations=int(spec.get("max_solver_iterations", 100000)),
        fit_bias=bool(spec.get("fit_bias", True)),
        n_jobs=int(spec.get("n_jobs", 1)),
    )
    return scenarios, template


def table_rows(results: list[ScenarioResult]) -> list[list]:
    """Accuracy-table rows: one column per sample size, one row per outcome."""
    header = ["proportion"] + [f"n={res.scenario.n}" for res in results]
    labels = ("no_errors", "one_error", "many_errors")
    rows: list[list] = [header]
    for k, label in enumerate(labels):
        rows.append([label] + [res.tally.proportions[k] for res in results])
    return rows
