"""The risk-based recursive feature elimination engine.

Each cycle refits the learner once per remaining feature with that feature
additionally masked, removes the candidate(s) whose objective is smallest
(ties to the lowest index), and records everything needed for ranking,
stopping, and scree plots. With the "linear-erm" learner the compared
quantity degenerates to the empirical risk alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset, FeatureMask, RunConfig, Task, ValidationError
from .kernels import LINEAR, gram_matrix, project_matrix
from .learner import HINGE, ObjectiveValue, fit, fit_linear_erm
from .stopping import should_stop

STOP_THRESHOLD = "threshold-exceeded"
STOP_ALL_REMOVED = "all-removed"
STOP_RANK_ALL = "rank-all"


@dataclass(frozen=True)
class CycleRecord:
    """One elimination cycle: every candidate refit and what was removed."""

    cycle_index: int
    candidate_objectives: dict[int, ObjectiveValue]
    removed: tuple[int, ...]
    objective_before: ObjectiveValue
    best_delta: float
    non_converged: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return {
            "cycle_index": self.cycle_index,
            "candidate_objectives": {
                str(i): obj.to_dict() for i, obj in sorted(self.candidate_objectives.items())
            },
            "removed": list(self.removed),
            "objective_before": self.objective_before.to_dict(),
            "best_delta": self.best_delta,
            "non_converged": list(self.non_converged),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CycleRecord":
        return cls(
            cycle_index=data["cycle_index"],
            candidate_objectives={
                int(i): ObjectiveValue.from_dict(obj)
                for i, obj in data["candidate_objectives"].items()
            },
            removed=tuple(data["removed"]),
            objective_before=ObjectiveValue.from_dict(data["objective_before"]),
            best_delta=data["best_delta"],
            non_converged=tuple(data.get("non_converged", ())),
        )


@dataclass(frozen=True)
class RfeTrace:
    cycles: tuple[CycleRecord, ...]
    final_mask: FeatureMask
    stopped_early: bool
    stop_reason: str

    def to_dict(self) -> dict:
        return {
            "index_base": 0,
            "cycles": [c.to_dict() for c in self.cycles],
            "final_mask": self.final_mask.to_dict(),
            "stopped_early": self.stopped_early,
            "stop_reason": self.stop_reason,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RfeTrace":
        return cls(
            cycles=tuple(CycleRecord.from_dict(c) for c in data["cycles"]),
            final_mask=FeatureMask.from_dict(data["final_mask"]),
            stopped_early=data["stopped_early"],
            stop_reason=data["stop_reason"],
        )


@dataclass(frozen=True)
class Ranking:
    """Removal order (earliest-removed first) and its inverse view.

    ``importance_rank[f]`` is f's position in the order; a larger rank means
    the feature survived longer and is deemed more important. Survivors of an
    early stop occupy the final positions, ordered by their candidate
    objective at the stopping cycle (largest last); this survivor ordering is
    a declared extension beyond the removal-order ranking.
    """

    order: tuple[int, ...]
    importance_rank: tuple[int, ...]

    @classmethod
    def from_order(cls, order) -> "Ranking":
        order = tuple(int(i) for i in order)
        d = len(order)
        if sorted(order) != list(range(d)):
            raise ValidationError("ranking order must be a permutation of 0..d-1")
        inverse = [0] * d
        for position, feature in enumerate(order):
            inverse[feature] = position
        return cls(order=order, importance_rank=tuple(inverse))

    @classmethod
    def from_trace(cls, trace: RfeTrace) -> "Ranking":
        order = [i for record in trace.cycles for i in record.removed]
        survivors = trace.final_mask.active
        if survivors:
            last = trace.cycles[-1].candidate_objectives
            order.extend(sorted(survivors, key=lambda i: (last[i].regularized, i)))
        return cls.from_order(order)

    def to_dict(self) -> dict:
        return {
            "index_base": 0,
            "order": list(self.order),
            "importance_rank": list(self.importance_rank),
            "survivor_ordering": "candidate objective at the stopping cycle (declared extension)",
        }


def _objective_for_mask(
    dataset: Dataset, config: RunConfig, mask: FeatureMask, gram: np.ndarray | None = None
) -> tuple[ObjectiveValue, bool]:
    if config.learner == "linear-erm":
        model = fit_linear_erm(dataset, mask)
        risk = model.empirical_risk
        return ObjectiveValue(risk, 0.0, risk), True
    kernel_model = fit(
        dataset,
        mask,
        config.kernel,
        config.loss,
        config.lam,
        tol=config.solver_tolerance,
        max_iter=config.max_solver_iterations,
        fit_bias=config.fit_bias,
        gram=gram,
    )
    return kernel_model.objective, kernel_model.converged


def _evaluate(
    dataset: Dataset, config: RunConfig, mask: FeatureMask
) -> tuple[dict[int, ObjectiveValue], tuple[int, ...]]:
    active = mask.active
    if not active:
        raise ValidationError("no active features left to evaluate")
    use_gram_update = config.learner == "kernel" and config.kernel.kind == LINEAR
    if use_gram_update:
        base = gram_matrix(config.kernel, mask, dataset.features)
        Xp = project_matrix(dataset.features, mask)
    objectives: dict[int, ObjectiveValue] = {}
    flagged: list[int] = []
    for i in active:
        candidate = mask.with_removed(i)
        gram = None
        if use_gram_update:
            col = Xp[:, i]
            gram = base - np.outer(col, col)
        obj, converged = _objective_for_mask(dataset, config, candidate, gram=gram)
        objectives[i] = obj
        if not converged:
            flagged.append(i)
    return objectives, tuple(flagged)


def evaluate_candidates(
    dataset: Dataset, config: RunConfig, current_mask: FeatureMask
) -> dict[int, ObjectiveValue]:
    """Objective of one refit per active feature, with that feature masked too."""
    objectives, _ = _evaluate(dataset, config, current_mask)
    return objectives


def rfe_step(
    candidates: dict[int, ObjectiveValue],
    objective_before: ObjectiveValue,
    cycle_size: int,
) -> tuple[list[int], float]:
    """Pick the features to delete this cycle.

    Candidates are ordered by ascending regularized objective, ties to the
    lowest feature index; the first min(cycle_size, #candidates) are removed.
    best_delta always comes from the single smallest candidate.
    """
    if not candidates:
        raise ValidationError("rfe_step needs at least one candidate")
    if cycle_size < 1:
        raise ValidationError(f"cycle_size must be >= 1, got {cycle_size}")
    ranked = sorted(candidates, key=lambda i: (candidates[i].regularized, i))
    removed = ranked[: min(cycle_size, len(ranked))]
    best_delta = candidates[ranked[0]].regularized - objective_before.regularized
    return removed, best_delta


def _validate_config(dataset: Dataset, config: RunConfig) -> None:
    if config.cycle_size > dataset.d:
        raise ValidationError(
            f"cycle_size {config.cycle_size} exceeds feature count {dataset.d}"
        )
    if config.learner == "linear-erm":
        if dataset.task is not Task.REGRESSION:
            raise ValidationError("the linear-erm learner expects a regression dataset")
    elif (dataset.task is Task.CLASSIFICATION) != (config.loss.kind == HINGE):
        raise ValidationError("classification requires the hinge loss and vice versa")


def run_rfe(dataset: Dataset, config: RunConfig) -> tuple[RfeTrace, Ranking]:
    """Greedy backward elimination until the stopping rule fires or no
    features remain. Deterministic given (dataset, config)."""
    _validate_config(dataset, config)
    n = dataset.n
    mask = FeatureMask.empty(dataset.d)
    objective_before, _ = _objective_for_mask(dataset, config, mask)
    cycles: list[CycleRecord] = []
    stopped_early = False
    reason = None
    cycle_index = 0
    while mask.n_active > 0:
        candidates, flagged = _evaluate(dataset, config, mask)
        removed, best_delta = rfe_step(candidates, objective_before, config.cycle_size)
        if config.stopping.in_loop and should_stop(config.stopping, best_delta, n):
            cycles.append(
                CycleRecord(cycle_index, candidates, (), objective_before, best_delta, flagged)
            )
            stopped_early = True
            reason = STOP_THRESHOLD
            break
        cycles.append(
            CycleRecord(
                cycle_index, candidates, tuple(removed), objective_before, best_delta, flagged
            )
        )
        mask = mask.with_removed(removed)
        if mask.n_active == 0:
            break
        if len(removed) == 1:
            objective_before = candidates[removed[0]]
        else:
            objective_before, _ = _objective_for_mask(dataset, config, mask)
        cycle_index += 1
    if reason is None:
        reason = STOP_RANK_ALL if not config.stopping.in_loop else STOP_ALL_REMOVED
    trace = RfeTrace(tuple(cycles), mask, stopped_early, reason)
    return trace, Ranking.from_trace(trace)


def scree_csv_rows(trace: RfeTrace) -> list[tuple[int, float, float]]:
    """(cycle_index, objective_after, best_delta) rows for the scree CSV."""
    rows = []
    for record in trace.cycles:
        objective_after = min(o.regularized for o in record.candidate_objectives.values())
        rows.append((record.cycle_index, objective_after, record.best_delta))
    return rows
