import json

import numpy as np
import pytest

from oracles import kernel_objective
from riskrfe import (
    Dataset,
    FeatureMask,
    KernelSpec,
    LossSpec,
    ObjectiveValue,
    Ranking,
    RfeTrace,
    RunConfig,
    StoppingRule,
    Task,
    ValidationError,
    evaluate_candidates,
    gram_matrix,
    rfe_step,
    run_rfe,
    scree_csv_rows,
)


def _obj(value: float) -> ObjectiveValue:
    return ObjectiveValue(value, 0.0, value)


def test_rfe_step_tie_to_lowest_index():
    candidates = {2: _obj(0.50), 0: _obj(0.50), 1: _obj(0.90)}
    removed, best_delta = rfe_step(candidates, _obj(0.30), 1)
    assert removed == [0]
    assert best_delta == pytest.approx(0.20)


def test_rfe_step_cycle_size_two():
    candidates = {2: _obj(0.50), 0: _obj(0.50), 1: _obj(0.90)}
    removed, best_delta = rfe_step(candidates, _obj(0.30), 2)
    assert removed == [0, 2]
    assert best_delta == pytest.approx(0.20)


def test_rfe_step_single_candidate():
    removed, _ = rfe_step({4: _obj(1.0)}, _obj(0.5), 1)
    assert removed == [4]
    with pytest.raises(ValidationError):
        rfe_step({}, _obj(0.5), 1)


def _config(kernel, loss, lam, stopping=None, **kw):
    return RunConfig(
        kernel=kernel,
        loss=loss,
        lam=lam,
        stopping=stopping or StoppingRule.rank_all(),
        **kw,
    )


def test_zero_column_candidate_is_neutral():
    """Masking an all-zero column leaves the Gram, and hence the candidate
    objective, exactly unchanged."""
    rng = np.random.default_rng(4)
    X = rng.uniform(-1, 1, (12, 2))
    X = np.column_stack([X, np.zeros(12)])
    y = np.where(X[:, 0] > 0, 1.0, -1.0)
    ds = Dataset(X, y, Task.CLASSIFICATION)
    config = _config(KernelSpec.gaussian(1.0), LossSpec.hinge(), 0.05)
    candidates = evaluate_candidates(ds, config, FeatureMask(3))
    from riskrfe.rfe import _objective_for_mask

    before, _ = _objective_for_mask(ds, config, FeatureMask(3))
    assert candidates[2].regularized == before.regularized
    assert candidates[2].empirical_risk == before.empirical_risk


def test_single_feature_candidate_map():
    ds = Dataset(np.array([[1.0], [2.0]]), np.array([1.0, 2.0]), Task.REGRESSION)
    config = _config(KernelSpec.linear(), LossSpec.squared_error(), 0.1)
    candidates = evaluate_candidates(ds, config, FeatureMask(1))
    assert set(candidates) == {0}


def test_candidates_match_brute_force_oracle(toy_classification):
    """Candidate objectives for y=sign(x0) data: noise candidates near the
    baseline, the informative candidate strictly larger; every value checked
    against the primal QP oracle."""
    ds = toy_classification
    lam = 0.05
    kernel = KernelSpec.gaussian(1.5)
    config = _config(kernel, LossSpec.hinge(), lam, solver_tolerance=1e-10)
    candidates = evaluate_candidates(ds, config, FeatureMask(3))
    from riskrfe.rfe import _objective_for_mask

    before, _ = _objective_for_mask(ds, config, FeatureMask(3))
    for i, obj in candidates.items():
        G = gram_matrix(kernel, FeatureMask(3, (i,)), ds.features)
        oracle = kernel_objective(G, ds.targets, lam, None, "hinge")
        assert obj.regularized == pytest.approx(oracle, abs=1e-5)
    gap_noise = max(abs(candidates[i].regularized - before.regularized) for i in (1, 2))
    gap_signal = candidates[0].regularized - before.regularized
    assert gap_signal > 3 * gap_noise
    assert max(candidates, key=lambda i: candidates[i].regularized) == 0


def test_run_rfe_ranks_informative_feature_last(toy_classification):
    config = _config(
        KernelSpec.gaussian(1.5), LossSpec.hinge(), 0.05, solver_tolerance=1e-10
    )
    trace, ranking = run_rfe(toy_classification, config)
    assert ranking.order[-1] == 0
    assert trace.stop_reason == "rank-all"
    # greedy choice agrees with exhaustive refits at every cycle
    for record in trace.cycles:
        best = min(
            record.candidate_objectives,
            key=lambda i: (record.candidate_objectives[i].regularized, i),
        )
        assert record.removed[0] == best


def test_run_rfe_trace_invariants(toy_regression):
    config = _config(KernelSpec.linear(), LossSpec.epsilon_insensitive(0.05), 0.01)
    trace, ranking = run_rfe(toy_regression, config)
    removed_sets = [set(c.removed) for c in trace.cycles]
    union = set()
    for s in removed_sets:
        assert not (union & s)
        union |= s
    assert union == set(trace.final_mask.removed)
    assert sorted(ranking.order) == [0, 1, 2]
    for record in trace.cycles:
        expected = min(o.regularized for o in record.candidate_objectives.values())
        assert record.best_delta == pytest.approx(
            expected - record.objective_before.regularized, abs=1e-15
        )


def test_run_rfe_deterministic_bytes(toy_regression):
    config = _config(KernelSpec.gaussian(1.0), LossSpec.squared_error(), 0.1)
    t1, r1 = run_rfe(toy_regression, config)
    t2, r2 = run_rfe(toy_regression, config)
    assert json.dumps(t1.to_dict(), sort_keys=True) == json.dumps(t2.to_dict(), sort_keys=True)
    assert r1.order == r2.order


def test_duplicated_feature_low_delta():
    """A duplicated column can be removed nearly for free (dot-product
    kernel, tiny regularization); either duplicate gives the same objective."""
    rng = np.random.default_rng(6)
    x0 = rng.uniform(-1, 1, 25)
    x2 = rng.uniform(-1, 1, 25)
    X = np.column_stack([x0, x0, x2])
    y = 2.0 * x0 + 0.5 * x2
    ds = Dataset(X, y, Task.REGRESSION)
    lam = 1e-8
    config = _config(KernelSpec.linear(), LossSpec.squared_error(), lam)
    candidates = evaluate_candidates(ds, config, FeatureMask(3))
    assert candidates[0].regularized == pytest.approx(candidates[1].regularized, abs=1e-10)
    from riskrfe.rfe import _objective_for_mask

    before, _ = _objective_for_mask(ds, config, FeatureMask(3))
    assert candidates[0].regularized - before.regularized <= 1e-6


def test_threshold_stop_single_feature_retained():
    """d=1 with an informative feature: removing it costs a lot, so a small
    threshold stops at cycle 0 with nothing removed."""
    rng = np.random.default_rng(8)
    x = rng.uniform(-1, 1, 20)
    ds = Dataset(x[:, None], 2.0 * x, Task.REGRESSION)
    config = _config(
        KernelSpec.linear(),
        LossSpec.squared_error(),
        0.01,
        stopping=StoppingRule.fixed_threshold(0.01),
    )
    trace, ranking = run_rfe(ds, config)
    assert trace.stopped_early
    assert trace.stop_reason == "threshold-exceeded"
    assert trace.final_mask.removed == ()
    assert len(trace.cycles) == 1
    assert trace.cycles[0].removed == ()
    assert trace.cycles[0].best_delta > 0.01
    assert ranking.order == (0,)


def test_threshold_stop_keeps_informative_feature(toy_classification):
    """A tiny threshold fires as soon as a removal would cost anything, so
    the informative feature survives."""
    config = _config(
        KernelSpec.gaussian(1.5),
        LossSpec.hinge(),
        0.05,
        stopping=StoppingRule.fixed_threshold(1e-6),
    )
    trace, _ = run_rfe(toy_classification, config)
    assert trace.stopped_early
    assert trace.stop_reason == "threshold-exceeded"
    assert 0 in trace.final_mask.active
    assert trace.cycles[-1].best_delta > 1e-6
    assert trace.cycles[-1].removed == ()


def test_unreachable_threshold_removes_everything(toy_classification):
    """A threshold above any attainable delta never fires: every feature is
    eventually removed and the run ends with reason all-removed."""
    config = _config(
        KernelSpec.gaussian(1.5),
        LossSpec.hinge(),
        0.05,
        stopping=StoppingRule.fixed_threshold(1e9),
    )
    trace, _ = run_rfe(toy_classification, config)
    assert not trace.stopped_early
    assert trace.stop_reason == "all-removed"
    assert trace.final_mask.n_active == 0


def test_erm_rate_stop(toy_classification):
    """With c large the n^(-1/2) threshold exceeds every delta -> all removed;
    with c tiny it stops immediately."""
    big = _config(
        KernelSpec.gaussian(1.5),
        LossSpec.hinge(),
        0.05,
        stopping=StoppingRule.erm_rate(1e6),
    )
    trace, _ = run_rfe(toy_classification, big)
    assert trace.stop_reason == "all-removed"
    small = _config(
        KernelSpec.gaussian(1.5),
        LossSpec.hinge(),
        0.05,
        stopping=StoppingRule.erm_rate(1e-6),
    )
    trace, _ = run_rfe(toy_classification, small)
    assert trace.stop_reason == "threshold-exceeded"
    assert 0 in trace.final_mask.active


def test_linear_erm_reduction_compares_risk_alone(toy_regression):
    config = _config(
        KernelSpec.linear(), LossSpec.squared_error(), 1.0, learner="linear-erm"
    )
    trace, ranking = run_rfe(toy_regression, config)
    for record in trace.cycles:
        for obj in record.candidate_objectives.values():
            assert obj.rkhs_norm_sq == 0.0
            assert obj.regularized == obj.empirical_risk
    # informative features outlast the noise feature
    assert ranking.order[0] == 2


def test_linear_kernel_objective_monotone_across_cycles(toy_regression):
    """Nested hypothesis spaces for dot-product kernels: the baseline
    objective never decreases as features are removed."""
    config = _config(KernelSpec.linear(), LossSpec.squared_error(), 0.01)
    trace, _ = run_rfe(toy_regression, config)
    values = [c.objective_before.regularized for c in trace.cycles]
    assert all(values[k + 1] >= values[k] - 1e-6 for k in range(len(values) - 1))


def test_cycle_size_two_runs(toy_regression):
    config = _config(
        KernelSpec.linear(), LossSpec.squared_error(), 0.1, cycle_size=2
    )
    trace, ranking = run_rfe(toy_regression, config)
    assert len(trace.cycles[0].removed) == 2
    assert trace.final_mask.n_active == 0
    assert sorted(ranking.order) == [0, 1, 2]


def test_cycle_size_larger_than_d_rejected(toy_regression):
    config = _config(KernelSpec.linear(), LossSpec.squared_error(), 0.1, cycle_size=4)
    with pytest.raises(ValidationError):
        run_rfe(toy_regression, config)


def test_permutation_covariance():
    rng = np.random.default_rng(14)
    X = rng.uniform(-1, 1, (30, 4))
    y = 2.0 * X[:, 1] - X[:, 3] + 0.01 * rng.standard_normal(30)
    perm = [2, 0, 3, 1]
    ds = Dataset(X, y, Task.REGRESSION)
    ds_perm = Dataset(X[:, perm], y, Task.REGRESSION)
    config = _config(KernelSpec.linear(), LossSpec.squared_error(), 0.01)
    _, ranking = run_rfe(ds, config)
    _, ranking_perm = run_rfe(ds_perm, config)
    remapped = [perm.index(f) for f in ranking.order]
    assert list(ranking_perm.order) == remapped


def test_ranking_from_order_validation():
    with pytest.raises(ValidationError):
        Ranking.from_order([0, 0, 1])
    r = Ranking.from_order([2, 0, 1])
    assert r.importance_rank == (1, 2, 0)


def test_trace_json_round_trip(toy_regression):
    config = _config(KernelSpec.linear(), LossSpec.squared_error(), 0.1)
    trace, _ = run_rfe(toy_regression, config)
    back = RfeTrace.from_dict(json.loads(json.dumps(trace.to_dict())))
    assert back == trace
    rows = scree_csv_rows(back)
    assert len(rows) == 3
    assert [r[0] for r in rows] == [0, 1, 2]
