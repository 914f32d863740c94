"""Release gate: every contract criterion at its stated tolerance.

One test per criterion; each prints a PASS line with the measured numbers
(run with ``pytest -s`` or ``-rA`` to see them). The Monte-Carlo criteria use
frozen seeds, default grids, and the worker cap from RISK_RFE_THREADS.
"""

import numpy as np
import pytest

from oracles import (
    hinge_primal_objective,
    kernel_objective,
    polyfit_change_point,
    ridge_centered_solution,
    svr_primal_objective,
)
from riskrfe import (
    CvConfig,
    Dataset,
    FeatureMask,
    KernelSpec,
    LossSpec,
    RunConfig,
    RunTemplate,
    SimulationScenario,
    StoppingRule,
    Task,
    delta_schedule,
    deleted_kernel_equivalent,
    eval_projected_kernel,
    fit,
    fit_change_point,
    generate_regression,
    gram_matrix,
    run_rfe,
    run_scenario,
)

SCENARIO_SEED = 1


def _announce(criterion: str, detail: str) -> None:
    print(f"\n[{criterion}] PASS: {detail}")


def _template(kernel_family, loss, max_iter):
    return RunTemplate(
        kernel_family=kernel_family,
        loss=loss,
        cv=CvConfig(folds=5),
        solver_tolerance=1e-6,
        max_solver_iterations=max_iter,
        n_jobs=-1,
    )


def _classification_cell(d, d0, n, reps):
    scenario = SimulationScenario(
        d=d, d0=d0, n=n, task=Task.CLASSIFICATION, replications=reps, seed=SCENARIO_SEED
    )
    template = _template("gaussian", LossSpec.hinge(), max_iter=200000)
    return run_scenario(scenario, template).tally.proportions[0]


def test_criterion_1_svr_linear_accuracy():
    """SVR with a linear kernel recovers the important features nearly always
    at n=200 (reduced-scale version of the reference table)."""
    template = _template("linear", LossSpec.epsilon_insensitive(0.1), max_iter=60000)
    rates = {}
    for d, d0 in ((15, 4), (30, 7)):
        scenario = SimulationScenario(
            d=d, d0=d0, n=200, task=Task.REGRESSION, replications=20, seed=SCENARIO_SEED
        )
        rates[(d, d0)] = run_scenario(scenario, template).tally.proportions[0]
        assert rates[(d, d0)] >= 0.95, f"(d={d}, d0={d0}): {rates[(d, d0)]}"
    _announce(
        "criterion 1",
        "SVR linear no-error proportions "
        f"d=15: {rates[(15, 4)]:.2f}, d=30: {rates[(30, 7)]:.2f} (threshold 0.95)",
    )


def test_criterion_2_gaussian_svm_accuracy():
    """Gaussian-kernel classification: reduced-scale accuracy plus the
    monotone improvement with sample size."""
    p400 = _classification_cell(15, 4, 400, 20)
    assert p400 >= 0.90, f"(d=15, n=400): {p400}"
    p_hard = _classification_cell(30, 7, 100, 30)
    assert 0.62 - 0.25 <= p_hard <= 0.62 + 0.25, f"(d=30, n=100): {p_hard}"
    p100 = _classification_cell(15, 4, 100, 20)
    p200 = _classification_cell(15, 4, 200, 20)
    assert p200 >= p100 - 0.1, f"trend broke: {p100} -> {p200}"
    assert p400 >= p200 - 0.1, f"trend broke: {p200} -> {p400}"
    _announce(
        "criterion 2",
        f"gaussian SVM no-error d=15: {p100:.2f}/{p200:.2f}/{p400:.2f} over "
        f"n=100/200/400 (monotone within 0.1); d=30 n=100: {p_hard:.2f} in "
        f"[0.37, 0.87]",
    )


def test_criterion_3_solver_oracle_equivalence():
    """Hinge and epsilon-insensitive fits match a primal QP oracle within
    1e-4; kernel ridge matches an independent normal-equations route within
    1e-8. 25 random small instances."""
    rng = np.random.default_rng(303)
    worst_qp = 0.0
    for k in range(25):
        n = int(rng.integers(4, 13))
        d = int(rng.integers(1, 5))
        X = rng.uniform(-1, 1, (n, d))
        mask = FeatureMask(d, tuple(np.flatnonzero(rng.uniform(size=d) < 0.25)))
        kernel = (
            KernelSpec.gaussian(float(rng.uniform(0.8, 3.0)))
            if k % 2
            else KernelSpec.linear()
        )
        lam = float(rng.choice([0.01, 0.1, 1.0]))
        if k % 2:
            y = np.where(rng.uniform(size=n) < 0.5, -1.0, 1.0)
            ds = Dataset(X, y, Task.CLASSIFICATION)
            loss = LossSpec.hinge()
            G = gram_matrix(kernel, mask, X)
            oracle = hinge_primal_objective(G, y, lam)
        else:
            y = rng.uniform(-2, 2, n)
            ds = Dataset(X, y, Task.REGRESSION)
            eps = float(rng.choice([0.0, 0.1, 0.3]))
            loss = LossSpec.epsilon_insensitive(eps)
            G = gram_matrix(kernel, mask, X)
            oracle = svr_primal_objective(G, y, lam, eps)
        model = fit(ds, mask, kernel, loss, lam, tol=1e-10, max_iter=500000)
        worst_qp = max(worst_qp, abs(model.objective.regularized - oracle))
    assert worst_qp <= 1e-4

    worst_ridge = 0.0
    for _ in range(10):
        n = int(rng.integers(4, 13))
        d = int(rng.integers(1, 5))
        X = rng.uniform(-1, 1, (n, d))
        y = rng.uniform(-2, 2, n)
        ds = Dataset(X, y, Task.REGRESSION)
        lam = float(rng.choice([0.01, 0.1, 1.0]))
        kernel = KernelSpec.gaussian(1.5)
        model = fit(ds, FeatureMask(d), kernel, LossSpec.squared_error(), lam)
        G = gram_matrix(kernel, FeatureMask(d), X)
        alpha, b = ridge_centered_solution(G, y, lam)
        worst_ridge = max(
            worst_ridge,
            float(np.max(np.abs(model.dual_coefficients - alpha))),
            abs(model.bias - b),
        )
    assert worst_ridge <= 1e-8
    _announce(
        "criterion 3",
        f"max |objective - QP oracle| = {worst_qp:.2e} (<= 1e-4); "
        f"max ridge deviation = {worst_ridge:.2e} (<= 1e-8)",
    )


def test_criterion_4_projection_deletion_property():
    """1000 random (kernel, mask, point pair) triples: evaluating on zeroed
    coordinates equals evaluating on shortened vectors within 1e-12."""
    rng = np.random.default_rng(404)
    worst = 0.0
    for _ in range(1000):
        d = int(rng.integers(1, 9))
        spec = (
            KernelSpec.gaussian(float(rng.uniform(0.5, 3.0)))
            if rng.uniform() < 0.5
            else KernelSpec.linear()
        )
        mask = FeatureMask(d, tuple(np.flatnonzero(rng.uniform(size=d) < 0.4)))
        x = rng.uniform(-3, 3, d)
        y = rng.uniform(-3, 3, d)
        worst = max(
            worst,
            abs(
                eval_projected_kernel(spec, mask, x, y)
                - deleted_kernel_equivalent(spec, mask, x, y)
            ),
        )
    assert worst <= 1e-12
    _announce("criterion 4", f"max |projected - deleted| = {worst:.2e} (<= 1e-12)")


def test_criterion_5_greedy_matches_exhaustive_refits():
    """On 50 random 4-feature datasets the greedy per-cycle deletion equals
    the argmin over QP-oracle refits of every candidate mask (same tie
    rule)."""
    rng = np.random.default_rng(505)
    checked = 0
    for trial in range(50):
        X = rng.uniform(-1, 1, (30, 4))
        w = np.zeros(4)
        w[:2] = rng.choice([-1.0, -0.5, 0.5, 1.0], size=2)
        lam = float(rng.choice([0.01, 0.05]))
        if trial % 2:
            y = np.sign(X @ w)
            y[y == 0] = 1.0
            ds = Dataset(X, y, Task.CLASSIFICATION)
            loss = LossSpec.hinge()
            kernel = KernelSpec.gaussian(1.5)
        else:
            y = X @ w + 0.1 * rng.standard_normal(30)
            ds = Dataset(X, y, Task.REGRESSION)
            loss = LossSpec.epsilon_insensitive(0.1)
            kernel = KernelSpec.linear()
        config = RunConfig(
            kernel=kernel,
            loss=loss,
            lam=lam,
            stopping=StoppingRule.rank_all(),
            solver_tolerance=1e-10,
            max_solver_iterations=500000,
        )
        trace, _ = run_rfe(ds, config)
        mask = FeatureMask(4)
        for record in trace.cycles:
            oracle_objs = {}
            for i in mask.active:
                G = gram_matrix(kernel, mask.with_removed(i), X)
                eps = loss.epsilon if loss.epsilon is not None else None
                oracle_objs[i] = kernel_objective(G, ds.targets, lam, eps, loss.kind)
            oracle_pick = min(mask.active, key=lambda i: (oracle_objs[i], i))
            assert record.removed[0] == oracle_pick, (
                f"trial {trial} cycle {record.cycle_index}: greedy "
                f"{record.removed[0]} vs oracle {oracle_pick} ({oracle_objs})"
            )
            checked += 1
            mask = mask.with_removed(record.removed)
    assert checked == 50 * 4
    _announce("criterion 5", f"greedy deletion = oracle argmin in {checked}/200 cycles")


def test_criterion_6_stopping_schedules():
    """Threshold schedules reproduce the closed forms on an n ladder."""
    erm = StoppingRule.erm_rate(1.0)
    expected_erm = {100: 0.1, 1000: 0.0316227766016838, 10000: 0.01}
    for n, want in expected_erm.items():
        assert delta_schedule(erm, n) == pytest.approx(want, abs=1e-12)
    svm = StoppingRule.svm_rate(1.0, 1.0)
    expected_svm = {8: 0.5, 100: 0.21544346900318834, 1000: 0.1}
    for n, want in expected_svm.items():
        assert delta_schedule(svm, n) == pytest.approx(want, abs=1e-12)
    half = StoppingRule.svm_rate(2.0, 0.5)
    assert delta_schedule(half, 16) == pytest.approx(2.0 * 16.0 ** -0.25, abs=1e-12)
    _announce("criterion 6", "rate schedules match closed forms on the n ladder (1e-12)")


def test_criterion_7_change_point_recovery():
    """100 synthetic scree sequences (flat-linear left, convex-quadratic
    right, jump >= 10x noise): >= 95% exact recovery, SSE matches the
    exhaustive oracle."""
    rng = np.random.default_rng(707)
    hits = 0
    for _ in range(100):
        L = int(rng.integers(9, 26))
        t_true = int(rng.integers(1, L - 3))
        noise = float(rng.uniform(0.001, 0.01))
        base = float(rng.uniform(0.2, 1.0))
        jump = 10.0 * noise * float(rng.uniform(1.0, 5.0)) + 0.2
        c1 = float(rng.uniform(0.05, 0.3))
        c2 = float(rng.uniform(0.05, 0.3))
        scree = np.empty(L)
        scree[: t_true + 1] = base + rng.uniform(-noise, noise, t_true + 1)
        k = np.arange(1, L - t_true)
        scree[t_true + 1 :] = (
            base + jump + c1 * k + c2 * k**2 + rng.uniform(-noise, noise, L - t_true - 1)
        )
        cp = fit_change_point(scree, 2, 3)
        oracle_t, oracle_sse = polyfit_change_point(scree, 2, 3)
        assert cp.change_index == oracle_t
        assert cp.sse == pytest.approx(oracle_sse, rel=1e-9, abs=1e-12)
        if cp.change_index == t_true:
            hits += 1
    assert hits >= 95
    _announce("criterion 7", f"recovered the true change index in {hits}/100 runs")


def test_criterion_8_linear_erm_case_study():
    """Backward elimination by mean squared residual on sparse linear data
    (d=10, d0=3, n=500, noise 0.1) ranks the three true features last in at
    least 18 of 20 replications."""
    scenario = SimulationScenario(
        d=10,
        d0=3,
        n=500,
        task=Task.REGRESSION,
        replications=20,
        seed=SCENARIO_SEED,
        noise_scale=0.1,
    )
    config = RunConfig(
        kernel=KernelSpec.linear(),
        loss=LossSpec.squared_error(),
        lam=1.0,
        stopping=StoppingRule.rank_all(),
        learner="linear-erm",
    )
    successes = 0
    for r in range(20):
        ds = generate_regression(scenario, r)
        _, ranking = run_rfe(ds, config)
        if set(ranking.order[-3:]) == {0, 1, 2}:
            successes += 1
    assert successes >= 18
    _announce("criterion 8", f"true features ranked last in {successes}/20 replications")
