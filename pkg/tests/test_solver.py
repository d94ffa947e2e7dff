import numpy as np
import pytest
from hypothesis import given, strategies as st

from nsync.errors import ContractionViolation, DimensionError, DivergenceError, ValidationError
from nsync.eso import eso_stepsizes
from nsync.experiments import left_instance
from nsync.objective import build_least_squares, gap, minimizer
from nsync.probabilities import optimal_serial
from nsync.rates import lambda_constant
from nsync.sampling import build_scheme, draw, fully_parallel_scheme, make_rng, serial_scheme
from nsync.solver import (
    TRACE_HEADER,
    RunConfig,
    ensemble_summary,
    nsync_expected_decrease,
    nsync_run,
    nsync_step,
    run_ensemble,
    traces_to_csv,
)

from helpers import random_problem, random_scheme, scalar_problem


def separable_problem(n=5, seed=0):
    rng = np.random.default_rng(seed)
    A = np.diag(rng.uniform(0.5, 2.0, n))
    return build_least_squares(A, rng.standard_normal(n), 1.0, rng.uniform(0.5, 2.0, n))


def test_config_validation():
    with pytest.raises(ValidationError):
        RunConfig(max_iters=0)
    with pytest.raises(ValidationError):
        RunConfig(max_iters=1, record_every=0)
    with pytest.raises(ValidationError):
        RunConfig(max_iters=1, gradient_mode="lazy")
    with pytest.raises(ValidationError):
        RunConfig(max_iters=1, target_residual=0.0)


def test_scalar_one_step():
    prob = scalar_problem()
    t = nsync_run(prob, serial_scheme([1.0]), [2.0], RunConfig(max_iters=1))
    assert t.final_x.tolist() == [0.5]
    assert t.residuals[0] == (0, 0, 0.25)
    assert t.residuals[-1] == (1, 1, 0.0)


def test_separable_fully_parallel_is_one_step():
    prob = separable_problem()
    s = fully_parallel_scheme(prob.n)
    t = nsync_run(prob, s, eso_stepsizes(prob, s), RunConfig(max_iters=3))
    _, _, res = t.arrays()
    assert res[0] > 0
    np.testing.assert_allclose(res[1:], 0.0, atol=1e-14)


def test_start_at_minimizer_stays():
    prob = random_problem(np.random.default_rng(1), n=6)
    sol = minimizer(prob)
    s = build_scheme(6, [[0, 1, 2, 3], [2, 3, 4, 5]], [0.5, 0.5], 2)
    t = nsync_run(prob, s, eso_stepsizes(prob, s), RunConfig(max_iters=50, x0=sol.x_star), sol)
    _, _, res = t.arrays()
    assert np.all(np.abs(res) <= 1e-12 * (1 + abs(sol.phi_star)))
    np.testing.assert_allclose(t.final_x, sol.x_star, rtol=0, atol=1e-12)


def test_target_stops_early():
    prob = left_instance(n=6)
    s = serial_scheme(optimal_serial(prob))
    t = nsync_run(prob, s, eso_stepsizes(prob, s), RunConfig(max_iters=100_000, target_residual=1e-6))
    assert t.iterations < 100_000
    assert t.residuals[-1][2] <= 1e-6
    assert all(r > 1e-6 for _, _, r in t.residuals[:-1])


def test_record_every_keeps_first_and_last():
    prob = left_instance(n=6)
    s = serial_scheme(np.full(6, 1 / 6))
    t = nsync_run(prob, s, prob.curvature, RunConfig(max_iters=25, record_every=10))
    assert [r[0] for r in t.residuals] == [0, 10, 20, 25]


def test_dimension_and_stepsize_checks():
    prob = random_problem(np.random.default_rng(2), n=3)
    with pytest.raises(DimensionError):
        nsync_run(prob, fully_parallel_scheme(4), np.ones(4), RunConfig(max_iters=1))
    with pytest.raises(ValidationError):
        nsync_run(prob, fully_parallel_scheme(3), [1.0, 0.0, 1.0], RunConfig(max_iters=1))
    with pytest.raises(DimensionError):
        nsync_run(prob, fully_parallel_scheme(3), np.ones(3), RunConfig(max_iters=1, x0=[0.0]))


def test_divergence_is_reported():
    A = np.ones((2, 4))
    prob = build_least_squares(A, np.ones(2), 1.0, np.full(4, 1e-3))
    s = fully_parallel_scheme(4)
    with pytest.raises(DivergenceError), np.errstate(over="ignore", invalid="ignore"):
        nsync_run(prob, s, prob.curvature / 10, RunConfig(max_iters=5000, record_every=100))


@given(seed=st.integers(0, 2**32 - 1))
def test_full_and_incremental_gradients_agree(seed):
    rng = np.random.default_rng(seed)
    prob = random_problem(rng)
    s = random_scheme(rng, prob.n)
    w = eso_stepsizes(prob, s)
    sol = minimizer(prob)
    x0 = rng.standard_normal(prob.n)
    a = nsync_run(prob, s, w, RunConfig(max_iters=40, seed=seed, x0=x0), sol)
    b = nsync_run(prob, s, w, RunConfig(max_iters=40, seed=seed, x0=x0, gradient_mode="incremental"), sol)
    scale = 1 + np.abs(a.final_x).max()
    np.testing.assert_allclose(b.final_x, a.final_x, rtol=0, atol=1e-10 * scale)
    ra, rb = a.arrays()[2], b.arrays()[2]
    np.testing.assert_allclose(rb, ra, rtol=1e-8, atol=1e-12 * (1 + ra[0]))


@given(seed=st.integers(0, 2**32 - 1))
def test_update_locality_and_order_independence(seed):
    rng = np.random.default_rng(seed)
    prob = random_problem(rng)
    s = random_scheme(rng, prob.n)
    w = eso_stepsizes(prob, s).w
    x = rng.standard_normal(prob.n)
    S = draw(s, make_rng(seed))
    y = x.copy()
    nsync_step(prob, y, S, w)
    outside = np.setdiff1d(np.arange(prob.n), S)
    assert np.array_equal(y[outside], x[outside])
    # same updates applied one coordinate at a time, in reverse, from the pre-read gradient
    g = dict(zip(S.tolist(), prob.partial_gradient(x, S)))
    z = x.copy()
    for i in rng.permutation(S):
        z[i] -= g[i] / w[i]
    assert np.array_equal(y, z)


def test_epoch_accounting():
    prob = random_problem(np.random.default_rng(3), n=6)
    s = build_scheme(6, [[0, 1, 2, 3], [2, 3, 4, 5]], [0.5, 0.5], 3)
    t = nsync_run(prob, s, eso_stepsizes(prob, s), RunConfig(max_iters=7))
    assert [r[1] for r in t.residuals] == [3 * k for k in range(8)]
    assert t.epochs == 21 / 6
    fp = fully_parallel_scheme(6)
    tf = nsync_run(prob, fp, eso_stepsizes(prob, fp), RunConfig(max_iters=4))
    assert tf.epochs == tf.iterations == 4


def test_residuals_nonnegative():
    prob = left_instance(n=6)
    s = serial_scheme(optimal_serial(prob))
    t = nsync_run(prob, s, eso_stepsizes(prob, s), RunConfig(max_iters=2000))
    assert min(r for _, _, r in t.residuals) >= 0.0


def test_expected_decrease_at_minimizer():
    prob = random_problem(np.random.default_rng(4), n=5)
    sol = minimizer(prob)
    s = build_scheme(5, [[0, 1, 2], [2, 3, 4]], [0.3, 0.7], 2)
    ed = nsync_expected_decrease(prob, s, eso_stepsizes(prob, s), sol.x_star, sol)
    assert ed.expected_value == pytest.approx(sol.phi_star, rel=1e-12, abs=1e-12)
    assert ed.certified_bound == pytest.approx(sol.phi_star, rel=1e-12, abs=1e-12)


def test_expected_decrease_strict_on_small_left_instance():
    prob = left_instance(n=6)
    sol = minimizer(prob)
    s = serial_scheme(optimal_serial(prob))
    rng = np.random.default_rng(5)
    for _ in range(20):
        x = rng.standard_normal(6)
        ed = nsync_expected_decrease(prob, s, eso_stepsizes(prob, s), x, sol)
        assert ed.expected_value < ed.certified_bound


def test_expected_decrease_exact_for_separable_parallel():
    prob = separable_problem()
    sol = minimizer(prob)
    s = fully_parallel_scheme(prob.n)
    ed = nsync_expected_decrease(prob, s, eso_stepsizes(prob, s), np.ones(prob.n), sol)
    assert ed.expected_value == pytest.approx(sol.phi_star, rel=1e-12)


def test_expected_decrease_raises_for_bad_stepsizes():
    A = np.ones((2, 4)) / np.sqrt(2)
    prob = build_least_squares(A, np.ones(2), 1.0, np.full(4, 0.01))
    s = fully_parallel_scheme(4)
    with pytest.raises(ContractionViolation):
        nsync_expected_decrease(prob, s, prob.curvature, np.full(4, 3.0))
    ed = nsync_expected_decrease(prob, s, prob.curvature, np.full(4, 3.0), check=False)
    assert ed.expected_value > ed.certified_bound


def test_single_run_ensemble_matches_run():
    prob = left_instance(n=6)
    s = serial_scheme(np.full(6, 1 / 6))
    cfg = RunConfig(max_iters=30, seed=9)
    (t,) = run_ensemble(prob, s, prob.curvature, cfg, 1)
    ref = nsync_run(prob, s, prob.curvature, cfg)
    assert t.residuals == ref.residuals
    assert np.array_equal(t.final_x, ref.final_x)


def test_ensemble_determinism_and_workers():
    prob = left_instance(n=6)
    s = serial_scheme(optimal_serial(prob))
    cfg = RunConfig(max_iters=50, seed=3)
    a = run_ensemble(prob, s, prob.curvature, cfg, 4)
    b = run_ensemble(prob, s, prob.curvature, cfg, 4)
    c = run_ensemble(prob, s, prob.curvature, cfg, 4, workers=2)
    assert traces_to_csv(a) == traces_to_csv(b) == traces_to_csv(c)
    assert [t.seed for t in a] == [3, 4, 5, 6]
    with pytest.raises(ValidationError):
        run_ensemble(prob, s, prob.curvature, cfg, 0)


def test_geometric_decay_of_mean_gap():
    prob = left_instance(n=4)
    s = serial_scheme(np.full(4, 0.25))
    w = eso_stepsizes(prob, s).w
    lam, _ = lambda_constant(w, s.marginals, prob.v)
    mu = prob.gamma / lam
    traces = run_ensemble(prob, s, w, RunConfig(max_iters=60, x0=np.ones(4)), 1000)
    summ = ensemble_summary(traces, bootstrap=0)
    gap0 = summ.mean[0]
    bound = (1 - mu) ** summ.iterations * gap0
    assert np.all(summ.mean - 3 * summ.stderr <= bound)


def test_summary_pads_early_stops_and_orders_band():
    prob = left_instance(n=6)
    s = serial_scheme(optimal_serial(prob))
    traces = run_ensemble(prob, s, prob.curvature, RunConfig(max_iters=3000, target_residual=1e-3), 20)
    summ = ensemble_summary(traces)
    assert summ.median.shape == summ.iterations.shape
    assert np.all(summ.q025 <= summ.median) and np.all(summ.median <= summ.q975)
    assert np.all(summ.median_ci[0] <= summ.median_ci[1])


def test_csv_header_and_rows():
    t = nsync_run(scalar_problem(), serial_scheme([1.0]), [2.0], RunConfig(max_iters=2))
    lines = traces_to_csv([t]).splitlines()
    assert lines[0] == ",".join(TRACE_HEADER) == "run,iter,coord_updates,epoch,residual"
    assert lines[1:] == ["0,0,0,0.0,0.25", "0,1,1,1.0,0.0", "0,2,2,2.0,0.0"]
