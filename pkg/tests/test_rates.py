import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nsync.errors import ConfigurationError, ValidationError
from nsync.eso import eso_stepsizes
from nsync.experiments import left_instance
from nsync.objective import build_least_squares, rescale
from nsync.probabilities import optimal_serial
from nsync.rates import (
    closed_form_constants,
    iteration_bound,
    lambda_constant,
    lambda_lower_bound,
    rate_report,
)
from nsync.sampling import fully_parallel_scheme, serial_scheme

from helpers import random_problem, random_scheme


@pytest.fixture(scope="module")
def left():
    return left_instance()


def test_lambda_fully_parallel_separable():
    v = np.array([0.5, 2.0, 1.0])
    lam, ties = lambda_constant(v, np.ones(3), v)
    assert lam == 1.0 and ties == (0, 1, 2)


def test_lambda_uniform_serial_left(left):
    w = eso_stepsizes(left, serial_scheme(np.full(30, 1 / 30))).w
    lam, ties = lambda_constant(w, np.full(30, 1 / 30), left.v)
    assert lam == pytest.approx(630, rel=1e-12)
    assert ties == (0,)


def test_lambda_optimal_serial_left_ties_everywhere(left):
    p = optimal_serial(left)
    w = eso_stepsizes(left, serial_scheme(p)).w
    lam, ties = lambda_constant(w, p, left.v)
    assert lam == pytest.approx(79, rel=1e-12)
    assert ties == tuple(range(30))


@pytest.mark.parametrize(
    "lam, gap0, expected",
    [(1.0, 1.0, 5), (79.0, 1.0, 910), (630.0, 1.0, 7254)],
)
def test_iteration_bound_examples(lam, gap0, expected):
    eps = 0.1 if lam == 1.0 else 1e-4
    assert iteration_bound(lam, 1.0, gap0, eps, 0.1) == expected


def test_iteration_bound_errors():
    with pytest.raises(ValidationError):
        iteration_bound(1.0, 1.0, 1.0, 1.0, 0.1)
    with pytest.raises(ValidationError):
        iteration_bound(1.0, 1.0, 1.0, 0.1, 1.0)
    with pytest.raises(ValidationError):
        iteration_bound(1.0, 1.0, 1.0, 0.1, 0.0)
    with pytest.raises(ValidationError):
        iteration_bound(-1.0, 1.0, 1.0, 0.1, 0.5)


def test_iteration_bound_is_smallest_integer():
    k = iteration_bound(79.0, 1.0, 1.0, 1e-4, 0.1)
    assert k - 1 < 79 * math.log(1e5) <= k


def test_lower_bound_examples(left):
    p = optimal_serial(left)
    w = left.curvature
    assert lambda_lower_bound(w, left.v, 1.0) == pytest.approx(79, rel=1e-12)
    lam_us, _ = lambda_constant(w, np.full(30, 1 / 30), left.v)
    assert lambda_lower_bound(w, left.v, 1.0) < lam_us
    fp = fully_parallel_scheme(30)
    wfp = eso_stepsizes(left, fp).w
    lb = lambda_lower_bound(wfp, left.v, fp.expected_size)
    assert lb == pytest.approx(30 * np.sum(left.curvature / left.v) / 30, rel=1e-12)
    assert lb <= closed_form_constants(left)[2]
    assert lambda_constant(w, p, left.v)[0] == pytest.approx(lambda_lower_bound(w, left.v, 1.0), rel=1e-12)


def test_lambda_rejects_nonpositive():
    with pytest.raises(ValidationError):
        lambda_constant([1.0, 0.0], [0.5, 0.5], [1.0, 1.0])
    with pytest.raises(ValidationError):
        lambda_constant([1.0, 1.0], [0.5, -0.5], [1.0, 1.0])
    with pytest.raises(ValidationError):
        lambda_constant([1.0], [0.5, 0.5], [1.0, 1.0])
    with pytest.raises(ValidationError):
        lambda_lower_bound([1.0], [1.0], 0.0)


def test_closed_forms_left(left):
    os_, us, fp = closed_form_constants(left)
    assert (os_, us, fp) == pytest.approx((79, 630, 630), rel=1e-12)


def test_closed_forms_separable():
    n = 5
    prob = build_least_squares(np.eye(n), np.zeros(n), 1.0, np.ones(n))
    assert closed_form_constants(prob) == pytest.approx((2 * n, 2 * n, 2), rel=1e-15)


def test_closed_forms_ratio_profile():
    # unit-norm dense columns with v_1 = 1/100 gives L/v = (100, 1, ..., 1) and omega = 10
    rng = np.random.default_rng(0)
    A = rng.standard_normal((3, 10))
    A /= np.linalg.norm(A, axis=0)
    v = np.ones(10)
    v[0] = 0.01
    prob = build_least_squares(A, np.zeros(3), 1.0, v)
    os_, _, fp = closed_form_constants(prob)
    assert os_ == pytest.approx(119, rel=1e-12)
    assert fp == pytest.approx(1010, rel=1e-12)
    assert fp > os_


@given(seed=st.integers(0, 2**32 - 1))
def test_closed_forms_match_generic_lambda(seed):
    rng = np.random.default_rng(seed)
    prob = random_problem(rng)
    n = prob.n
    os_, us, fp = closed_form_constants(prob)
    for scheme, expected in [
        (serial_scheme(optimal_serial(prob)), os_),
        (serial_scheme(np.full(n, 1 / n)), us),
        (fully_parallel_scheme(n), fp),
    ]:
        lam, _ = lambda_constant(eso_stepsizes(prob, scheme).w, scheme.marginals, prob.v)
        assert lam == pytest.approx(expected, rel=1e-12)


def test_lambda_at_least_lower_bound_random_triples():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        n = int(rng.integers(1, 12))
        size = float(rng.uniform(0.5, n)) if n > 1 else 1.0
        p = rng.dirichlet(np.ones(n)) * size
        p = np.minimum(p, 1.0)
        w = np.exp(rng.normal(size=n))
        v = np.exp(rng.normal(size=n))
        lam, _ = lambda_constant(w, p, v)
        lb = lambda_lower_bound(w, v, p.sum())
        assert lam >= lb * (1 - 1e-12)


@given(seed=st.integers(0, 2**32 - 1))
def test_lambda_rescale_invariant(seed):
    rng = np.random.default_rng(seed)
    prob = random_problem(rng)
    s = random_scheme(rng, prob.n)
    d = np.exp(rng.uniform(-2, 2, prob.n))
    w = eso_stepsizes(prob, s).w
    scaled = rescale(prob, d)
    lam, _ = lambda_constant(w, s.marginals, prob.v)
    lam_d, _ = lambda_constant(w / d**2, s.marginals, scaled.v)
    assert lam_d == pytest.approx(lam, rel=1e-12)
    lam_eso, _ = lambda_constant(eso_stepsizes(scaled, s).w, s.marginals, scaled.v)
    assert lam_eso == pytest.approx(lam, rel=1e-12)


@given(seed=st.integers(0, 2**32 - 1))
def test_uniform_serial_dominates_fully_parallel(seed):
    prob = random_problem(np.random.default_rng(seed))
    _, us, fp = closed_form_constants(prob)
    assert us >= fp


@given(seed=st.integers(0, 2**32 - 1))
def test_rate_report_mu_in_unit_interval(seed):
    rng = np.random.default_rng(seed)
    prob = random_problem(rng)
    s = random_scheme(rng, prob.n)
    rep = rate_report(eso_stepsizes(prob, s).w, s.marginals, prob.v, prob.gamma, s.expected_size)
    assert 0 < rep.mu <= 1
    assert rep.lam >= rep.lower_bound * (1 - 1e-12)


def test_rate_report_k_and_dict(left):
    p = optimal_serial(left)
    rep = rate_report(left.curvature, p, left.v, 1.0, 1.0, initial_gap=1.0, epsilon=1e-4, rho=0.1)
    assert rep.K == 910
    d = rep.as_dict()
    assert d["argmax"] == list(range(1, 31))
    assert d["lambda"] == pytest.approx(79)


def test_rate_report_flags_too_small_stepsizes():
    with pytest.raises(ConfigurationError):
        rate_report([0.1], [1.0], [1.0], 1.0, 1.0)
