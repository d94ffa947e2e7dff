"""Nonuniform synchronous parallel coordinate descent (NSync) for
regularized least squares: samplings, ESO stepsizes, rate constants,
optimal probabilities and an experiment harness."""

from .eso import StepSizes, eso_stepsizes, omega_restricted, theta_stepsizes, verify_eso
from .objective import ProblemSpec, Solution, build_least_squares, gradient, minimizer, rescale, value
from .probabilities import LPInstance, LPSolution, lp_instance, optimal_q, optimal_q_bruteforce, optimal_serial
from .rates import RateReport, closed_form_constants, iteration_bound, lambda_constant, lambda_lower_bound
from .sampling import (
    SamplingScheme,
    build_scheme,
    draw,
    enumerate_distribution,
    fully_parallel_scheme,
    make_rng,
    serial_scheme,
)
from .solver import RunConfig, Trace, nsync_expected_decrease, nsync_run, run_ensemble

__version__ = "0.1.0"
