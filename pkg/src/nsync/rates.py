"""Complexity constants for the method.

``Lambda = max_i w_i / (p_i v_i)`` governs the rate: ``mu = gamma / Lambda``
is the guaranteed expected contraction of the optimality gap per iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigurationError, ValidationError
from .objective import ProblemSpec

__all__ = [
    "RateReport",
    "lambda_constant",
    "iteration_bound",
    "lambda_lower_bound",
    "closed_form_constants",
    "rate_report",
]

TIE_RTOL = 1e-12


@dataclass(frozen=True)
class RateReport:
    lam: float
    mu: float
    lower_bound: float
    argmax: tuple[int, ...]
    K: Optional[int] = None
    epsilon: Optional[float] = None
    rho: Optional[float] = None
    initial_gap: Optional[float] = None

    def as_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "mu": self.mu,
            "lower_bound": self.lower_bound,
            "argmax": [i + 1 for i in self.argmax],
            "K": self.K,
            "epsilon": self.epsilon,
            "rho": self.rho,
            "initial_gap": self.initial_gap,
        }


def _positive(name, a):
    a = np.asarray(a, dtype=float).reshape(-1)
    if not np.all(a > 0) or not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} must be positive and finite")
    return a


def lambda_constant(w, p, v) -> tuple[float, tuple[int, ...]]:
    """Return ``max_i w_i/(p_i v_i)`` and every index attaining it.

    Indices whose ratio is within a relative ``1e-12`` of the maximum count
    as ties, so equalized designs report all coordinates.
    """
    w, p, v = _positive("w", w), _positive("p", p), _positive("v", v)
    if not (w.shape == p.shape == v.shape):
        raise ValidationError("w, p and v must have equal length")
    ratios = w / (p * v)
    lam = float(ratios.max())
    ties = np.flatnonzero(ratios >= lam * (1 - TIE_RTOL))
    return lam, tuple(int(i) for i in ties)


def iteration_bound(lam: float, gamma: float, initial_gap: float, epsilon: float, rho: float) -> int:
    """Smallest integer ``K >= (lam/gamma) * ln(initial_gap / (epsilon * rho))``.

    With this many iterations the gap is at most ``epsilon`` with probability
    at least ``1 - rho``.
    """
    if not (lam > 0 and gamma > 0):
        raise ValidationError("lambda and gamma must be positive")
    if not 0 < rho < 1:
        raise ValidationError(f"rho must lie in (0, 1), got {rho}")
    if not 0 < epsilon < initial_gap:
        raise ValidationError(
            f"epsilon must satisfy 0 < epsilon < initial gap ({initial_gap}); got {epsilon}"
        )
    return int(math.ceil(lam / gamma * math.log(initial_gap / (epsilon * rho))))


def lambda_lower_bound(w, v, expected_size: float) -> float:
    w, v = _positive("w", w), _positive("v", v)
    if not expected_size > 0:
        raise ValidationError("expected_size must be positive")
    return float(np.sum(w / v) / expected_size)


def closed_form_constants(prob: ProblemSpec) -> tuple[float, float, float]:
    """``(Lambda_OS, Lambda_US, Lambda_FP)`` for optimal serial, uniform serial
    and fully parallel sampling with ESO stepsizes.

    With ``kappa_i = (L_i + gamma v_i) / v_i``: ``sum kappa``, ``n max kappa``
    and ``omega max kappa``. For gamma = 1 these are ``n + sum L/v``,
    ``n + n max L/v`` and ``omega + omega max L/v``.
    """
    kappa = prob.curvature / prob.v
    return float(kappa.sum()), float(prob.n * kappa.max()), float(prob.omega * kappa.max())


def rate_report(
    w,
    p,
    v,
    gamma: float,
    expected_size: float,
    initial_gap: Optional[float] = None,
    epsilon: Optional[float] = None,
    rho: Optional[float] = None,
) -> RateReport:
    lam, argmax = lambda_constant(w, p, v)
    mu = gamma / lam
    if mu > 1 + 1e-12:
        raise ConfigurationError(
            f"mu = gamma/Lambda = {mu} exceeds 1; stepsizes are smaller than the curvature allows"
        )
    K = None
    if initial_gap is not None and epsilon is not None and rho is not None:
        K = iteration_bound(lam, gamma, initial_gap, epsilon, rho)
    return RateReport(
        lam=lam, mu=mu, lower_bound=lambda_lower_bound(w, v, expected_size), argmax=argmax,
        K=K, epsilon=epsilon, rho=rho, initial_gap=initial_gap,
    )
