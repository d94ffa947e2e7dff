"""Stepsizes satisfying the expected separable overapproximation (ESO)

    E[phi(x + h_[S])] <= phi(x) + <grad phi(x), h>_p + 1/2 ||h||^2_{p*w}

for two-tier samplings, and an exact-enumeration checker for the inequality.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionError
from .objective import ProblemSpec
from .sampling import SamplingScheme, atom_matrix, enumerate_distribution

__all__ = [
    "StepSizes",
    "omega_restricted",
    "set_factors",
    "eso_stepsizes",
    "theta_stepsizes",
    "ESOReport",
    "expected_values",
    "verify_eso",
]


@dataclass(frozen=True, eq=False)
class StepSizes:
    w: np.ndarray
    omega_restricted: np.ndarray
    theta: Optional[float] = None
    policy: str = "eso"


def _check_dims(prob, scheme):
    if prob.n != scheme.n:
        raise DimensionError(f"problem has n={prob.n} but scheme has n={scheme.n}")


def omega_restricted(prob: ProblemSpec, scheme: SamplingScheme) -> np.ndarray:
    """``omega_j = max_J |J intersect S_j|`` for every set of the scheme."""
    _check_dims(prob, scheme)
    delta = scheme.membership().astype(np.intp)
    out = np.zeros(scheme.c, dtype=np.intp)
    for g in prob.groups:
        np.maximum(out, delta[g].sum(axis=0), out=out)
    return out


def set_factors(prob: ProblemSpec, scheme: SamplingScheme, omegas=None) -> np.ndarray:
    """Per-set factor ``1 + (tau-1)(omega_j-1) / max(1, |S_j|-1)``."""
    if omegas is None:
        omegas = omega_restricted(prob, scheme)
    sizes = scheme.set_sizes
    return 1.0 + (scheme.tau - 1) * (omegas - 1) / np.maximum(1, sizes - 1)


def eso_stepsizes(prob: ProblemSpec, scheme: SamplingScheme) -> StepSizes:
    """Smallest ESO-certified stepsize parameters ``w*``.

    ``w*_i = (L_i + gamma v_i) / p_i * sum_j q_j tau/|S_j| [i in S_j] beta_j``,
    where ``beta_j`` is :func:`set_factors`. For ``gamma = 1`` the curvature
    term is the familiar ``L_i + v_i``.
    """
    omegas = omega_restricted(prob, scheme)
    beta = set_factors(prob, scheme, omegas)
    weighted = np.zeros(prob.n)
    for qj, s, bj in zip(scheme.q, scheme.sets, beta):
        weighted[s] += qj * scheme.tau / s.size * bj
    w = prob.curvature * weighted / scheme.marginals
    w.flags.writeable = False
    return StepSizes(w=w, omega_restricted=omegas, policy="eso")


def theta_stepsizes(prob: ProblemSpec, scheme: SamplingScheme) -> StepSizes:
    """Uniformly inflated stepsizes ``w = theta (L + gamma v)``, ``theta = max_j beta_j``."""
    omegas = omega_restricted(prob, scheme)
    theta = float(set_factors(prob, scheme, omegas).max())
    w = theta * prob.curvature
    w.flags.writeable = False
    return StepSizes(w=w, omega_restricted=omegas, theta=theta, policy="theta")


def expected_values(prob: ProblemSpec, M, probs, X, H, budget: int = 4_000_000) -> np.ndarray:
    """``E[phi(x + h_[S])]`` for every row pair of ``X``, ``H``, exactly.

    ``M`` and ``probs`` are the atom indicator matrix and atom probabilities
    (see :func:`nsync.sampling.atom_matrix`).
    """
    X = np.atleast_2d(X)
    H = np.atleast_2d(H)
    out = np.empty(X.shape[0])
    chunk = max(1, budget // max(1, M.shape[0] * prob.n))
    for lo in range(0, X.shape[0], chunk):
        hi = lo + chunk
        # (chunk, atoms, n) points x + h_[S]
        pts = X[lo:hi, None, :] + H[lo:hi, None, :] * M[None, :, :]
        out[lo:hi] = prob.values(pts) @ probs
    return out


@dataclass
class ESOReport:
    trials: int
    violations: int
    worst_slack: float
    worst_scaled_slack: float
    worst_pair: Optional[tuple[np.ndarray, np.ndarray]]
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.violations == 0


def verify_eso(
    prob: ProblemSpec,
    scheme: SamplingScheme,
    w,
    trials: int,
    rng: np.random.Generator,
    tol: float = 1e-9,
    pairs=None,
) -> ESOReport:
    """Check the ESO inequality on random ``(x, h)`` pairs.

    The expectation on the left is computed exactly from the enumerated
    distribution; only ``x`` and ``h`` are random (i.i.d. standard normal).
    A trial counts as a violation when ``rhs - lhs < -tol * scale`` with
    ``scale = 1 + |phi(x)| + |<grad, h>_p| + 1/2 ||h||^2_{p*w}``.
    ``worst_pair`` is the pair with the smallest scaled slack, reported only
    when there is at least one violation. Passing ``pairs=(X, H)`` checks
    the given rows instead of random ones.
    """
    _check_dims(prob, scheme)
    w = np.asarray(getattr(w, "w", w), dtype=float)
    atoms = enumerate_distribution(scheme)
    M, probs = atom_matrix(prob.n, atoms)
    p = scheme.marginals

    if pairs is None:
        X = rng.standard_normal((trials, prob.n))
        H = rng.standard_normal((trials, prob.n))
    else:
        X, H = (np.atleast_2d(np.asarray(a, dtype=float)) for a in pairs)
        trials = X.shape[0]
    phi_x = prob.values(X)
    G = X @ prob.A.T - prob.b
    grads = G @ prob.A + prob.gamma * prob.v * X

    lhs = expected_values(prob, M, probs, X, H)
    lin = np.sum(p * grads * H, axis=1)
    quad = 0.5 * np.sum(p * w * H * H, axis=1)
    rhs = phi_x + lin + quad

    slack = rhs - lhs
    scale = 1.0 + np.abs(phi_x) + np.abs(lin) + quad
    scaled = slack / scale
    k = int(np.argmin(scaled)) if trials else 0
    violations = int(np.sum(scaled < -tol))
    return ESOReport(
        trials=trials,
        violations=violations,
        worst_slack=float(slack[k]) if trials else 0.0,
        worst_scaled_slack=float(scaled[k]) if trials else 0.0,
        worst_pair=(X[k].copy(), H[k].copy()) if violations else None,
        tolerance=tol,
    )
