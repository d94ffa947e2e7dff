"""Regularized least-squares objective.

    phi(x) = 1/2 ||A x - b||^2 + (gamma / 2) sum_i v_i x_i^2

together with the quantities the coordinate descent machinery needs:
coordinate Lipschitz constants ``L``, the row-support groups of ``A`` and the
separability degree ``omega``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np
from scipy import linalg as sla

from .errors import DimensionError, ValidationError, ZeroColumnError

__all__ = [
    "SeparableObjective",
    "ProblemSpec",
    "Solution",
    "build_least_squares",
    "value",
    "gradient",
    "partial_gradient",
    "minimizer",
    "gap",
    "rescale",
]


class SeparableObjective(Protocol):
    """What the sampling/stepsize/solver code needs from an objective.

    Any partially separable, strongly convex objective of the form
    ``f(x) + gamma/2 ||x||_v^2`` can be plugged in by providing these.
    """

    n: int
    gamma: float
    v: np.ndarray
    L: np.ndarray
    groups: tuple[np.ndarray, ...]
    omega: int

    def value(self, x: np.ndarray) -> float: ...

    def gradient(self, x: np.ndarray) -> np.ndarray: ...

    def partial_gradient(self, x: np.ndarray, idx: np.ndarray) -> np.ndarray: ...


def _frozen(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Least-squares instance with its separability structure.

    Use :func:`build_least_squares` rather than calling this directly; the
    constructor does not recompute ``L``, ``groups`` or ``omega``.
    """

    A: np.ndarray
    b: np.ndarray
    gamma: float
    v: np.ndarray
    L: np.ndarray
    groups: tuple[np.ndarray, ...]
    omega: int

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def curvature(self) -> np.ndarray:
        """Coordinate Lipschitz constants of the whole objective, ``L + gamma*v``."""
        return self.L + self.gamma * self.v

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise DimensionError(f"expected a vector of length {self.n}, got shape {x.shape}")
        return x

    def value(self, x) -> float:
        x = self._check(x)
        r = self.A @ x - self.b
        return 0.5 * float(r @ r) + 0.5 * self.gamma * float(self.v @ (x * x))

    def gradient(self, x) -> np.ndarray:
        x = self._check(x)
        return self.A.T @ (self.A @ x - self.b) + self.gamma * self.v * x

    def partial_gradient(self, x, idx) -> np.ndarray:
        x = self._check(x)
        idx = np.asarray(idx, dtype=np.intp)
        r = self.A @ x - self.b
        return self.A[:, idx].T @ r + self.gamma * self.v[idx] * x[idx]

    def values(self, X) -> np.ndarray:
        """Objective at every row of ``X`` (any leading shape, last axis n)."""
        X = np.asarray(X, dtype=float)
        R = X @ self.A.T - self.b
        return 0.5 * np.sum(R * R, axis=-1) + 0.5 * self.gamma * np.sum(self.v * X * X, axis=-1)


@dataclass(frozen=True, eq=False)
class Solution:
    x_star: np.ndarray
    phi_star: float


def _row_groups(A):
    groups = []
    for row in A:
        support = np.flatnonzero(row)
        if support.size:
            support.flags.writeable = False
            groups.append(support)
    return tuple(groups)


def build_least_squares(A, b, gamma, v) -> ProblemSpec:
    """Validate the data and derive ``L``, ``groups`` and ``omega``.

    Parameters
    ----------
    A : array_like, shape (m, n)
        Data matrix; every column must have a nonzero entry.
    b : array_like, shape (m,)
    gamma : float
        Strong convexity modulus, > 0.
    v : array_like, shape (n,)
        Positive strong convexity weights.

    Raises
    ------
    ZeroColumnError
        If a column of ``A`` is zero (its index is reported, 0-based).
    ValidationError
        If ``gamma`` or some ``v_i`` is not positive, or on shape mismatch.
    """
    A = np.array(A, dtype=float, ndmin=2)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise DimensionError(f"A must be a nonempty matrix, got shape {A.shape}")
    m, n = A.shape
    b = np.asarray(b, dtype=float).reshape(-1)
    v = np.asarray(v, dtype=float).reshape(-1)
    if b.shape != (m,):
        raise DimensionError(f"b must have length {m}, got {b.shape[0]}")
    if v.shape != (n,):
        raise DimensionError(f"v must have length {n}, got {v.shape[0]}")
    if not np.all(np.isfinite(A)) or not np.all(np.isfinite(b)):
        raise ValidationError("A and b must be finite")
    gamma = float(gamma)
    if not gamma > 0 or not np.isfinite(gamma):
        raise ValidationError(f"gamma must be positive, got {gamma}")
    bad = np.flatnonzero(~(v > 0) | ~np.isfinite(v))
    if bad.size:
        raise ValidationError(f"v must be positive; v[{bad[0]}] = {v[bad[0]]}")

    L = np.einsum("ij,ij->j", A, A)
    zero = np.flatnonzero(L == 0)
    if zero.size:
        raise ZeroColumnError(int(zero[0]))

    groups = _row_groups(A)
    omega = max(g.size for g in groups)
    return ProblemSpec(
        A=_frozen(A), b=_frozen(b), gamma=gamma, v=_frozen(v), L=_frozen(L),
        groups=groups, omega=int(omega),
    )


def value(prob: ProblemSpec, x) -> float:
    return prob.value(x)


def gradient(prob: ProblemSpec, x) -> np.ndarray:
    return prob.gradient(x)


def partial_gradient(prob: ProblemSpec, x, idx) -> np.ndarray:
    return prob.partial_gradient(x, idx)


def minimizer(prob: ProblemSpec) -> Solution:
    """Exact minimizer from the normal equations ``(A^T A + gamma Diag(v)) x = A^T b``.

    Cholesky factorization followed by one step of iterative refinement.
    """
    A = prob.A
    H = A.T @ A
    H[np.diag_indices_from(H)] += prob.gamma * prob.v
    rhs = A.T @ prob.b
    factor = sla.cho_factor(H, lower=False, check_finite=False)
    x = sla.cho_solve(factor, rhs, check_finite=False)
    x = x + sla.cho_solve(factor, rhs - H @ x, check_finite=False)
    x.flags.writeable = False
    return Solution(x_star=x, phi_star=prob.value(x))


def gap(prob: ProblemSpec, x, sol: Solution) -> float:
    """Optimality gap ``phi(x) - phi*``.

    Evaluated as the quadratic form of ``x - x*`` instead of a difference of
    two objective values, which keeps it nonnegative and accurate near x*.
    """
    e = prob._check(x) - sol.x_star
    r = prob.A @ e
    return 0.5 * float(r @ r) + 0.5 * prob.gamma * float(prob.v @ (e * e))


def rescale(prob: ProblemSpec, d: Sequence[float]) -> ProblemSpec:
    """Problem in the variables ``y = Diag(d) x``.

    Column ``i`` of ``A`` is divided by ``d_i`` and ``v_i`` becomes
    ``v_i / d_i**2``; hence ``L_i`` also scales by ``1/d_i**2`` while the
    ratios ``L_i / v_i``, the groups and ``omega`` are unchanged.
    """
    d = np.asarray(d, dtype=float).reshape(-1)
    if d.shape != (prob.n,):
        raise DimensionError(f"d must have length {prob.n}, got {d.shape[0]}")
    if not np.all(d > 0):
        raise ValidationError("rescaling vector d must be positive")
    return build_least_squares(prob.A / d, prob.b, prob.gamma, prob.v / d**2)
