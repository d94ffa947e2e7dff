"""Sampling probabilities that minimize the rate constant Lambda.

Serial sampling has a closed form. For fixed sets ``S_j`` and minibatch size
``tau`` with stepsizes ``theta (L + gamma v)``, the set probabilities ``q``
solve the maximin linear program

    max alpha  s.t.  alpha <= <b^i, q> for all i,  q >= 0,  sum(q) = 1

with ``b^i_j = v_i / (L_i + gamma v_i) * [i in S_j] / |S_j|``; then
``Lambda = (theta / tau) / alpha``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Optional, Sequence

import numpy as np

from .errors import CoverageError, ValidationError
from .eso import set_factors
from .lp import simplex_max
from .objective import ProblemSpec
from .sampling import build_scheme

__all__ = [
    "LPInstance",
    "LPSolution",
    "optimal_serial",
    "lp_instance",
    "optimal_q",
    "optimal_q_bruteforce",
    "min_margin",
]

Q_FLOOR = 1e-9


@dataclass(frozen=True, eq=False)
class LPInstance:
    B: np.ndarray
    sets: tuple[np.ndarray, ...]
    tau: int
    theta: float

    @property
    def c(self) -> int:
        return self.B.shape[1]

    @property
    def n(self) -> int:
        return self.B.shape[0]


@dataclass(frozen=True, eq=False)
class LPSolution:
    q: np.ndarray
    alpha: float
    lam: Optional[float] = None


def optimal_serial(prob: ProblemSpec) -> np.ndarray:
    """Serial probabilities ``p_i`` proportional to ``(L_i + gamma v_i) / v_i``."""
    kappa = prob.curvature / prob.v
    return kappa / kappa.sum()


def lp_instance(prob: ProblemSpec, sets: Sequence[Sequence[int]], tau: int) -> LPInstance:
    c = len(sets)
    # validates coverage and |S_j| >= tau
    scheme = build_scheme(prob.n, sets, np.full(c, 1.0 / c) if c else [], tau)
    delta = scheme.membership()
    weights = prob.v / prob.curvature
    B = weights[:, None] * delta / scheme.set_sizes[None, :]
    B.flags.writeable = False
    theta = float(set_factors(prob, scheme).max())
    return LPInstance(B=B, sets=scheme.sets, tau=scheme.tau, theta=theta)


def min_margin(B, q) -> float:
    """``min_i <b^i, q>``, the LP objective at ``q``."""
    return float(np.min(np.asarray(B) @ np.asarray(q, dtype=float)))


def _lambda(inst, alpha):
    return inst.theta / inst.tau / alpha


def _floor(q, floor):
    q = np.maximum(q, floor)
    return q / q.sum()


def optimal_q(
    instance: LPInstance, lexicographic: bool = True, floor: float = Q_FLOOR
) -> LPSolution:
    """Solve the maximin LP by simplex.

    Among optimal solutions the lexicographically smallest ``q`` is returned
    (found by successively minimizing ``q_1, q_2, ...`` over the optimal
    face). Entries are then floored at ``floor`` and renormalized so every
    set keeps positive probability; ``alpha`` and ``lam`` are recomputed for
    the floored ``q``.
    """
    B = np.asarray(instance.B, dtype=float)
    n, c = B.shape
    if np.any(~(B > 0).any(axis=1)):
        raise CoverageError("some coordinate belongs to no set (zero row in B)")

    # variables (q_1..q_c, alpha) >= 0; alpha* > 0 because every row of B is positive somewhere
    A_ub = np.hstack([-B, np.ones((n, 1))])
    b_ub = np.zeros(n)
    A_eq = np.hstack([np.ones((1, c)), np.zeros((1, 1))])
    b_eq = np.ones(1)
    obj = np.zeros(c + 1)
    obj[-1] = 1.0
    x, alpha = simplex_max(obj, A_ub, b_ub, A_eq, b_eq)
    q = x[:c]

    if lexicographic and c > 1:
        tol = 1e-12 * alpha
        rows_ub = [A_ub, -obj[None, :]]
        rhs_ub = [b_ub, [-(alpha - tol)]]
        for j in range(c - 1):
            target = np.zeros(c + 1)
            target[j] = -1.0
            xj, _ = simplex_max(target, np.vstack(rows_ub), np.concatenate(rhs_ub), A_eq, b_eq)
            fix = np.zeros(c + 1)
            fix[j] = 1.0
            rows_ub.append(fix[None, :])
            rhs_ub.append([xj[j] + tol])
            q = xj[:c]

    q = _floor(q / q.sum(), floor)
    q.flags.writeable = False
    alpha = min_margin(B, q)
    return LPSolution(q=q, alpha=alpha, lam=_lambda(instance, alpha))


def _simplex_grid(c, resolution):
    """All ``q`` on the simplex with coordinates in multiples of ``1/resolution``."""
    pts = []
    for bars in combinations(range(resolution + c - 1), c - 1):
        edges = (-1,) + bars + (resolution + c - 1,)
        pts.append([edges[k + 1] - edges[k] - 1 for k in range(c)])
    return np.asarray(pts, dtype=float) / resolution


def _vertices(B):
    """Feasible basic solutions of the LP, by brute force over active sets."""
    n, c = B.shape
    # inequality rows as G @ (q, alpha) <= 0
    G = np.vstack([np.hstack([-B, np.ones((n, 1))]), np.hstack([-np.eye(c), np.zeros((c, 1))])])
    eq = np.concatenate([np.ones(c), [0.0]])
    out = []
    for active in combinations(range(G.shape[0]), c):
        M = np.vstack([G[list(active)], eq])
        rhs = np.zeros(c + 1)
        rhs[-1] = 1.0
        try:
            sol = np.linalg.solve(M, rhs)
        except np.linalg.LinAlgError:
            continue
        if np.all(G @ sol <= 1e-12) and np.isfinite(sol).all():
            out.append(sol[:c])
    return np.asarray(out).reshape(-1, c)


def grid_resolution(c: int, points: int = 10_000) -> int:
    """Smallest resolution whose simplex grid has at least ``points`` points."""
    if c == 1:
        return 1
    r = 1
    while comb(r + c - 1, c - 1) < points:
        r += 1
    return r


def optimal_q_bruteforce(instance: LPInstance, grid: Optional[int] = None) -> LPSolution:
    """Oracle for :func:`optimal_q`: best of a simplex grid and all LP vertices.

    Only for ``c <= 4``. ``grid`` is the resolution (points are multiples of
    ``1/grid``); by default the smallest one giving at least 10**4 points.
    """
    B = np.asarray(instance.B, dtype=float)
    c = B.shape[1]
    if c > 4:
        raise ValidationError(f"brute force oracle supports c <= 4, got c = {c}")
    if grid is None:
        grid = grid_resolution(c)
    cands = np.vstack([_simplex_grid(c, grid), _vertices(B)])
    margins = (cands @ B.T).min(axis=1)
    k = int(np.argmax(margins))
    q = cands[k]
    alpha = float(margins[k])
    return LPSolution(q=q, alpha=alpha, lam=_lambda(instance, alpha))
