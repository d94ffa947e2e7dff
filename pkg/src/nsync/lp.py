"""Dense two-phase tableau simplex for small linear programs.

Solves ``max c^T x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0`` with
Bland's rule, so it terminates on degenerate problems and is deterministic.
Intended for the tiny probability-design LPs in this package, not for
general large-scale use.
"""

from __future__ import annotations

import numpy as np

from .errors import NSyncError

__all__ = ["LPError", "InfeasibleLP", "UnboundedLP", "simplex_max"]

EPS = 1e-12


class LPError(NSyncError):
    pass


class InfeasibleLP(LPError):
    pass


class UnboundedLP(LPError):
    pass


def _pivot(T, basis, r, j):
    T[r] /= T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    T[:, j] = 0.0
    T[r, j] = 1.0
    basis[r] = j


def _run(T, basis, ncols, max_iter):
    """Bland's-rule iterations on tableau ``T`` (objective in the last row).

    Only the first ``ncols`` columns may enter the basis.
    """
    m = T.shape[0] - 1
    for _ in range(max_iter):
        obj = T[m, :ncols]
        candidates = np.flatnonzero(obj < -EPS)
        if candidates.size == 0:
            return
        j = int(candidates[0])
        col = T[:m, j]
        rows = np.flatnonzero(col > EPS)
        if rows.size == 0:
            raise UnboundedLP(f"objective unbounded along column {j}")
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        tied = rows[ratios <= best + EPS * max(1.0, abs(best))]
        r = int(min(tied, key=lambda i: basis[i]))
        _pivot(T, basis, r, j)
    raise LPError("simplex iteration limit reached")


def simplex_max(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, max_iter=10_000):
    """Return ``(x, value)`` maximizing ``c @ x`` over the polyhedron.

    Raises
    ------
    InfeasibleLP, UnboundedLP
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, dtype=float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).reshape(-1)
    A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).reshape(-1)
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq

    # columns: x (n) | slack/surplus (m_ub) | artificial (as needed) | rhs
    needs_art = np.concatenate([b_ub < 0, np.ones(m_eq, dtype=bool)])
    n_art = int(needs_art.sum())
    width = n + m_ub + n_art
    T = np.zeros((m + 1, width + 1))
    basis = np.empty(m, dtype=np.intp)

    T[:m_ub, :n] = A_ub
    T[:m_ub, n:n + m_ub] = np.eye(m_ub)
    T[:m_ub, -1] = b_ub
    T[m_ub:m, :n] = A_eq
    T[m_ub:m, -1] = b_eq
    neg = T[:m, -1] < 0
    T[:m][neg] *= -1.0

    a = n + m_ub
    for i in range(m):
        if needs_art[i]:
            T[i, a] = 1.0
            basis[i] = a
            a += 1
        else:
            basis[i] = n + i

    if n_art:
        # phase 1: maximize -sum(artificials)
        T[m, n + m_ub:width] = 1.0
        for i in range(m):
            if basis[i] >= n + m_ub:
                T[m] -= T[i]
        _run(T, basis, width, max_iter)
        if T[m, -1] < -1e-9:
            raise InfeasibleLP(f"phase 1 ended with infeasibility {-T[m, -1]:.3e}")
        # drive remaining artificials out of the basis
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if basis[i] >= n + m_ub:
                row = T[i, :n + m_ub]
                nz = np.flatnonzero(np.abs(row) > 1e-9)
                if nz.size:
                    _pivot(T, basis, i, int(nz[0]))
                else:
                    keep[i] = False
        rows = np.concatenate([np.flatnonzero(keep), [m]])
        T = np.concatenate([T[rows, :n + m_ub], T[rows, -1:]], axis=1)
        basis = basis[keep]
        m = basis.size

    # phase 2
    T[m, :] = 0.0
    T[m, :n] = -c
    for i in range(m):
        if basis[i] < n:
            T[m] += c[basis[i]] * T[i]
    _run(T, basis, n + m_ub, max_iter)

    x = np.zeros(n + m_ub)
    x[basis] = T[:m, -1]
    x = np.maximum(x[:n], 0.0)
    return x, float(c @ x)
