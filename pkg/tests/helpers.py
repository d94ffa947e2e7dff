"""Random instance and scheme factories shared by the tests."""

import numpy as np

from nsync.objective import build_least_squares
from nsync.sampling import build_scheme


def random_problem(rng, n=None, m=None, density=0.5, gamma=None, max_n=8):
    n = int(rng.integers(1, max_n + 1)) if n is None else n
    m = int(rng.integers(1, 7)) if m is None else m
    mask = rng.random((m, n)) < density
    # every column needs a nonzero
    for j in np.flatnonzero(~mask.any(axis=0)):
        mask[rng.integers(m), j] = True
    A = np.where(mask, rng.standard_normal((m, n)), 0.0)
    b = rng.standard_normal(m)
    if gamma is None:
        gamma = float(np.exp(rng.uniform(np.log(0.1), np.log(10.0))))
    v = np.exp(rng.uniform(np.log(0.05), np.log(5.0), n))
    return build_least_squares(A, b, gamma, v)


def random_scheme(rng, n, max_c=3, max_tau=3):
    c = int(rng.integers(1, max_c + 1))
    tau = int(rng.integers(1, min(max_tau, n) + 1))
    sets = []
    for _ in range(c):
        size = int(rng.integers(tau, n + 1))
        sets.append(set(rng.choice(n, size=size, replace=False).tolist()))
    covered = set().union(*sets)
    for i in range(n):
        if i not in covered:
            sets[int(rng.integers(c))].add(i)
    q = rng.dirichlet(np.ones(c)) + 1e-3
    q /= q.sum()
    return build_scheme(n, [sorted(s) for s in sets], q, tau)


def identity_problem(b=(0.0, 0.0)):
    return build_least_squares(np.eye(2), b, 1.0, [1.0, 1.0])


def scalar_problem():
    return build_least_squares([[1.0]], [1.0], 1.0, [1.0])
