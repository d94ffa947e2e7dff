"""Two-tier nonuniform sampling of coordinate subsets.

A draw first picks set ``S_j`` with probability ``q_j`` and then a subset of
``S_j`` of cardinality ``tau``, uniformly among all such subsets (a
``tau``-nice sampling of ``S_j``). Coordinates are 0-based throughout the
library; file formats use 1-based indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Sequence

import numpy as np
from scipy import stats

from .errors import (
    CoverageError,
    EnumerationTooLarge,
    ProbabilityError,
    SetSizeError,
    ValidationError,
)

__all__ = [
    "RNG_ALGORITHM",
    "make_rng",
    "SamplingScheme",
    "build_scheme",
    "serial_scheme",
    "fully_parallel_scheme",
    "draw",
    "enumerate_distribution",
    "marginals_from_atoms",
    "atom_matrix",
    "chi_square_draws",
]

RNG_ALGORITHM = "numpy.random.Generator(PCG64)"
ENUMERATION_LIMIT = 10**6
PROB_TOL = 1e-12


def make_rng(seed: int) -> np.random.Generator:
    """Seeded stream used everywhere; run ``r`` of an ensemble uses ``seed + r``."""
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True, eq=False)
class SamplingScheme:
    n: int
    sets: tuple[np.ndarray, ...]
    q: np.ndarray
    tau: int
    marginals: np.ndarray
    expected_size: float
    cum_q: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "cum_q", np.cumsum(self.q))

    @property
    def c(self) -> int:
        return len(self.sets)

    @property
    def set_sizes(self) -> np.ndarray:
        return np.array([s.size for s in self.sets])

    def membership(self) -> np.ndarray:
        """Boolean ``n x c`` matrix ``delta[i, j] = (i in S_j)``."""
        delta = np.zeros((self.n, self.c), dtype=bool)
        for j, s in enumerate(self.sets):
            delta[s, j] = True
        return delta


def _as_probability(q, name="q"):
    q = np.asarray(q, dtype=float).reshape(-1)
    if q.size == 0:
        raise ProbabilityError(f"{name} is empty")
    if not np.all(np.isfinite(q)) or not np.all(q > 0):
        raise ProbabilityError(f"{name} must be strictly positive, got {q}")
    if abs(q.sum() - 1.0) > PROB_TOL:
        raise ProbabilityError(f"{name} must sum to 1, sums to {q.sum()!r}")
    return q


def _eq8_marginals(n, sets, q, tau):
    p = np.zeros(n)
    for qj, s in zip(q, sets):
        p[s] += qj * tau / s.size
    return p


def build_scheme(n: int, sets: Sequence[Sequence[int]], q, tau: int) -> SamplingScheme:
    """Validate a two-tier sampling and cache its marginals.

    ``p_i = sum_j q_j * tau / |S_j| * [i in S_j]``.
    """
    n = int(n)
    tau = int(tau)
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    if tau < 1:
        raise SetSizeError(f"tau must be >= 1, got {tau}")
    canon = []
    for j, s in enumerate(sets):
        arr = np.unique(np.asarray(list(s), dtype=np.intp))
        if arr.size != len(s):
            raise ValidationError(f"set {j} contains duplicate indices")
        if arr.size and (arr[0] < 0 or arr[-1] >= n):
            raise ValidationError(f"set {j} has indices outside [0, {n})")
        if arr.size < tau:
            raise SetSizeError(f"set {j} has {arr.size} elements, fewer than tau={tau}")
        arr.flags.writeable = False
        canon.append(arr)
    if not canon:
        raise CoverageError("at least one set is required")
    covered = np.zeros(n, dtype=bool)
    for s in canon:
        covered[s] = True
    if not covered.all():
        raise CoverageError(f"sets do not cover coordinates {np.flatnonzero(~covered).tolist()}")
    q = _as_probability(q)
    if q.size != len(canon):
        raise ProbabilityError(f"q has {q.size} entries for {len(canon)} sets")
    q.flags.writeable = False

    p = _eq8_marginals(n, canon, q, tau)
    p.flags.writeable = False
    return SamplingScheme(
        n=n, sets=tuple(canon), q=q, tau=tau, marginals=p, expected_size=float(tau),
    )


def serial_scheme(p) -> SamplingScheme:
    """One coordinate per iteration, coordinate ``i`` with probability ``p_i``."""
    p = _as_probability(p, "p")
    return build_scheme(p.size, [[i] for i in range(p.size)], p, 1)


def fully_parallel_scheme(n: int) -> SamplingScheme:
    return build_scheme(n, [range(n)], [1.0], n)


def draw(scheme: SamplingScheme, rng: np.random.Generator) -> np.ndarray:
    """Draw one subset (sorted index array of size ``tau``)."""
    if scheme.c == 1:
        j = 0
    else:
        j = int(np.searchsorted(scheme.cum_q, rng.random(), side="right"))
        j = min(j, scheme.c - 1)
    s = scheme.sets[j]
    k, tau = s.size, scheme.tau
    if tau == k:
        return s
    # partial Fisher-Yates over S_j
    pool = s.copy()
    for t in range(tau):
        r = int(rng.integers(t, k))
        pool[t], pool[r] = pool[r], pool[t]
    return np.sort(pool[:tau])


def enumerate_distribution(scheme: SamplingScheme, limit: int = ENUMERATION_LIMIT):
    """All atoms ``(subset, probability)`` of the sampling, subsets as sorted tuples.

    ``P(S) = sum_j q_j [S subset of S_j, |S| = tau] / C(|S_j|, tau)``.
    Atoms are returned in lexicographic order of the subsets.
    """
    total = sum(comb(s.size, scheme.tau) for s in scheme.sets)
    if total > limit:
        raise EnumerationTooLarge(f"{total} subsets exceed the enumeration limit {limit}")
    atoms: dict[tuple[int, ...], float] = {}
    for qj, s in zip(scheme.q, scheme.sets):
        weight = qj / comb(s.size, scheme.tau)
        for sub in combinations(s.tolist(), scheme.tau):
            atoms[sub] = atoms.get(sub, 0.0) + weight
    return sorted(atoms.items())


def marginals_from_atoms(n: int, atoms) -> np.ndarray:
    p = np.zeros(n)
    for sub, prob in atoms:
        p[list(sub)] += prob
    return p


def atom_matrix(n: int, atoms) -> tuple[np.ndarray, np.ndarray]:
    """Indicator matrix (atoms x n) and probability vector of an enumeration."""
    M = np.zeros((len(atoms), n))
    probs = np.empty(len(atoms))
    for k, (sub, prob) in enumerate(atoms):
        M[k, list(sub)] = 1.0
        probs[k] = prob
    return M, probs


def chi_square_draws(scheme: SamplingScheme, draws: int, rng: np.random.Generator):
    """Pearson goodness-of-fit of ``draws`` samples against the exact law.

    Returns ``(statistic, p_value, number_of_atoms)``; with a single atom the
    p-value is 1 when every draw hits it.
    """
    atoms = enumerate_distribution(scheme)
    index = {sub: k for k, (sub, _) in enumerate(atoms)}
    counts = np.zeros(len(atoms))
    for _ in range(draws):
        counts[index[tuple(draw(scheme, rng).tolist())]] += 1
    expected = draws * np.array([p for _, p in atoms])
    if len(atoms) == 1:
        return 0.0, 1.0 if counts[0] == draws else 0.0, 1
    res = stats.chisquare(counts, expected * (counts.sum() / expected.sum()))
    return float(res.statistic), float(res.pvalue), len(atoms)
