"""The synchronous nonuniform parallel coordinate descent iteration.

Each iteration draws a subset ``S`` from the sampling and sets

    x[i] <- x[i] - grad_i phi(x) / w[i]   for i in S,

with every partial derivative read at the current iterate before any
coordinate is written.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import ContractionViolation, DimensionError, DivergenceError, ValidationError
from .objective import ProblemSpec, Solution, gap, minimizer
from .rates import lambda_constant
from .eso import expected_values
from .sampling import SamplingScheme, atom_matrix, draw, enumerate_distribution, make_rng

__all__ = [
    "RunConfig",
    "Trace",
    "nsync_step",
    "nsync_run",
    "nsync_expected_decrease",
    "run_ensemble",
    "ensemble_summary",
    "EnsembleSummary",
    "traces_to_csv",
    "TRACE_HEADER",
]

TRACE_HEADER = ("run", "iter", "coord_updates", "epoch", "residual")


@dataclass(frozen=True)
class RunConfig:
    max_iters: int
    seed: int = 0
    x0: Optional[Sequence[float]] = None
    target_residual: Optional[float] = None
    record_every: int = 1
    gradient_mode: str = "full"

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValidationError("max_iters must be >= 1")
        if self.record_every < 1:
            raise ValidationError("record_every must be >= 1")
        if self.gradient_mode not in ("full", "incremental"):
            raise ValidationError(f"unknown gradient_mode {self.gradient_mode!r}")
        if self.target_residual is not None and not self.target_residual > 0:
            raise ValidationError("target_residual must be positive")


@dataclass
class Trace:
    """Recorded optimality gaps of one run.

    ``residuals`` holds ``(iteration, coordinate updates, phi(x) - phi*)``
    triples; iteration 0 and the last iteration are always recorded.
    """

    residuals: list[tuple[int, int, float]]
    final_x: np.ndarray
    iterations: int
    n: int
    seed: int = 0

    @property
    def coord_updates(self) -> int:
        return self.residuals[-1][1]

    @property
    def epochs(self) -> float:
        return self.coord_updates / self.n

    def arrays(self):
        it, cu, res = (np.array(col) for col in zip(*self.residuals))
        return it, cu, res


def nsync_step(prob: ProblemSpec, x: np.ndarray, S: np.ndarray, w: np.ndarray) -> None:
    """Apply one iteration in place for the drawn subset ``S``."""
    g = prob.partial_gradient(x, S)
    x[S] -= g / w[S]


def _check_finite(x, k):
    if not np.all(np.isfinite(x)):
        raise DivergenceError(
            f"non-finite iterate at iteration {k}; stepsizes w are likely too small for this sampling"
        )


def nsync_run(
    prob: ProblemSpec,
    scheme: SamplingScheme,
    w,
    cfg: RunConfig,
    solution: Optional[Solution] = None,
) -> Trace:
    """Run the method and record optimality gaps against the exact minimizer.

    ``w`` may be a :class:`~nsync.eso.StepSizes` or a plain vector. With
    ``cfg.target_residual`` set, the run stops at the first recorded gap at
    or below the target.
    """
    w = np.asarray(getattr(w, "w", w), dtype=float)
    n = prob.n
    if scheme.n != n or w.shape != (n,):
        raise DimensionError("problem, scheme and stepsizes must share the dimension n")
    if not np.all(w > 0):
        raise ValidationError("stepsizes w must be positive")
    if solution is None:
        solution = minimizer(prob)
    x = np.zeros(n) if cfg.x0 is None else np.array(cfg.x0, dtype=float)
    if x.shape != (n,):
        raise DimensionError(f"x0 must have length {n}")

    rng = make_rng(cfg.seed)
    inv_w = 1.0 / w
    A, gv = prob.A, prob.gamma * prob.v
    incremental = cfg.gradient_mode == "incremental"
    r = A @ x - prob.b

    _check_finite(x, 0)
    records = [(0, 0, gap(prob, x, solution))]
    updates = 0
    k = 0
    while k < cfg.max_iters:
        S = draw(scheme, rng)
        if incremental:
            g = A[:, S].T @ r + gv[S] * x[S]
            delta = -g * inv_w[S]
            x[S] += delta
            r += A[:, S] @ delta
        else:
            g = A.T @ (A @ x - prob.b)
            x[S] -= (g[S] + gv[S] * x[S]) * inv_w[S]
        k += 1
        updates += S.size
        if k % cfg.record_every == 0 or k == cfg.max_iters:
            _check_finite(x, k)
            res = gap(prob, x, solution)
            records.append((k, updates, res))
            if cfg.target_residual is not None and res <= cfg.target_residual:
                break
    return Trace(residuals=records, final_x=x, iterations=k, n=n, seed=cfg.seed)


class ExpectedDecrease(NamedTuple):
    expected_value: float
    certified_bound: float
    mu: float


def nsync_expected_decrease(
    prob: ProblemSpec,
    scheme: SamplingScheme,
    w,
    x,
    solution: Optional[Solution] = None,
    tol: float = 1e-9,
    check: bool = True,
) -> ExpectedDecrease:
    """Exact ``E[phi(x+)]`` after one iteration from ``x`` and the bound
    ``phi(x) - mu (phi(x) - phi*)`` with ``mu = gamma / Lambda``.

    Raises :class:`ContractionViolation` when the expectation exceeds the
    bound by more than ``tol * (1 + |phi(x)|)`` and ``check`` is true.
    """
    w = np.asarray(getattr(w, "w", w), dtype=float)
    x = np.asarray(x, dtype=float)
    if solution is None:
        solution = minimizer(prob)
    M, probs = atom_matrix(prob.n, enumerate_distribution(scheme))
    h = -prob.gradient(x) / w
    expected = float(expected_values(prob, M, probs, x[None, :], h[None, :])[0])
    lam, _ = lambda_constant(w, scheme.marginals, prob.v)
    mu = prob.gamma / lam
    phi_x = prob.value(x)
    bound = phi_x - mu * (phi_x - solution.phi_star)
    if check and expected > bound + tol * (1.0 + abs(phi_x)):
        raise ContractionViolation(
            f"E[phi(x+)] = {expected!r} exceeds certified bound {bound!r}"
        )
    return ExpectedDecrease(expected, bound, mu)


def _run_one(args):
    prob, scheme, w, cfg, solution = args
    return nsync_run(prob, scheme, w, cfg, solution)


def run_ensemble(
    prob: ProblemSpec,
    scheme: SamplingScheme,
    w,
    cfg: RunConfig,
    runs: int,
    workers: int = 1,
    solution: Optional[Solution] = None,
) -> list[Trace]:
    """Independent runs with seeds ``cfg.seed + r``, ``r = 0..runs-1``.

    Results do not depend on ``workers``.
    """
    if runs < 1:
        raise ValidationError("runs must be >= 1")
    if solution is None:
        solution = minimizer(prob)
    jobs = [
        (prob, scheme, w, replace(cfg, seed=cfg.seed + r), solution)
        for r in range(runs)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_one, jobs))
    return [_run_one(job) for job in jobs]


@dataclass
class EnsembleSummary:
    iterations: np.ndarray
    coord_updates: np.ndarray
    epochs: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    q025: np.ndarray
    median: np.ndarray
    q975: np.ndarray
    median_ci: np.ndarray = field(repr=False)


def _aligned(traces):
    """Gap matrix (runs x points) on the longest record grid.

    A run that stopped early keeps its last gap for the remaining points.
    """
    longest = max(traces, key=lambda t: len(t.residuals))
    it, cu, _ = longest.arrays()
    R = np.empty((len(traces), it.size))
    for k, t in enumerate(traces):
        res = t.arrays()[2]
        R[k, : res.size] = res
        R[k, res.size:] = res[-1]
    return it, cu, R


def ensemble_summary(traces: Sequence[Trace], bootstrap: int = 1000, seed: int = 0) -> EnsembleSummary:
    """Per-record statistics across runs.

    ``q025``/``q975`` are the empirical 2.5% and 97.5% percentiles of the
    runs (the 95% band). ``median_ci`` holds a percentile-bootstrap 95%
    interval for the median, shape (2, points).
    """
    it, cu, R = _aligned(traces)
    runs = R.shape[0]
    q025, median, q975 = np.percentile(R, [2.5, 50.0, 97.5], axis=0)
    stderr = R.std(axis=0, ddof=1) / np.sqrt(runs) if runs > 1 else np.zeros(it.size)
    if runs > 1 and bootstrap:
        rng = make_rng(seed)
        idx = rng.integers(0, runs, size=(bootstrap, runs))
        boot = np.median(R[idx], axis=1)
        median_ci = np.percentile(boot, [2.5, 97.5], axis=0)
    else:
        median_ci = np.vstack([median, median])
    return EnsembleSummary(
        iterations=it, coord_updates=cu, epochs=cu / traces[0].n, mean=R.mean(axis=0),
        stderr=stderr, q025=q025, median=median, q975=q975, median_ci=median_ci,
    )


def fmt(x) -> str:
    """Deterministic shortest round-trip text for numbers."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def traces_to_csv(traces: Iterable[Trace], out=None) -> str:
    """CSV with header ``run,iter,coord_updates,epoch,residual``; written to ``out`` if given."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    for run, t in enumerate(traces):
        for it, cu, res in t.residuals:
            writer.writerow([run, it, cu, fmt(cu / t.n), fmt(res)])
    text = buf.getvalue()
    if out is not None:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    return text
