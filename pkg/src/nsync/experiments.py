"""Instance generator and the two desk-scale experiments.

``experiment_left``: uniform serial (US) against optimal serial (OS) sampling
on a dense 2 x 30 problem with one weakly regularized coordinate.
``experiment_right``: optimal nonuniform serial (NS) against fully parallel
(FP) updating on sparse 8 x 10 problems of varying row sparsity omega.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .errors import ValidationError
from .eso import eso_stepsizes
from .formats import instance_hash
from .objective import ProblemSpec, build_least_squares, minimizer
from .probabilities import optimal_serial
from .rates import closed_form_constants, iteration_bound, rate_report
from .sampling import RNG_ALGORITHM, fully_parallel_scheme, make_rng, serial_scheme
from .solver import EnsembleSummary, RunConfig, Trace, ensemble_summary, fmt, run_ensemble

__all__ = [
    "GeneratorConfig",
    "parse_v_profile",
    "generate_instance",
    "left_instance",
    "MethodResult",
    "ExperimentResult",
    "experiment_left",
    "experiment_right",
    "summary_path",
]

SPIKE_VALUE = 0.05


@dataclass(frozen=True)
class GeneratorConfig:
    m: int
    n: int
    omega: int
    seed: int = 0
    v_profile: Union[str, Sequence[float]] = "ones"
    gamma: float = 1.0


def parse_v_profile(profile, n: int) -> np.ndarray:
    """Strong convexity weights from a profile spec.

    ``"ones"``; ``"spike"`` (``v_1 = 0.05``, rest 1) or ``"spike:<value>"``;
    a comma-separated list or a sequence of ``n`` positive numbers.
    """
    if isinstance(profile, str):
        name = profile.strip()
        if name == "ones":
            return np.ones(n)
        if name == "spike" or name.startswith("spike:"):
            v = np.ones(n)
            v[0] = float(name.split(":", 1)[1]) if ":" in name else SPIKE_VALUE
            return v
        try:
            values = [float(t) for t in name.split(",")]
        except ValueError:
            raise ValidationError(f"unknown v profile {profile!r}") from None
    else:
        values = list(profile)
    v = np.asarray(values, dtype=float)
    if v.shape != (n,):
        raise ValidationError(f"v profile has {v.size} entries, expected {n}")
    return v


def generate_instance(cfg: GeneratorConfig) -> ProblemSpec:
    """Random least-squares instance with exactly ``omega`` nonzeros per row.

    Column coverage is forced by dealing a random permutation of the columns
    round-robin over a random ordering of the rows; the remaining slots of
    each row are filled uniformly from its unused columns. Nonzeros are
    standard normal, then every column is scaled to unit norm (``L_i = 1``).
    ``b`` is standard normal.
    """
    m, n, omega = cfg.m, cfg.n, cfg.omega
    if not 1 <= omega <= n:
        raise ValidationError(f"omega must lie in [1, n={n}], got {omega}")
    if m < 1 or m * omega < n:
        raise ValidationError(f"m * omega = {m * omega} cannot cover n = {n} columns")
    rng = make_rng(cfg.seed)
    support = np.zeros((m, n), dtype=bool)
    rows = rng.permutation(m)
    for k, col in enumerate(rng.permutation(n)):
        support[rows[k % m], col] = True
    for i in range(m):
        free = np.flatnonzero(~support[i])
        need = omega - int(support[i].sum())
        if need > 0:
            support[i, rng.choice(free, size=need, replace=False)] = True
    A = np.where(support, rng.standard_normal((m, n)), 0.0)
    A /= np.linalg.norm(A, axis=0)
    b = rng.standard_normal(m)
    return build_least_squares(A, b, cfg.gamma, parse_v_profile(cfg.v_profile, n))


def left_instance(seed: int = 0, n: int = 30) -> ProblemSpec:
    """Dense 2 x n problem, unit columns, gamma = 1, v = (0.05, 1, ..., 1)."""
    return generate_instance(GeneratorConfig(m=2, n=n, omega=n, seed=seed, v_profile="spike"))


@dataclass
class MethodResult:
    label: str
    traces: list[Trace]
    summary: EnsembleSummary
    lam: float
    mu: float
    scheme: str
    w_policy: str


@dataclass
class ExperimentResult:
    methods: list[MethodResult]
    metadata: list[tuple[str, str]]
    csv_text: str
    summary_text: str
    groups: dict = field(default_factory=dict)

    def method(self, label: str, group=None) -> MethodResult:
        pool = self.groups[group] if group is not None else self.methods
        for m in pool:
            if m.label == label:
                return m
        raise KeyError(label)


def summary_path(out_path) -> Path:
    p = Path(out_path)
    return p.with_name(p.stem + ".summary" + p.suffix)


def _run_method(label, prob, scheme, w, scheme_desc, iters, record_every, runs, seed, solution, workers):
    cfg = RunConfig(max_iters=iters, seed=seed, record_every=record_every)
    traces = run_ensemble(prob, scheme, w, cfg, runs, workers=workers, solution=solution)
    rep = rate_report(w.w, scheme.marginals, prob.v, prob.gamma, scheme.expected_size)
    return MethodResult(
        label=label, traces=traces, summary=ensemble_summary(traces, seed=seed),
        lam=rep.lam, mu=rep.mu, scheme=scheme_desc, w_policy=w.policy,
    )


def _write(text, path):
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _render(metadata, header, rows):
    buf = io.StringIO()
    for key, value in metadata:
        buf.write(f"# {key}: {value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _method_meta(prefix, m: MethodResult):
    return [
        (f"{prefix}.scheme", m.scheme),
        (f"{prefix}.w_policy", m.w_policy),
        (f"{prefix}.lambda", fmt(m.lam)),
        (f"{prefix}.mu", fmt(m.mu)),
    ]


def _trace_rows(lead, m: MethodResult):
    for run, t in enumerate(m.traces):
        for it, cu, res in t.residuals:
            yield [*lead, m.label, run, it, cu, fmt(cu / t.n), fmt(res)]


def _summary_rows(lead, m: MethodResult):
    s = m.summary
    for k in range(s.iterations.size):
        yield [
            *lead, m.label, int(s.iterations[k]), int(s.coord_updates[k]), fmt(s.epochs[k]),
            fmt(s.mean[k]), fmt(s.q025[k]), fmt(s.median[k]), fmt(s.q975[k]),
            fmt(s.median_ci[0, k]), fmt(s.median_ci[1, k]),
        ]


TRACE_COLUMNS = ["method", "run", "iter", "coord_updates", "epoch", "residual"]
SUMMARY_COLUMNS = [
    "method", "iter", "coord_updates", "epoch",
    "mean", "q025", "median", "q975", "median_ci_lo", "median_ci_hi",
]


def experiment_left(
    runs: int = 100,
    iters: int = 3000,
    seed: int = 0,
    out_path=None,
    n: int = 30,
    perturb_L: Optional[float] = None,
    workers: int = 1,
) -> ExperimentResult:
    """US vs OS ensembles on the dense 2 x n instance from :func:`left_instance`.

    Gaps are recorded once per epoch (``n`` iterations) and at the last
    iteration. ``perturb_L`` multiplies ``L`` before the optimal serial
    probabilities are computed (stepsizes keep the true ``L``), to probe
    sensitivity to misestimated constants. When ``out_path`` is given the
    runs go there and per-epoch statistics to :func:`summary_path`.
    """
    prob = left_instance(seed, n)
    sol = minimizer(prob)
    us = serial_scheme(np.full(n, 1.0 / n))
    if perturb_L is None:
        p_os = optimal_serial(prob)
        os_desc = "serial(optimal)"
    else:
        kappa = (perturb_L * prob.L + prob.gamma * prob.v) / prob.v
        p_os = kappa / kappa.sum()
        os_desc = f"serial(optimal, L x {perturb_L!r})"
    os_ = serial_scheme(p_os)

    methods = [
        _run_method("US", prob, us, eso_stepsizes(prob, us), "serial(uniform)", iters, n, runs, seed, sol, workers),
        _run_method("OS", prob, os_, eso_stepsizes(prob, os_), os_desc, iters, n, runs, seed, sol, workers),
    ]
    gap0 = methods[0].traces[0].residuals[0][2]
    lam_os, lam_us, _ = closed_form_constants(prob)
    metadata = [
        ("experiment", "left"),
        ("seed", str(seed)),
        ("rng", RNG_ALGORITHM),
        ("run_seeds", "seed + run index"),
        ("instance_hash", instance_hash(prob)),
        ("instance", f"m=2 n={n} omega={prob.omega} gamma={fmt(prob.gamma)} v=spike({SPIKE_VALUE})"),
        ("x0", "zeros"),
        ("runs", str(runs)),
        ("iters", str(iters)),
        ("initial_gap", fmt(gap0)),
        ("lambda_OS_closed_form", fmt(lam_os)),
        ("lambda_US_closed_form", fmt(lam_us)),
    ]
    for m in methods:
        metadata += _method_meta(m.label, m)
    if gap0 > 0:
        metadata.append(("OS.K(eps=1e-4*gap0,rho=0.1)", str(iteration_bound(methods[1].lam, prob.gamma, gap0, 1e-4 * gap0, 0.1))))

    csv_text = _render(metadata, TRACE_COLUMNS, [r for m in methods for r in _trace_rows((), m)])
    summary_text = _render(metadata, SUMMARY_COLUMNS, [r for m in methods for r in _summary_rows((), m)])
    if out_path is not None:
        _write(csv_text, out_path)
        _write(summary_text, summary_path(out_path))
    return ExperimentResult(methods=methods, metadata=metadata, csv_text=csv_text, summary_text=summary_text)


def right_rows(n: int, omega: int, m: int) -> int:
    """Rows used for a given omega: ``m``, raised to ``ceil(n/omega)`` if needed for column coverage."""
    return max(m, math.ceil(n / omega))


def experiment_right(
    omegas: Sequence[int] = (1, 5, 10),
    runs: int = 100,
    epochs: int = 50,
    seed: int = 0,
    out_path=None,
    m: int = 8,
    n: int = 10,
    v_profile="spike",
    gamma: float = 1.0,
    workers: int = 1,
) -> ExperimentResult:
    """NS vs FP per epoch for several row sparsities ``omega``.

    NS uses the optimal serial probabilities with ``w = L + gamma v`` and
    ``n`` iterations per epoch; FP updates all coordinates with
    ``w = omega (L + gamma v)``, one iteration per epoch.
    """
    methods, groups = [], {}
    metadata = [
        ("experiment", "right"),
        ("seed", str(seed)),
        ("rng", RNG_ALGORITHM),
        ("run_seeds", "seed + run index"),
        ("x0", "zeros"),
        ("runs", str(runs)),
        ("epochs", str(epochs)),
        ("v_profile", v_profile if isinstance(v_profile, str) else ",".join(map(fmt, v_profile))),
    ]
    trace_rows, summary_rows = [], []
    for omega in omegas:
        rows = right_rows(n, omega, m)
        prob = generate_instance(GeneratorConfig(rows, n, omega, seed, v_profile, gamma))
        sol = minimizer(prob)
        ns = serial_scheme(optimal_serial(prob))
        fp = fully_parallel_scheme(n)
        group = [
            _run_method("NS", prob, ns, eso_stepsizes(prob, ns), "serial(optimal)", epochs * n, n, runs, seed, sol, workers),
            _run_method("FP", prob, fp, eso_stepsizes(prob, fp), "fully_parallel", epochs, 1, runs, seed, sol, workers),
        ]
        lam_os, _, lam_fp = closed_form_constants(prob)
        tag = f"omega={omega}"
        metadata += [
            (f"{tag}.m", str(rows)),
            (f"{tag}.instance_hash", instance_hash(prob)),
            (f"{tag}.lambda_OS", fmt(lam_os)),
            (f"{tag}.lambda_FP", fmt(lam_fp)),
            (f"{tag}.NS_epoch_factor", fmt((1 - prob.gamma / lam_os) ** n)),
            (f"{tag}.FP_epoch_factor", fmt(1 - prob.gamma / lam_fp)),
            (f"{tag}.NS_predicted_faster", str(lam_os / n < lam_fp)),
        ]
        for mres in group:
            metadata += _method_meta(f"{tag}.{mres.label}", mres)
            trace_rows += list(_trace_rows((omega,), mres))
            summary_rows += list(_summary_rows((omega,), mres))
        groups[omega] = group
        methods += group

    csv_text = _render(metadata, ["omega", *TRACE_COLUMNS], trace_rows)
    summary_text = _render(metadata, ["omega", *SUMMARY_COLUMNS], summary_rows)
    if out_path is not None:
        _write(csv_text, out_path)
        _write(summary_text, summary_path(out_path))
    return ExperimentResult(
        methods=methods, metadata=metadata, csv_text=csv_text, summary_text=summary_text, groups=groups,
    )
