"""Command-line entry point: ``nsync <subcommand> ...``.

Subcommands: gen, solve, rates, optq, validate, exp-left, exp-right.
Anywhere a scheme file is expected, ``--scheme`` also accepts one of the
keywords ``uniform``, ``optimal`` (serial samplings) or ``parallel``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import NSyncError
from .eso import eso_stepsizes, theta_stepsizes, verify_eso
from .experiments import GeneratorConfig, experiment_left, experiment_right, generate_instance, summary_path
from .formats import instance_hash, instance_to_text, read_instance, read_scheme, write_instance
from .objective import gap, minimizer
from .probabilities import lp_instance, optimal_q, optimal_serial
from .rates import closed_form_constants, rate_report
from .sampling import (
    RNG_ALGORITHM,
    chi_square_draws,
    enumerate_distribution,
    fully_parallel_scheme,
    make_rng,
    serial_scheme,
)
from .solver import RunConfig, run_ensemble, traces_to_csv

SCHEME_KEYWORDS = ("uniform", "optimal", "parallel")
CHI_SQUARE_MAX_ATOMS = 50
CHI_SQUARE_ALPHA = 1e-3


def _scheme(arg, prob):
    if arg == "uniform":
        return serial_scheme(np.full(prob.n, 1.0 / prob.n)), "serial(uniform)"
    if arg == "optimal":
        return serial_scheme(optimal_serial(prob)), "serial(optimal)"
    if arg == "parallel":
        return fully_parallel_scheme(prob.n), "fully_parallel"
    return read_scheme(arg), str(arg)


def _stepsizes(policy, prob, scheme):
    return theta_stepsizes(prob, scheme) if policy == "theta" else eso_stepsizes(prob, scheme)


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _json(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def cmd_gen(args):
    cfg = GeneratorConfig(args.m, args.n, args.omega, args.seed, args.v_profile, args.gamma)
    prob = generate_instance(cfg)
    if args.out is None:
        sys.stdout.write(instance_to_text(prob))
    else:
        write_instance(prob, args.out)
    return 0


def cmd_rates(args):
    prob = read_instance(args.instance)
    scheme, desc = _scheme(args.scheme, prob)
    w = _stepsizes(args.stepsizes, prob, scheme)
    sol = minimizer(prob)
    gap0 = gap(prob, np.zeros(prob.n), sol)
    with_k = args.epsilon is not None and gap0 > args.epsilon
    rep = rate_report(
        w.w, scheme.marginals, prob.v, prob.gamma, scheme.expected_size,
        initial_gap=gap0 if with_k else None,
        epsilon=args.epsilon if with_k else None,
        rho=args.rho if with_k else None,
    )
    lam_os, lam_us, lam_fp = closed_form_constants(prob)
    doc = {
        "instance_hash": instance_hash(prob),
        "scheme": desc,
        "tau": scheme.tau,
        "w_policy": w.policy,
        "theta": w.theta,
        **rep.as_dict(),
        "initial_gap_from_zero": gap0,
        "closed_form": {"lambda_OS": lam_os, "lambda_US": lam_us, "lambda_FP": lam_fp},
    }
    _emit(_json(doc), args.out)
    return 0


def cmd_optq(args):
    prob = read_instance(args.instance)
    scheme, _ = _scheme(args.scheme, prob)
    inst = lp_instance(prob, scheme.sets, scheme.tau)
    sol = optimal_q(inst)
    doc = {
        "instance_hash": instance_hash(prob),
        "tau": inst.tau,
        "theta": inst.theta,
        "sets": [[int(i) + 1 for i in s] for s in inst.sets],
        "q": sol.q.tolist(),
        "alpha": sol.alpha,
        "lambda": sol.lam,
    }
    _emit(_json(doc), args.out)
    return 0


def cmd_validate(args):
    prob = read_instance(args.instance)
    scheme, desc = _scheme(args.scheme, prob)
    w = _stepsizes(args.stepsizes, prob, scheme)
    rng = make_rng(args.seed)
    eso = verify_eso(prob, scheme, w, args.trials, rng)
    doc = {
        "scheme": desc,
        "w_policy": w.policy,
        "seed": args.seed,
        "rng": RNG_ALGORITHM,
        "eso": {
            "trials": eso.trials,
            "violations": eso.violations,
            "worst_scaled_slack": eso.worst_scaled_slack,
            "passed": eso.passed,
        },
    }
    passed = eso.passed
    if args.draws > 0:
        n_atoms = len(enumerate_distribution(scheme))
        if n_atoms <= CHI_SQUARE_MAX_ATOMS:
            stat, pval, atoms = chi_square_draws(scheme, args.draws, rng)
            ok = pval >= CHI_SQUARE_ALPHA
            doc["chi_square"] = {
                "draws": args.draws, "atoms": atoms, "statistic": stat, "p_value": pval,
                "alpha": CHI_SQUARE_ALPHA, "passed": ok,
            }
            passed = passed and ok
        else:
            doc["chi_square"] = {"skipped": f"{n_atoms} atoms > {CHI_SQUARE_MAX_ATOMS}"}
    doc["passed"] = passed
    _emit(_json(doc), args.out)
    return 0 if passed else 1


def cmd_solve(args):
    prob = read_instance(args.instance)
    scheme, _ = _scheme(args.scheme, prob)
    w = _stepsizes(args.stepsizes, prob, scheme)
    cfg = RunConfig(
        max_iters=args.iters, seed=args.seed, record_every=args.record_every,
        target_residual=args.target,
    )
    traces = run_ensemble(prob, scheme, w, cfg, args.runs)
    _emit(traces_to_csv(traces), args.out)
    return 0


def cmd_exp_left(args):
    res = experiment_left(
        runs=args.runs, iters=args.iters, seed=args.seed, out_path=args.out,
        perturb_L=args.perturb_L, workers=args.workers,
    )
    if args.out is None:
        sys.stdout.write(res.csv_text)
    else:
        print(f"wrote {args.out} and {summary_path(args.out)}", file=sys.stderr)
    return 0


def cmd_exp_right(args):
    omegas = [int(t) for t in args.omegas.split(",")]
    res = experiment_right(
        omegas=omegas, runs=args.runs, epochs=args.epochs, seed=args.seed, out_path=args.out,
        v_profile=args.v_profile, workers=args.workers,
    )
    if args.out is None:
        sys.stdout.write(res.csv_text)
    else:
        print(f"wrote {args.out} and {summary_path(args.out)}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nsync", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, instance=True, scheme=True):
        if instance:
            p.add_argument("--instance", required=True, help="instance JSON file")
        if scheme:
            p.add_argument("--scheme", required=True, help=f"scheme JSON file or one of {SCHEME_KEYWORDS}")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None, help="output path (default: stdout)")

    p = sub.add_parser("gen", help="generate a random least-squares instance")
    common(p, instance=False, scheme=False)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--omega", type=int, required=True, help="nonzeros per row")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--v-profile", default="ones", help="ones | spike | spike:<v1> | comma list")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("rates", help="rate constants for an instance and scheme")
    common(p)
    p.add_argument("--stepsizes", choices=("eso", "theta"), default="eso")
    p.add_argument("--epsilon", type=float, default=None, help="target gap for the iteration bound")
    p.add_argument("--rho", type=float, default=0.1)
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("optq", help="optimal set probabilities by linear programming")
    common(p)
    p.set_defaults(func=cmd_optq)

    p = sub.add_parser("validate", help="check the ESO inequality and the sampler")
    common(p)
    p.add_argument("--stepsizes", choices=("eso", "theta"), default="eso")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--draws", type=int, default=100_000, help="draws for the chi-square test (0 disables)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="run the method and write the gap trace as CSV")
    common(p)
    p.add_argument("--stepsizes", choices=("eso", "theta"), default="eso")
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--record-every", type=int, default=1)
    p.add_argument("--target", type=float, default=None, help="stop once the gap is at most this")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("exp-left", help="uniform vs optimal serial sampling")
    common(p, instance=False, scheme=False)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--iters", type=int, default=3000)
    p.add_argument("--perturb-L", type=float, default=None, help="scale L by this before computing p*")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_exp_left)

    p = sub.add_parser("exp-right", help="nonuniform serial vs fully parallel per epoch")
    common(p, instance=False, scheme=False)
    p.add_argument("--omegas", default="1,5,10")
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--v-profile", default="spike")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_exp_right)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NSyncError as e:
        print(f"nsync {args.command}: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
