"""Uniform vs optimal serial sampling on the dense 2 x 30 instance.

Writes per-run traces and per-epoch summary CSVs, then prints the median
gap of both methods every 10 epochs.
"""

import argparse

from nsync.experiments import experiment_left, summary_path


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--iters", type=int, default=3000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--perturb-L", type=float, default=None)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/left.csv")
    args = ap.parse_args()

    res = experiment_left(
        runs=args.runs, iters=args.iters, seed=args.seed, out_path=args.out,
        perturb_L=args.perturb_L, workers=args.workers,
    )
    for key, value in res.metadata:
        print(f"{key}: {value}")
    us, os_ = res.method("US").summary, res.method("OS").summary
    print(f"\n{'epoch':>6} {'US median':>12} {'OS median':>12}")
    for k in range(0, us.epochs.size, 10):
        print(f"{us.epochs[k]:6.0f} {us.median[k]:12.3e} {os_.median[k]:12.3e}")
    print(f"\nwrote {args.out} and {summary_path(args.out)}")


if __name__ == "__main__":
    main()
