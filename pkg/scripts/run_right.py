"""Optimal serial (NS) vs fully parallel (FP) updating per epoch for several omegas."""

import argparse

from nsync.experiments import experiment_right, summary_path


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--omegas", default="1,5,10")
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--epochs", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--v-profile", default="spike")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/right.csv")
    args = ap.parse_args()

    omegas = [int(t) for t in args.omegas.split(",")]
    res = experiment_right(
        omegas=omegas, runs=args.runs, epochs=args.epochs, seed=args.seed, out_path=args.out,
        v_profile=args.v_profile, workers=args.workers,
    )
    meta = dict(res.metadata)
    for omega in omegas:
        tag = f"omega={omega}"
        ns, fp = res.method("NS", omega).summary, res.method("FP", omega).summary
        print(
            f"{tag}: Lambda_OS={float(meta[tag + '.lambda_OS']):.1f} "
            f"Lambda_FP={float(meta[tag + '.lambda_FP']):.1f} "
            f"NS predicted faster: {meta[tag + '.NS_predicted_faster']}"
        )
        for k in (1, 5, 10, args.epochs):
            if k < ns.epochs.size:
                print(f"  epoch {k:3d}  NS median {ns.median[k]:10.3e}  FP median {fp.median[k]:10.3e}")
    print(f"\nwrote {args.out} and {summary_path(args.out)}")


if __name__ == "__main__":
    main()
