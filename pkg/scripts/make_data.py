"""Regenerate the example instance and scheme files in data/."""

import argparse
from pathlib import Path

from nsync.experiments import GeneratorConfig, generate_instance, left_instance
from nsync.formats import write_instance, write_scheme
from nsync.sampling import build_scheme


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    write_instance(left_instance(), out / "left_n30.json")
    write_instance(generate_instance(GeneratorConfig(2, 6, 6, seed=3, v_profile="spike")), out / "left_n6.json")
    write_instance(generate_instance(GeneratorConfig(8, 10, 5, seed=1, v_profile="spike")), out / "sparse_m8_n10_w5.json")
    write_scheme(build_scheme(6, [[0, 1, 2], [2, 3, 4, 5]], [0.5, 0.5], 2), out / "scheme_overlap_n6.json")
    write_scheme(build_scheme(10, [range(0, 6), range(4, 10)], [0.5, 0.5], 2), out / "scheme_two_blocks_n10.json")
    write_scheme(build_scheme(10, [[i] for i in range(10)], [0.1] * 10, 1), out / "scheme_serial_n10.json")
    for p in sorted(out.glob("*.json")):
        print(p)


if __name__ == "__main__":
    main()
