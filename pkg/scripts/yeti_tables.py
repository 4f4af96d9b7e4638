"""Footprint sweep (84 patches) for Algorithms A, B, C.

    python3 scripts/yeti_tables.py [--r 1..3] [--p 2..3] [--scaling multiplicity]
"""

import argparse
import sys

from ietidp import bench
from ietidp.geometry import build_yeti


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--r", default="1..3")
    ap.add_argument("--p", default="2..3")
    ap.add_argument("--alg", default="A,B,C")
    ap.add_argument("--scaling", default="multiplicity")
    args = ap.parse_args()

    d = build_yeti()
    print(f"footprint: {d.num_patches} patches, {len(d.interfaces)} interfaces, "
          f"{len(d.interior_vertices())} interior vertices")
    config = bench.ExperimentConfig(domain="yeti", p=bench.parse_range(args.p), r=bench.parse_range(args.r),
                                    algorithms=bench.parse_algorithms(args.alg), scaling=args.scaling)
    for t in bench.run_sweep(config, d):
        print()
        print(bench.emit_markdown(t))
    return 0


if __name__ == "__main__":
    sys.exit(main())
