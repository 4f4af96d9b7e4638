"""Ring sweep for Algorithms A, B, C, printed next to the published reference values.

    python3 scripts/reproduce_ring_tables.py [--r 2..5] [--p 2..4] [--scaling multiplicity]
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "tests"))

from ietidp import bench  # noqa: E402
from test_acceptance import TABLES  # noqa: E402


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--r", default="2..5")
    ap.add_argument("--p", default="2..4")
    ap.add_argument("--alg", default="A,B,C")
    ap.add_argument("--scaling", default="multiplicity")
    ap.add_argument("--out", default=None, help="directory for csv output")
    args = ap.parse_args()

    config = bench.ExperimentConfig(domain="ring", p=bench.parse_range(args.p), r=bench.parse_range(args.r),
                                    algorithms=bench.parse_algorithms(args.alg), scaling=args.scaling)
    tables = bench.run_sweep(config, progress=lambda a, r, p, c: print(f"  {a} r={r} p={p}: it={c.iterations} "
                                                                       f"kappa={c.kappa}", file=sys.stderr))
    for t in tables:
        ref = TABLES[t.algorithm]
        print(f"\nAlgorithm {t.algorithm} ({args.scaling} scaling): it (kappa) / reference")
        print("| r\\p | " + " | ".join(map(str, t.p_values)) + " |")
        print("|---" * (len(t.p_values) + 1) + "|")
        for r in t.r_values:
            row = []
            for p in t.p_values:
                c = t.cell(r, p)
                s = f"{c.iterations} ({c.kappa:.2f})" if c.ok else f"error: {c.error}"
                if r in ref and 2 <= p <= 4:
                    it, k = ref[r][p - 2]
                    s += f" / {it} ({k:.2f})"
                row.append(s)
            print(f"| {r} | " + " | ".join(row) + " |")
        if args.out:
            os.makedirs(args.out, exist_ok=True)
            with open(os.path.join(args.out, f"ring_{t.algorithm}.csv"), "w", encoding="utf-8") as fh:
                fh.write(bench.emit_csv([t]))
    return 0


if __name__ == "__main__":
    sys.exit(main())
