"""Condition numbers under the two scaling choices, side by side.

"multiplicity" counts jump rows per DOF (the default); "patch-count" counts the
patches sharing the DOF. They only differ for Algorithm B's vertex DOFs.

    python3 scripts/scaling_comparison.py [--domain ring] [--p 2] [--r 2..4]
"""

import argparse
import sys

from ietidp import bench, ieti


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--domain", default="ring")
    ap.add_argument("--p", default="2")
    ap.add_argument("--r", default="2..4")
    ap.add_argument("--alg", default="A,B,C")
    args = ap.parse_args()

    domain = bench.make_domain(args.domain)
    print(f"| alg | r | p | it / kappa ({' | '.join(ieti.SCALINGS)}) |")
    print("|---|---|---|---|")
    for alg in bench.parse_algorithms(args.alg):
        for r in bench.parse_range(args.r):
            for p in bench.parse_range(args.p):
                cells = []
                for s in ieti.SCALINGS:
                    _, rep = ieti.solve(domain, p, r, alg, rel_tol=1e-6, seed=42, scaling=s)
                    cells.append(f"{rep.iterations} / {rep.kappa:.2f}")
                print(f"| {alg} | {r} | {p} | " + " | ".join(cells) + " |")
    return 0


if __name__ == "__main__":
    sys.exit(main())
