"""Command line: ``ietidp solve | check | validate``.

Exit codes: 0 success, 1 solver failure, 2 configuration or parse error.
"""

import argparse
import logging
import os
import re
import sys

from . import bench
from .geometry import DomainParseError, GeometryError

log = logging.getLogger("ietidp")

EXIT_OK, EXIT_SOLVER, EXIT_CONFIG = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_sweep_args(sp, default_p, default_r):
    sp.add_argument("--domain", default="ring", help="ring | yeti | grid:MxN | path to a domain file")
    sp.add_argument("--p", default=default_p, help="degree range, e.g. 2..4 or 2,3")
    sp.add_argument("--r", default=default_r, help="refinement range, e.g. 2..4")
    sp.add_argument("--alg", default="A,B,C", help="subset of A,B,C")
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--scaling", default="multiplicity", choices=("multiplicity", "patch-count"))
    sp.add_argument("--max-iter", type=int, default=2000)


def build_parser():
    ap = _Parser(prog="ietidp", description="IETI-DP solver for 2D Poisson on multi-patch spline domains")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="run a (p, r, algorithm) sweep and emit iteration/condition tables")
    _add_sweep_args(s, "2..4", "2..4")
    s.add_argument("--tol", type=float, default=1e-6, help="relative residual reduction")
    s.add_argument("--format", default="csv", choices=("csv", "markdown"))
    s.add_argument("--out", default=None, help="output directory (default: stdout)")
    s.add_argument("--time-budget", type=float, default=600.0, help="seconds per cell")
    s.add_argument("--no-caps", action="store_true", help="lift the default r/p sweep caps")

    c = sub.add_parser("check", help="cross-check IETI-DP against a direct global solve")
    _add_sweep_args(c, "1..2", "1..2")

    v = sub.add_parser("validate", help="parse a domain file and check topology and matching")
    v.add_argument("path")
    return ap


def _config(args, **kw):
    return bench.ExperimentConfig(domain=args.domain, p=bench.parse_range(args.p), r=bench.parse_range(args.r),
                                  algorithms=bench.parse_algorithms(args.alg), seed=args.seed,
                                  scaling=args.scaling, max_iter=args.max_iter, **kw)


def _slug(name):
    return re.sub(r"[^A-Za-z0-9]+", "_", os.path.basename(name)).strip("_") or "domain"


def cmd_solve(args):
    config = _config(args, rel_tol=args.tol, format=args.format, time_budget=args.time_budget,
                     enforce_caps=not args.no_caps)

    def progress(alg, r, p, cell):
        state = "ok" if cell.ok else cell.error
        log.info("%s r=%d p=%d: it=%s kappa=%s (%.1fs, %s)", alg, r, p, cell.iterations,
                 cell.kappa, cell.seconds, state)

    domain = bench.make_domain(config.domain)
    bad = bench.check_matching(domain, config.p, config.r)
    if bad:
        print(f"matching validation failed: {bad}", file=sys.stderr)
        return EXIT_CONFIG
    tables = bench.run_sweep(config, domain, progress=progress)
    ext = "csv" if config.format == "csv" else "md"
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        for t in tables:
            path = os.path.join(args.out, f"{_slug(config.domain)}_{t.algorithm}.{ext}")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(bench.emit(t, config.format))
            print(path)
    else:
        sys.stdout.write(bench.emit(tables, config.format))
    failed = 0
    for t in tables:
        for r, p in t.failed:
            print(f"cell {t.algorithm} r={r} p={p} failed: {t.cells[(r, p)].error}", file=sys.stderr)
            failed += 1
    return EXIT_SOLVER if failed else EXIT_OK


def cmd_check(args):
    config = _config(args)
    report = bench.cross_check(config)
    for line in report.lines():
        print(line)
    if report.matching_failure:
        return EXIT_CONFIG
    return EXIT_OK if report.ok else EXIT_SOLVER


def cmd_validate(args):
    domain, problems = bench.validate_file(args.path)
    for msg in problems:
        print(msg)
    if problems:
        return EXIT_CONFIG
    print(f"{args.path}: {domain.num_patches} patches, {len(domain.interfaces)} interfaces, "
          f"{len(domain.vertices)} vertices ({len(domain.interior_vertices())} interior): ok")
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    handler = {"solve": cmd_solve, "check": cmd_check, "validate": cmd_validate}[args.command]
    try:
        return handler(args)
    except DomainParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (bench.ConfigError, GeometryError, FileNotFoundError, IsADirectoryError) as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
