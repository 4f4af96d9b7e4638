"""Benchmark sweeps over (domain, p, r, algorithm), table output and oracle cross-checks."""

import csv
import io
import math
import re
import signal
import threading
import time
from contextlib import contextmanager
from dataclasses import dataclass, field

from . import ieti
from .geometry import (DomainParseError, GeometryError, build_ring, build_unit_square_grid,
                       build_yeti, load_domain, validate_matching)

# default sweep caps per named domain: (max r, max p)
CAPS = {"ring": (6, 6), "yeti": (4, 4)}
CSV_HEADER = ("r", "p", "algorithm", "iterations", "kappa", "seed")


class ConfigError(ValueError):
    """Invalid experiment configuration (exit code 2 on the command line)."""


def parse_range(text):
    """'2..4' -> [2, 3, 4]; '3' -> [3]; '1,3,5' -> [1, 3, 5]."""
    text = str(text).strip()
    try:
        if ".." in text:
            lo, hi = text.split("..")
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ConfigError(f"empty range {text!r}")
            return list(range(lo, hi + 1))
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"bad range {text!r}; expected e.g. 2..4 or 1,3") from None
    if not vals:
        raise ConfigError(f"empty range {text!r}")
    return vals


def parse_algorithms(text):
    algs = [a.strip().upper() for a in str(text).split(",") if a.strip()]
    bad = [a for a in algs if a not in ieti.ALGORITHMS]
    if bad or not algs:
        raise ConfigError(f"bad algorithm list {text!r}; expected a subset of A,B,C")
    return list(dict.fromkeys(algs))


_GRID = re.compile(r"grid:(\d+)x(\d+)$")


def make_domain(name):
    """Domain from a name: ring, yeti, grid:MxN, or a path to a domain file."""
    if name == "ring":
        return build_ring()
    if name == "yeti":
        return build_yeti()
    m = _GRID.match(name)
    if m:
        nx, ny = int(m.group(1)), int(m.group(2))
        if nx < 1 or ny < 1:
            raise ConfigError(f"bad grid size in {name!r}")
        return build_unit_square_grid(nx, ny)
    if name.startswith("grid:"):
        raise ConfigError(f"bad grid domain {name!r}; expected grid:MxN")
    try:
        return load_domain(name)
    except FileNotFoundError:
        raise ConfigError(f"unknown domain {name!r} (not ring, yeti, grid:MxN or an existing file)") from None


@dataclass
class ExperimentConfig:
    domain: str = "ring"
    p: list = field(default_factory=lambda: [2])
    r: list = field(default_factory=lambda: [2])
    algorithms: list = field(default_factory=lambda: ["A"])
    rel_tol: float = 1e-6
    seed: int = 42
    format: str = "csv"
    oracle: bool = False
    scaling: str = "multiplicity"
    time_budget: float = 600.0      # seconds per cell
    max_iter: int = 2000
    enforce_caps: bool = True

    def __post_init__(self):
        self.p = sorted(set(int(v) for v in self.p))
        self.r = sorted(set(int(v) for v in self.r))
        self.algorithms = parse_algorithms(",".join(self.algorithms))
        if not self.p or not self.r:
            raise ConfigError("p and r ranges must be nonempty")
        if self.p[0] < 1:
            raise ConfigError("need p >= 1")
        if self.r[0] < 0:
            raise ConfigError("need r >= 0")
        if not (0 < self.rel_tol < 1):
            raise ConfigError("rel_tol must lie in (0, 1)")
        if self.format not in ("csv", "markdown"):
            raise ConfigError(f"unknown format {self.format!r}; expected csv or markdown")
        if self.scaling not in ieti.SCALINGS:
            raise ConfigError(f"unknown scaling {self.scaling!r}")
        cap = CAPS.get(self.domain)
        if cap and self.enforce_caps and (self.r[-1] > cap[0] or self.p[-1] > cap[1]):
            raise ConfigError(f"{self.domain}: sweep capped at r <= {cap[0]}, p <= {cap[1]}")


@dataclass
class Cell:
    iterations: int = None
    kappa: float = None
    seconds: float = 0.0
    error: str = None       # e.g. "timeout", "not converged", exception text

    @property
    def ok(self):
        return self.error is None


@dataclass
class ResultTable:
    domain: str
    algorithm: str
    p_values: list
    r_values: list
    seed: int
    cells: dict = field(default_factory=dict)     # (r, p) -> Cell

    def cell(self, r, p):
        return self.cells[(r, p)]

    @property
    def failed(self):
        return [k for k, c in self.cells.items() if not c.ok]


class CellTimeout(Exception):
    pass


@contextmanager
def _time_limit(seconds):
    # SIGALRM only works in the main thread; elsewhere the budget is not enforced
    if not seconds or threading.current_thread() is not threading.main_thread() or not hasattr(signal, "SIGALRM"):
        yield
        return

    def handler(signum, frame):
        raise CellTimeout()

    old = signal.signal(signal.SIGALRM, handler)
    signal.setitimer(signal.ITIMER_REAL, seconds)
    try:
        yield
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0)
        signal.signal(signal.SIGALRM, old)


def run_cell(domain, p, r, algorithm, config):
    t0 = time.perf_counter()
    try:
        with _time_limit(config.time_budget):
            _, rep = ieti.solve(domain, p, r, algorithm, rel_tol=config.rel_tol, seed=config.seed,
                                max_iter=config.max_iter, scaling=config.scaling)
        return Cell(rep.iterations, rep.kappa, time.perf_counter() - t0)
    except CellTimeout:
        return Cell(seconds=time.perf_counter() - t0, error="timeout")
    except ieti.IetiNonConvergence as e:
        rep = e.report
        return Cell(rep.iterations, rep.kappa, time.perf_counter() - t0, "not converged")
    except (ArithmeticError, ValueError, RuntimeError) as e:
        return Cell(seconds=time.perf_counter() - t0, error=f"{type(e).__name__}: {e}")


def run_sweep(config, domain=None, progress=None):
    """One ResultTable per algorithm; failing cells keep an error marker."""
    domain = make_domain(config.domain) if domain is None else domain
    tables = []
    for alg in config.algorithms:
        tab = ResultTable(config.domain, alg, list(config.p), list(config.r), config.seed)
        for r in config.r:
            for p in config.p:
                tab.cells[(r, p)] = cell = run_cell(domain, p, r, alg, config)
                if progress:
                    progress(alg, r, p, cell)
        tables.append(tab)
    return tables


# ---------------------------------------------------------------- output

def _fmt_kappa(k):
    return "" if k is None else repr(float(k))


def emit(tables, fmt="csv"):
    if isinstance(tables, ResultTable):
        tables = [tables]
    if fmt == "csv":
        return emit_csv(tables)
    if fmt == "markdown":
        return "\n".join(emit_markdown(t) for t in tables)
    raise ConfigError(f"unknown format {fmt!r}")


def emit_csv(tables):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for t in tables:
        for r in t.r_values:
            for p in t.p_values:
                c = t.cells.get((r, p))
                if c is None:
                    continue
                if c.ok:
                    w.writerow([r, p, t.algorithm, c.iterations, _fmt_kappa(c.kappa), t.seed])
                else:
                    w.writerow([r, p, t.algorithm, "", f"error: {c.error}", t.seed])
    return buf.getvalue()


def parse_csv(text, domain=""):
    """Inverse of :func:`emit_csv` (timings are not stored in CSV)."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError("missing CSV header " + ",".join(CSV_HEADER))
    tables = {}
    for row in rows[1:]:
        if not row:
            continue
        r, p, alg, it, kappa, seed = row
        r, p, seed = int(r), int(p), int(seed)
        t = tables.setdefault(alg, ResultTable(domain, alg, [], [], seed))
        if p not in t.p_values:
            t.p_values.append(p)
        if r not in t.r_values:
            t.r_values.append(r)
        if kappa.startswith("error: "):
            t.cells[(r, p)] = Cell(error=kappa[len("error: "):])
        else:
            t.cells[(r, p)] = Cell(int(it), float(kappa))
    for t in tables.values():
        t.p_values.sort()
        t.r_values.sort()
    return list(tables.values())


def emit_markdown(table):
    """r x p grid with 'it (kappa)' cells, kappa to two decimals."""
    lines = [f"Algorithm {table.algorithm}, domain {table.domain}, seed {table.seed}", ""]
    lines.append("| r\\p | " + " | ".join(str(p) for p in table.p_values) + " |")
    lines.append("|---" * (len(table.p_values) + 1) + "|")
    for r in table.r_values:
        row = []
        for p in table.p_values:
            c = table.cells.get((r, p))
            if c is None:
                row.append("")
            elif c.ok:
                row.append(f"{c.iterations} ({c.kappa:.2f})")
            else:
                row.append(f"error: {c.error}")
        lines.append(f"| {r} | " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- oracle cross-check

CHECK_R_CAP = 3
CHECK_TOL = 5e-5


@dataclass
class CheckReport:
    entries: list = field(default_factory=list)   # (alg, p, r, discrepancy or None, message)
    matching_failure: str = None

    @property
    def ok(self):
        return self.matching_failure is None and all(
            d is not None and d <= CHECK_TOL for _, _, _, d, _ in self.entries)

    def lines(self):
        if self.matching_failure:
            return [f"matching validation failed: {self.matching_failure} (no solve attempted)"]
        out = []
        for alg, p, r, d, msg in self.entries:
            if d is None:
                out.append(f"{alg} p={p} r={r}: FAIL ({msg})")
            else:
                status = "ok" if d <= CHECK_TOL else "FAIL"
                out.append(f"{alg} p={p} r={r}: relative energy error {d:.3e} {status}")
        return out


def check_matching(domain, ps, rs):
    """First matching failure over all (p, r), as text; None if every interface matches."""
    for p in ps:
        for r in rs:
            spaces, _ = ieti.discretize(domain, p, r)
            mr = validate_matching(domain, spaces)
            if not mr.ok:
                n, why = mr.first_failure
                return f"p={p} r={r} interface {n}: {why}"
    return None


def cross_check(config, domain=None, rel_tol=1e-8):
    """IETI-DP vs direct global solve on every grid point with r <= 3."""
    domain = make_domain(config.domain) if domain is None else domain
    report = CheckReport()
    rs = [r for r in config.r if r <= CHECK_R_CAP]
    # guard: every configuration must be fully matching before anything is solved
    report.matching_failure = check_matching(domain, config.p, rs)
    if report.matching_failure:
        return report
    for alg in config.algorithms:
        for p in config.p:
            for r in rs:
                try:
                    ref = ieti.solve_global_oracle(domain, p, r)
                    coeffs, _ = ieti.solve(domain, p, r, alg, rel_tol=rel_tol, seed=config.seed,
                                           max_iter=config.max_iter, scaling=config.scaling)
                    d = ieti.relative_energy_error(domain, p, r, coeffs, ref)
                    report.entries.append((alg, p, r, d, ""))
                except (ArithmeticError, ValueError, RuntimeError, GeometryError) as e:
                    report.entries.append((alg, p, r, None, f"{type(e).__name__}: {e}"))
    return report


def validate_file(path, p=1, r=0):
    """Parse a domain file and check topology and matching; returns a list of problems."""
    domain = load_domain(path)
    problems = []
    spaces, _ = ieti.discretize(domain, p, r)
    mr = validate_matching(domain, spaces)
    problems += [f"interface {n}: {why}" for n, why in mr.failures]
    jmin = domain.min_jacobian()
    if not math.isfinite(jmin) or jmin <= 0:
        problems.append(f"nonpositive Jacobian determinant ({jmin:.3e})")
    return domain, problems


__all__ = ["ExperimentConfig", "ResultTable", "Cell", "ConfigError", "DomainParseError", "parse_range",
           "parse_algorithms", "make_domain", "run_sweep", "emit", "emit_csv", "emit_markdown",
           "parse_csv", "check_matching", "cross_check", "CheckReport", "validate_file"]
