"""Dual-primal tearing and interconnecting solver for multi-patch IgA.

Pipeline: patch-local assembly -> Schur complements on the patch skeletons ->
jump matrix B (Lagrange multipliers) and primal constraints C (vertex values,
edge averages or both) -> energy-minimizing primal basis Psi -> PCG on
F lambda = d with the scaled Dirichlet preconditioner B D^-1 S D^-1 B^T.
"""

from dataclasses import dataclass, field
from itertools import combinations
import math
import time

import numpy as np
import scipy.sparse as sp

from . import assembly
from .geometry import SIDE_CORNERS, SIDES, side_direction, side_param, trace_mismatch, validate_matching
from .linalg import (NonConvergenceError, factor_dense_spd, factor_spd,
                     factor_symmetric_indefinite, pcg)
from .splines import KnotVector, TensorSplineSpace, uniform_refine

ALGORITHMS = ("A", "B", "C")


class MatchingError(ValueError):
    pass


class ConfigurationError(ValueError):
    pass


def default_rhs(x, y):
    return 2 * math.pi**2 * np.sin(math.pi * x) * np.sin(math.pi * y)


def exact_solution(x, y):
    return np.sin(math.pi * x) * np.sin(math.pi * y)


def _check_algorithm(algorithm):
    if algorithm not in ALGORITHMS:
        raise ConfigurationError(f"unknown algorithm {algorithm!r}; expected one of A, B, C")


# ---------------------------------------------------------------- spaces

def analysis_space(G, p, r):
    """Degree-p maximum-smoothness space on the geometry's breakpoints, refined r times."""
    kvs = []
    for kv in (G.space.kv_u, G.space.kv_v):
        z = tuple(kv.breakpoints)
        kvs.append(KnotVector((0.0,) * p + z + (1.0,) * p, p))
    ku, kv = kvs
    for _ in range(r):
        ku, kv = uniform_refine(ku), uniform_refine(kv)
    return TensorSplineSpace(ku, kv)


def discretize(domain, p, r):
    spaces = [analysis_space(G, p, r) for G in domain.patches]
    discs = [assembly.classify_dofs(sp_, domain.dirichlet_sides(k), domain.dirichlet_corners(k))
             for k, sp_ in enumerate(spaces)]
    return spaces, discs


# ---------------------------------------------------------------- skeleton

@dataclass
class SkeletonIndex:
    sizes: list                  # N_Gamma^(k)
    offsets: np.ndarray          # start of patch k in the concatenated skeleton vector
    edge_pairs: list             # per interface: (positions, idx_k, idx_l) of matched kept DOFs
    vertex_dofs: list            # per vertex: [(patch, skeleton index)] of kept corner DOFs

    @property
    def total(self):
        return int(self.offsets[-1])

    def glob(self, patch, local):
        return int(self.offsets[patch]) + int(local)

    def split(self, vec):
        return [vec[self.offsets[k]:self.offsets[k + 1]] for k in range(len(self.sizes))]


def build_skeleton_index(domain, discs, check_traces=True):
    sizes = [d.n_skeleton for d in discs]
    offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    edge_pairs = []
    for n, itf in enumerate(domain.interfaces):
        dk = discs[itf.k].side_dofs[itf.side_k]
        dl = discs[itf.l].side_dofs[itf.side_l]
        if dk.size != dl.size:
            raise MatchingError(f"interface {n}: {dk.size} vs {dl.size} trace DOFs")
        if itf.reversed:
            dl = dl[::-1]
        if np.any((dk < 0) != (dl < 0)):
            raise MatchingError(f"interface {n}: Dirichlet status of matched DOFs differs")
        if check_traces:
            p = discs[itf.k].space.kv_u.p
            err = trace_mismatch(domain, itf, np.linspace(0.0, 1.0, p + 2))
            if err > 1e-9:
                raise MatchingError(f"interface {n}: geometry traces differ by {err:.3e}")
        pos = np.flatnonzero(dk >= 0)
        edge_pairs.append((pos, dk[pos], dl[pos], dk.size))
    vertex_dofs = []
    for vset in domain.vertices:
        entries = []
        for k, c in vset:
            j = discs[k].corner_dofs[c]
            if j >= 0:
                entries.append((k, j))
        vertex_dofs.append(sorted(entries))
    return SkeletonIndex(sizes, offsets, edge_pairs, vertex_dofs)


# ---------------------------------------------------------------- jump matrix

@dataclass
class JumpMatrix:
    B: sp.csr_matrix
    blocks: list                 # B^(k), columns of patch k
    algorithm: str

    @property
    def n_lambda(self):
        return self.B.shape[0]


def build_jump_matrix(domain, skel, algorithm):
    """Rows: edge pairs in interface order (corner positions excluded), then
    (Algorithm B) all pairs of corner DOFs per vertex. +1 on the lower patch id."""
    _check_algorithm(algorithm)
    rows, cols, vals = [], [], []
    nrow = 0

    def add(ka, ia, kb, ib):
        nonlocal nrow
        if (kb, ib) < (ka, ia):
            ka, ia, kb, ib = kb, ib, ka, ia
        rows.extend((nrow, nrow))
        cols.extend((skel.glob(ka, ia), skel.glob(kb, ib)))
        vals.extend((1.0, -1.0))
        nrow += 1

    for itf, (pos, ik, il, n) in zip(domain.interfaces, skel.edge_pairs):
        for q, a, b in zip(pos, ik, il):
            if 0 < q < n - 1:
                add(itf.k, a, itf.l, b)
    if algorithm == "B":
        for entries in skel.vertex_dofs:
            for (ka, ia), (kb, ib) in combinations(entries, 2):
                add(ka, ia, kb, ib)
    B = sp.csr_matrix((vals, (rows, cols)), shape=(nrow, skel.total))
    blocks = [B[:, skel.offsets[k]:skel.offsets[k + 1]].tocsr() for k in range(len(skel.sizes))]
    return JumpMatrix(B, blocks, algorithm)


# ---------------------------------------------------------------- primal constraints

@dataclass
class PrimalConstraints:
    C: list                      # per patch dense (m_k x N_Gamma^(k))
    global_ids: list             # per patch: global primal id of each row
    n_primal: int
    kinds: list                  # per global id: ("vertex", v) or ("edge", interface)
    algorithm: str


def edge_weights(disc, G, side, q=None):
    """Integrals of the side traces of the skeleton basis functions over the
    physical edge (arc length). Returns (skeleton indices, weights)."""
    axis = side_direction(side)[2]
    kv = disc.space.kv_u if axis == 0 else disc.space.kv_v
    gkv = G.space.kv_u if axis == 0 else G.space.kv_v
    q = kv.p + 1 if q is None else q
    breaks = np.union1d(kv.breakpoints, gkv.breakpoints)
    t, w = assembly.gauss_1d(q, breaks)
    from .splines import collocation
    Bt = collocation(kv, t, 0)[0]
    speed = np.empty(t.size)
    for i, ti in enumerate(t):
        u, v = side_param(side, float(ti))
        J = G.jacobian(u, v)
        speed[i] = np.hypot(*J[:, axis])
    ints = Bt.T @ (w * speed)
    dofs = disc.side_dofs[side]
    keep = dofs >= 0
    return dofs[keep], ints[keep]


EDGE_QUAD_EXTRA = 6


def build_primal_constraints(domain, discs, skel, algorithm):
    _check_algorithm(algorithm)
    K = len(discs)
    rows = [[] for _ in range(K)]
    ids = [[] for _ in range(K)]
    kinds = []
    if algorithm in ("A", "C"):
        for v, entries in enumerate(skel.vertex_dofs):
            if len(entries) < 2:
                continue
            gid = len(kinds)
            kinds.append(("vertex", v))
            for k, j in entries:
                row = np.zeros(skel.sizes[k])
                row[j] = 1.0
                rows[k].append(row)
                ids[k].append(gid)
    if algorithm in ("B", "C"):
        for n, itf in enumerate(domain.interfaces):
            sides = ((itf.k, itf.side_k), (itf.l, itf.side_l))
            weights = []
            for k, s in sides:
                p = discs[k].space.kv_u.p
                dofs, wts = edge_weights(discs[k], domain.patches[k], s, q=p + 1 + EDGE_QUAD_EXTRA)
                weights.append((k, dofs, wts))
            if any(d.size == 0 for _, d, _ in weights):
                continue
            gid = len(kinds)
            kinds.append(("edge", n))
            for k, dofs, wts in weights:
                row = np.zeros(skel.sizes[k])
                row[dofs] = wts
                rows[k].append(row)
                ids[k].append(gid)
    C = []
    for k in range(K):
        Ck = np.array(rows[k]).reshape(len(rows[k]), skel.sizes[k])
        if Ck.shape[0] and np.linalg.matrix_rank(Ck) < Ck.shape[0]:
            raise ConfigurationError(f"patch {k}: primal constraints are linearly dependent")
        if Ck.shape[0] == 0 and not discs[k].dirichlet_sides and skel.sizes[k] > 0:
            raise ConfigurationError(f"patch {k} is floating but has no primal constraints")
        C.append(Ck)
    return PrimalConstraints(C, [np.array(i, dtype=int) for i in ids], len(kinds), kinds, algorithm)


# ---------------------------------------------------------------- Schur complements

class SchurOperator:
    """S = A_GG - A_GI A_II^-1 A_IG applied matrix-free; g = f_G - A_GI A_II^-1 f_I."""

    def __init__(self, system):
        self.system = system
        self.n_I = system.n_interior
        self.A_GG = system.A_GG.tocsr()
        self.A_GI = system.A_GI.tocsr()
        self.A_IG = system.A_IG.tocsr()
        self.lu_II = factor_spd(system.A_II) if self.n_I else None
        self.g = system.f_G - self._couple(system.f_I)

    def _couple(self, x_I):
        if not self.n_I:
            return np.zeros(self.A_GG.shape[0] if x_I.ndim == 1 else (self.A_GG.shape[0], x_I.shape[1]))
        return self.A_GI @ self.lu_II.solve(x_I)

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        if not self.n_I:
            return self.A_GG @ w
        return self.A_GG @ w - self.A_GI @ self.lu_II.solve(self.A_IG @ w)

    apply = __call__

    def dense(self):
        n = self.A_GG.shape[0]
        return self(np.eye(n))

    def interior_values(self, w):
        """u_I = A_II^-1 (f_I - A_IG w)."""
        if not self.n_I:
            return np.zeros(0)
        return self.lu_II.solve(self.system.f_I - self.A_IG @ w)


def build_schur_operator(system):
    S = SchurOperator(system)
    return S, S.g


class LocalSaddle:
    """Solver for [S C^T; C 0], realized through the full patch matrix
    [[A_II, A_IG, 0], [A_GI, A_GG, C^T], [0, C, 0]]."""

    def __init__(self, system, C, patch=None):
        n_I = system.n_interior
        n = system.A.shape[0]
        m = C.shape[0]
        Csp = sp.csr_matrix(C)
        Cfull = sp.hstack([sp.csr_matrix((m, n_I)), Csp]) if m else sp.csr_matrix((0, n))
        K = sp.bmat([[system.A, Cfull.T], [Cfull, None]], format="csc") if m else sp.csc_matrix(system.A)
        try:
            self.lu = factor_symmetric_indefinite(K)
        except np.linalg.LinAlgError as e:
            raise ConfigurationError(f"patch {patch}: singular local saddle point system ({e})") from e
        self.n_I, self.n_G, self.m = n_I, n - n_I, m

    def solve(self, q, c=None):
        """Return (w, mu) solving S w + C^T mu = q, C w = c."""
        q = np.asarray(q, dtype=float)
        cols = q.shape[1:] if q.ndim > 1 else ()
        rhs = np.zeros((self.n_I + self.n_G + self.m,) + cols)
        rhs[self.n_I:self.n_I + self.n_G] = q
        if c is not None:
            rhs[self.n_I + self.n_G:] = c
        x = self.lu.solve(rhs)
        return x[self.n_I:self.n_I + self.n_G], x[self.n_I + self.n_G:]


@dataclass
class PrimalBasis:
    Psi: list                    # per patch (N_Gamma^(k) x m_k)
    S_Pi: np.ndarray
    factor: object


def build_primal_basis(schur_ops, saddles, constraints):
    Psi = []
    n = constraints.n_primal
    S_Pi = np.zeros((n, n))
    for k, (S, sad) in enumerate(zip(schur_ops, saddles)):
        m = constraints.C[k].shape[0]
        if m == 0:
            Psi.append(np.zeros((constraints.C[k].shape[1], 0)))
            continue
        psi, _ = sad.solve(np.zeros((sad.n_G, m)), np.eye(m))
        Psi.append(psi)
        loc = psi.T @ S(psi)
        ids = constraints.global_ids[k]
        S_Pi[np.ix_(ids, ids)] += 0.5 * (loc + loc.T)
    factor = factor_dense_spd(S_Pi)
    return PrimalBasis(Psi, S_Pi, factor)


# ---------------------------------------------------------------- operators

@dataclass
class Scaling:
    d: np.ndarray


SCALINGS = ("multiplicity", "patch-count")


def build_scaling(jump, kind="multiplicity", skel=None):
    """Diagonal multiplicity scaling over the skeleton DOFs.

    ``multiplicity``: d_ii = max(1, number of multipliers acting on DOF i).
    ``patch-count``: d_ii = number of patches sharing DOF i (needs ``skel``);
    differs from the former only where the jumps are redundant or absent.
    """
    if kind == "multiplicity":
        counts = np.asarray(jump.B.multiply(jump.B).sum(axis=0)).ravel()
        return Scaling(np.maximum(1.0, counts))
    if kind != "patch-count":
        raise ConfigurationError(f"unknown scaling {kind!r}; expected one of {', '.join(SCALINGS)}")
    if skel is None:
        raise ValueError("patch-count scaling needs the skeleton index")
    owner = np.repeat(np.arange(len(skel.sizes)), skel.sizes)
    pattern = (abs(jump.B) > 0).astype(float)
    coupled = (pattern.T @ pattern).tocsr()
    d = np.ones(jump.B.shape[1])
    for i in range(d.size):
        cols = coupled.indices[coupled.indptr[i]:coupled.indptr[i + 1]]
        if cols.size:
            d[i] = np.unique(owner[cols]).size
    return Scaling(d)


class IetiOperators:
    """F, d and the scaled Dirichlet preconditioner for one configuration."""

    def __init__(self, skel, jump, constraints, schur_ops, saddles, primal, scaling):
        self.skel = skel
        self.jump = jump
        self.constraints = constraints
        self.schur = schur_ops
        self.saddles = saddles
        self.primal = primal
        self.scaling = scaling
        self.B = jump.B
        self.BT = jump.B.T.tocsr()
        self.g = np.concatenate([S.g for S in schur_ops]) if schur_ops else np.zeros(0)

    @property
    def n_lambda(self):
        return self.B.shape[0]

    def skeleton_solve(self, q):
        """w = w_Delta + Psi w_Pi for the concatenated skeleton load q."""
        parts = self.skel.split(q)
        w = []
        rhs_pi = np.zeros(self.constraints.n_primal)
        for k, qk in enumerate(parts):
            wd, _ = self.saddles[k].solve(qk)
            w.append(wd)
            if self.primal.Psi[k].shape[1]:
                np.add.at(rhs_pi, self.constraints.global_ids[k], self.primal.Psi[k].T @ qk)
        w_pi = self.primal.factor.solve(rhs_pi)
        for k in range(len(parts)):
            if self.primal.Psi[k].shape[1]:
                w[k] = w[k] + self.primal.Psi[k] @ w_pi[self.constraints.global_ids[k]]
        return np.concatenate(w) if w else np.zeros(0)

    def apply_F(self, lam):
        return self.B @ self.skeleton_solve(self.BT @ lam)

    def assemble_d(self):
        return self.B @ self.skeleton_solve(self.g)

    def apply_S(self, w):
        parts = self.skel.split(w)
        return np.concatenate([S(wk) for S, wk in zip(self.schur, parts)])

    def apply_MsD(self, r):
        y = (self.BT @ r) / self.scaling.d
        y = self.apply_S(y) / self.scaling.d
        return self.B @ y

    def recover_skeleton(self, lam):
        return self.skeleton_solve(self.g - self.BT @ lam)

    def dense_F(self):
        n = self.n_lambda
        return np.column_stack([self.apply_F(e) for e in np.eye(n)])

    def dense_MsD(self):
        n = self.n_lambda
        return np.column_stack([self.apply_MsD(e) for e in np.eye(n)])


# ---------------------------------------------------------------- setup & solve

@dataclass
class IetiProblem:
    domain: object
    p: int
    r: int
    algorithm: str
    spaces: list
    discs: list
    systems: list
    ops: IetiOperators
    timings: dict = field(default_factory=dict)


def setup(domain, p, r, algorithm, f=default_rhs, scaling="multiplicity"):
    _check_algorithm(algorithm)
    if scaling not in SCALINGS:
        raise ConfigurationError(f"unknown scaling {scaling!r}; expected one of {', '.join(SCALINGS)}")
    if p < 1 or r < 0:
        raise ConfigurationError("need p >= 1 and r >= 0")
    timings = {}
    t0 = time.perf_counter()
    spaces, discs = discretize(domain, p, r)
    report = validate_matching(domain, spaces)
    if not report.ok:
        n, why = report.first_failure
        raise MatchingError(f"interface {n}: {why}")
    systems = [assembly.assemble_patch(d, G, f, patch=k) for k, (d, G) in enumerate(zip(discs, domain.patches))]
    t1 = time.perf_counter()
    timings["assembly"] = t1 - t0
    schur = [SchurOperator(s) for s in systems]
    skel = build_skeleton_index(domain, discs)
    jump = build_jump_matrix(domain, skel, algorithm)
    constraints = build_primal_constraints(domain, discs, skel, algorithm)
    saddles = [LocalSaddle(s, C, patch=k) for k, (s, C) in enumerate(zip(systems, constraints.C))]
    primal = build_primal_basis(schur, saddles, constraints)
    scaling = build_scaling(jump, scaling, skel)
    ops = IetiOperators(skel, jump, constraints, schur, saddles, primal, scaling)
    timings["setup"] = time.perf_counter() - t1
    return IetiProblem(domain, p, r, algorithm, spaces, discs, systems, ops, timings)


@dataclass
class SolveReport:
    iterations: int
    kappa: float
    lambda_min: float
    lambda_max: float
    residuals: list
    converged: bool
    algorithm: str
    p: int
    r: int
    seed: int
    rng: str
    n_lambda: int
    n_primal: int
    timings: dict

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def recover_solution(problem, lam):
    """Per-patch tensor coefficient vectors from the multipliers."""
    w = problem.ops.recover_skeleton(lam)
    out = []
    for k, (disc, S) in enumerate(zip(problem.discs, problem.ops.schur)):
        wk = problem.ops.skel.split(w)[k]
        uI = S.interior_values(wk)
        out.append(disc.scatter(np.concatenate([uI, wk])))
    return out


def random_start(n, seed):
    """Start vector with entries uniform in [-1, 1] from a seeded PCG64 stream."""
    return np.random.Generator(np.random.PCG64(seed)).uniform(-1.0, 1.0, n)


def run_pcg(problem, rel_tol=1e-6, seed=0, max_iter=2000):
    ops = problem.ops
    d = ops.assemble_d()
    lam0 = random_start(ops.n_lambda, seed)
    t0 = time.perf_counter()
    # lambda_min(M_sD F) >= 1 on the range of F, so a tiny Rayleigh quotient means F p = 0
    out = pcg(ops.apply_F, ops.apply_MsD, d, lam0, rel_tol=rel_tol, max_iter=max_iter, null_tol=1e-10)
    problem.timings["pcg"] = time.perf_counter() - t0
    report = SolveReport(out.iterations, out.kappa, out.lambda_min, out.lambda_max, out.residuals,
                         out.converged, problem.algorithm, problem.p, problem.r, seed, "numpy.PCG64",
                         ops.n_lambda, problem.ops.constraints.n_primal, dict(problem.timings))
    return out, report


def solve(domain, p, r, algorithm, rel_tol=1e-6, seed=0, f=default_rhs, max_iter=2000,
          scaling="multiplicity"):
    """Full IETI-DP solve. Returns (per-patch coefficients, SolveReport).

    Raises :class:`IetiNonConvergence` (carrying the partial report) if PCG
    hits ``max_iter``.
    """
    problem = setup(domain, p, r, algorithm, f, scaling)
    out, report = run_pcg(problem, rel_tol, seed, max_iter)
    if not out.converged:
        raise IetiNonConvergence(report)
    t0 = time.perf_counter()
    coeffs = recover_solution(problem, out.x)
    report.timings["recover"] = time.perf_counter() - t0
    return coeffs, report


class IetiNonConvergence(NonConvergenceError):
    def __init__(self, report):
        RuntimeError.__init__(self, f"PCG did not converge in {report.iterations} iterations")
        self.report = report


# ---------------------------------------------------------------- global oracle

def global_numbering(domain, discs):
    """Merge matched DOFs across interfaces and vertices into global unknowns.

    Returns (maps, n_global) where maps[k][j] is the global index of kept DOF j
    of patch k.
    """
    offsets = np.concatenate([[0], np.cumsum([d.n for d in discs])]).astype(int)
    parent = np.arange(offsets[-1])

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    for itf in domain.interfaces:
        dk = discs[itf.k].side_dofs[itf.side_k]
        dl = discs[itf.l].side_dofs[itf.side_l]
        if itf.reversed:
            dl = dl[::-1]
        for a, b in zip(dk, dl):
            if a >= 0 and b >= 0:
                union(offsets[itf.k] + discs[itf.k].n_interior + a,
                      offsets[itf.l] + discs[itf.l].n_interior + b)
            elif (a >= 0) != (b >= 0):
                raise MatchingError("Dirichlet status of matched DOFs differs")
    roots = np.array([find(i) for i in range(offsets[-1])], dtype=int)
    uniq, inverse = np.unique(roots, return_inverse=True)
    maps = [inverse[offsets[k]:offsets[k + 1]] for k in range(len(discs))]
    return maps, uniq.size


def assemble_global(domain, p, r, f=default_rhs):
    spaces, discs = discretize(domain, p, r)
    report = validate_matching(domain, spaces)
    if not report.ok:
        n, why = report.first_failure
        raise MatchingError(f"interface {n}: {why}")
    systems = [assembly.assemble_patch(d, G, f, patch=k) for k, (d, G) in enumerate(zip(discs, domain.patches))]
    maps, n = global_numbering(domain, discs)
    A = sp.csr_matrix((n, n))
    b = np.zeros(n)
    for m, s in zip(maps, systems):
        P = sp.csr_matrix((np.ones(m.size), (np.arange(m.size), m)), shape=(m.size, n))
        A = A + P.T @ s.A @ P
        np.add.at(b, m, s.f)
    return spaces, discs, systems, maps, A.tocsr(), b


def solve_global_oracle(domain, p, r, f=default_rhs):
    """Direct solve of the conforming global system; per-patch tensor coefficients."""
    spaces, discs, systems, maps, A, b = assemble_global(domain, p, r, f)
    x = factor_spd(A).solve(b)
    return [d.scatter(x[m]) for d, m in zip(discs, maps)]


def energy_norm(domain, p, r, coeffs, discs=None, systems=None):
    """sqrt(sum_k u_k^T A^(k) u_k) of per-patch tensor coefficient vectors."""
    if systems is None:
        _, discs = discretize(domain, p, r)
        systems = [assembly.assemble_patch(d, G, None, patch=k) for k, (d, G) in enumerate(zip(discs, domain.patches))]
    tot = 0.0
    for c, d, s in zip(coeffs, discs, systems):
        u = c[d.kept]
        tot += float(u @ (s.A @ u))
    return math.sqrt(max(tot, 0.0))


def relative_energy_error(domain, p, r, coeffs, reference):
    _, discs = discretize(domain, p, r)
    systems = [assembly.assemble_patch(d, G, None, patch=k) for k, (d, G) in enumerate(zip(discs, domain.patches))]
    diff = [a - b for a, b in zip(coeffs, reference)]
    return energy_norm(domain, p, r, diff, discs, systems) / energy_norm(domain, p, r, reference, discs, systems)
