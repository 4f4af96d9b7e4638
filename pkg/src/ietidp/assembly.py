"""Patch-local Galerkin assembly for the Poisson problem.

Per patch, the tensor-product basis is reduced by removing every function
with a nonzero trace on a Dirichlet side (or at a vertex touching the
Dirichlet boundary). The remaining functions are ordered interior first,
skeleton second, and the stiffness matrix and load vector are split into
the corresponding 2x2 block form.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .geometry import SIDES, GeometryError
from .splines import collocation


class DegenerateGeometryError(GeometryError):
    pass


@dataclass(frozen=True)
class QuadratureRule:
    """Tensor Gauss-Legendre rule: nodes/weights per direction over all spans."""

    nodes_u: np.ndarray
    weights_u: np.ndarray
    nodes_v: np.ndarray
    weights_v: np.ndarray

    @property
    def weights(self):
        return np.outer(self.weights_v, self.weights_u).ravel()


def gauss_1d(q, breaks):
    """q-point Gauss-Legendre rule on every interval of ``breaks``."""
    if q < 1:
        raise ValueError("need at least one quadrature point")
    x, w = np.polynomial.legendre.leggauss(q)
    breaks = np.asarray(breaks, dtype=float)
    a, b = breaks[:-1], breaks[1:]
    nodes = (0.5 * (b - a))[:, None] * (x[None, :] + 1.0) + a[:, None]
    weights = (0.5 * (b - a))[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


def gauss_rule(q, kv, kv_v=None, extra_u=(), extra_v=()):
    """q-point Gauss rule per span of ``kv`` (and ``kv_v`` for the second direction).

    ``extra_u``/``extra_v`` add breakpoints, e.g. those of a geometry map.
    """
    kv_v = kv if kv_v is None else kv_v
    bu = np.union1d(kv.breakpoints, np.asarray(extra_u, dtype=float))
    bv = np.union1d(kv_v.breakpoints, np.asarray(extra_v, dtype=float))
    nu, wu = gauss_1d(q, bu)
    nv, wv = gauss_1d(q, bv)
    return QuadratureRule(nu, wu, nv, wv)


def default_rule(space, G):
    q = max(space.kv_u.p, space.kv_v.p) + 1
    return gauss_rule(q, space.kv_u, space.kv_v,
                      G.space.kv_u.breakpoints, G.space.kv_v.breakpoints)


@dataclass(frozen=True)
class PatchDiscretization:
    space: object
    dirichlet_sides: tuple
    dirichlet_corners: tuple
    kept: np.ndarray          # tensor indices, interior block first
    n_interior: int
    side_dofs: dict           # side -> skeleton index per side position (-1 if removed)
    corner_dofs: tuple        # corner -> skeleton index (-1 if removed)

    @property
    def n_skeleton(self):
        return len(self.kept) - self.n_interior

    @property
    def n(self):
        return len(self.kept)

    @property
    def skeleton(self):
        return self.kept[self.n_interior:]

    def scatter(self, coeffs):
        """Full tensor coefficient vector from kept-DOF values (removed DOFs are 0)."""
        out = np.zeros(self.space.dim)
        out[self.kept] = coeffs
        return out


def side_tensor_indices(space, side):
    nu, nv = space.n_u, space.n_v
    if side == "umin":
        return np.arange(nv) * nu
    if side == "umax":
        return np.arange(nv) * nu + nu - 1
    if side == "vmin":
        return np.arange(nu)
    if side == "vmax":
        return (nv - 1) * nu + np.arange(nu)
    raise ValueError(side)


def corner_tensor_index(space, corner):
    i = (corner % 2) * (space.n_u - 1)
    j = (corner // 2) * (space.n_v - 1)
    return j * space.n_u + i


def classify_dofs(space, dirichlet_sides=(), dirichlet_corners=()):
    """Remove Dirichlet DOFs and order the rest interior-first."""
    dim = space.dim
    removed = np.zeros(dim, dtype=bool)
    on_boundary = np.zeros(dim, dtype=bool)
    for s in SIDES:
        idx = side_tensor_indices(space, s)
        on_boundary[idx] = True
        if s in dirichlet_sides:
            removed[idx] = True
    for c in dirichlet_corners:
        removed[corner_tensor_index(space, c)] = True
    all_idx = np.arange(dim)
    interior = all_idx[~on_boundary]
    skeleton = all_idx[on_boundary & ~removed]
    kept = np.concatenate([interior, skeleton])
    local = -np.ones(dim, dtype=int)
    local[skeleton] = np.arange(skeleton.size)
    side_dofs = {s: local[side_tensor_indices(space, s)] for s in SIDES}
    corner_dofs = tuple(int(local[corner_tensor_index(space, c)]) for c in range(4))
    return PatchDiscretization(space, tuple(dirichlet_sides), tuple(dirichlet_corners), kept,
                               int(interior.size), side_dofs, corner_dofs)


@dataclass
class PatchSystem:
    A: sp.csr_matrix          # kept x kept, interior block first
    f: np.ndarray
    n_interior: int

    @property
    def A_II(self):
        n = self.n_interior
        return self.A[:n, :n]

    @property
    def A_IG(self):
        n = self.n_interior
        return self.A[:n, n:]

    @property
    def A_GI(self):
        n = self.n_interior
        return self.A[n:, :n]

    @property
    def A_GG(self):
        n = self.n_interior
        return self.A[n:, n:]

    @property
    def f_I(self):
        return self.f[:self.n_interior]

    @property
    def f_G(self):
        return self.f[self.n_interior:]


def _basis_at_nodes(space, rule):
    Bu = collocation(space.kv_u, rule.nodes_u, 1)
    Bv = collocation(space.kv_v, rule.nodes_v, 1)
    c = lambda M: sp.csr_matrix(M)
    N = sp.kron(c(Bv[0]), c(Bu[0]), format="csr")
    Du = sp.kron(c(Bv[0]), c(Bu[1]), format="csr")
    Dv = sp.kron(c(Bv[1]), c(Bu[0]), format="csr")
    return N, Du, Dv


def _geometry_at_nodes(G, rule, patch=None):
    X, J = G.eval_tensor(rule.nodes_u, rule.nodes_v)
    det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
    bad = np.flatnonzero(det <= 0)
    if bad.size:
        q = int(bad[0])
        nu = rule.nodes_u.size
        u, v = rule.nodes_u[q % nu], rule.nodes_v[q // nu]
        raise DegenerateGeometryError(
            f"patch {patch}: nonpositive Jacobian determinant {det[q]:.3e} at node (u, v) = ({u:.6g}, {v:.6g})")
    return X, J, det


def assemble_full_stiffness(space, G, rule=None, patch=None):
    """Neumann stiffness matrix over all tensor basis functions."""
    rule = default_rule(space, G) if rule is None else rule
    _, Du, Dv = _basis_at_nodes(space, rule)
    _, J, det = _geometry_at_nodes(G, rule, patch)
    Jinv = np.linalg.inv(J)
    # coefficient J^{-1} J^{-T} |det J| w
    Q = np.einsum("qai,qbi->qab", Jinv, Jinv) * (det * rule.weights)[:, None, None]
    D = (Du, Dv)
    A = sp.csr_matrix((space.dim, space.dim))
    for a in range(2):
        for b in range(2):
            A = A + D[a].T @ sp.diags(Q[:, a, b]) @ D[b]
    A = 0.5 * (A + A.T)
    A.sum_duplicates()
    A.sort_indices()
    return A.tocsr()


def assemble_full_load(space, G, f, rule=None, patch=None):
    rule = default_rule(space, G) if rule is None else rule
    N, _, _ = _basis_at_nodes(space, rule)
    X, _, det = _geometry_at_nodes(G, rule, patch)
    fx = np.asarray(f(X[:, 0], X[:, 1]), dtype=float) * np.ones(X.shape[0])
    return N.T @ (fx * det * rule.weights)


def assemble_stiffness(disc, G, rule=None, patch=None):
    A = assemble_full_stiffness(disc.space, G, rule, patch)
    return A[disc.kept][:, disc.kept].tocsr()


def assemble_load(disc, G, rule, f, patch=None):
    return assemble_full_load(disc.space, G, f, rule, patch)[disc.kept]


def assemble_patch(disc, G, f, rule=None, patch=None):
    rule = default_rule(disc.space, G) if rule is None else rule
    A = assemble_stiffness(disc, G, rule, patch)
    b = assemble_load(disc, G, rule, f, patch) if f is not None else np.zeros(disc.n)
    return PatchSystem(A, b, disc.n_interior)


def l2_error(space, G, coeffs, exact, q=None):
    """L2 norm of (spline with tensor coefficients ``coeffs``) - exact over the patch."""
    q = (max(space.kv_u.p, space.kv_v.p) + 4) if q is None else q
    rule = gauss_rule(q, space.kv_u, space.kv_v, G.space.kv_u.breakpoints, G.space.kv_v.breakpoints)
    N, _, _ = _basis_at_nodes(space, rule)
    X, _, det = _geometry_at_nodes(G, rule)
    diff = N @ coeffs - exact(X[:, 0], X[:, 1])
    return float(np.sqrt(np.sum(diff**2 * det * rule.weights)))
