import math

import numpy as np
import pytest
import scipy.sparse as sp

from ietidp.assembly import (DegenerateGeometryError, assemble_full_load, assemble_full_stiffness,
                             assemble_patch, classify_dofs, gauss_1d, gauss_rule, l2_error)
from ietidp.geometry import SIDES, bilinear_map, quarter_annulus
from ietidp.ieti import default_rhs, exact_solution
from ietidp.linalg import factor_spd
from ietidp.splines import TensorSplineSpace, collocation, open_uniform_knots, uniform_space


def identity_map():
    return bilinear_map((0, 0), (1, 0), (0, 1), (1, 1))


def test_classify_examples():
    d = classify_dofs(uniform_space(2, 0), SIDES)
    assert (d.space.dim, d.n, d.n_interior, d.n_skeleton) == (9, 1, 1, 0)
    assert list(d.kept) == [4]
    d = classify_dofs(uniform_space(1, 1))
    assert (d.n, d.n_interior, d.n_skeleton) == (9, 1, 8)
    d = classify_dofs(uniform_space(2, 2), ("umin",))
    assert d.n == 30
    # enumeration oracle: skeleton = kept functions with a nonzero trace on some side
    n = 6
    expect = [j * n + i for j in range(n) for i in range(n) if i != 0 and (i == n - 1 or j in (0, n - 1))]
    assert sorted(d.skeleton) == sorted(expect)
    assert list(d.kept[:d.n_interior]) == sorted(d.kept[:d.n_interior])
    assert list(d.skeleton) == sorted(d.skeleton)
    assert all(x == -1 for x in d.side_dofs["umin"])


def test_classify_dirichlet_corner():
    d = classify_dofs(uniform_space(1, 1), (), (3,))
    assert d.n == 8 and d.corner_dofs[3] == -1 and d.corner_dofs[0] >= 0


def test_gauss_examples():
    x, w = gauss_1d(1, [0.0, 1.0])
    np.testing.assert_allclose((x, w), ([0.5], [1.0]))
    x, w = gauss_1d(2, [0.0, 1.0])
    np.testing.assert_allclose(x, [0.5 - 1 / (2 * math.sqrt(3)), 0.5 + 1 / (2 * math.sqrt(3))], atol=1e-15)
    assert abs(np.dot(w, x**3) - 0.25) <= 1e-14
    rule = gauss_rule(3, open_uniform_knots(2, 4))
    assert np.all(rule.weights > 0) and abs(rule.weights.sum() - 1) <= 1e-14


def test_bilinear_element_matrix():
    A = assemble_full_stiffness(uniform_space(1, 0), identity_map()).toarray()
    # corners 0..3 = (0,0), (1,0), (0,1), (1,1)
    expect = np.array([[4, -1, -1, -2], [-1, 4, -2, -1], [-1, -2, 4, -1], [-2, -1, -1, 4]]) / 6
    np.testing.assert_allclose(A, expect, atol=1e-14)


@pytest.mark.parametrize("G", [identity_map(), quarter_annulus(1, 2, 1),
                               bilinear_map((0, 0), (2, 0.3), (0.1, 1), (1.5, 1.7))])
@pytest.mark.parametrize("p, r", [(1, 2), (2, 1), (3, 2)])
def test_stiffness_symmetry_and_kernel(G, p, r):
    space = uniform_space(p, r)
    A = assemble_full_stiffness(space, G)
    assert abs(A - A.T).max() <= 1e-12 * abs(A).max()
    assert np.max(np.abs(A @ np.ones(space.dim))) <= 1e-10
    sysm = assemble_patch(classify_dofs(space, SIDES[:1]), G, default_rhs)
    assert abs(sysm.A_IG - sysm.A_GI.T).max() <= 1e-12 * abs(sysm.A).max()
    factor_spd(sysm.A_II)       # SPD


def _mass_and_stiffness_1d(kv, q):
    x, w = gauss_1d(q, kv.breakpoints)
    B = collocation(kv, x, 1)
    return (B[0].T * w) @ B[0], (B[1].T * w) @ B[1]


def test_anisotropic_map():
    p = 2
    space = uniform_space(p, 2)
    A = assemble_full_stiffness(space, bilinear_map((0, 0), (2, 0), (0, 1), (2, 1))).toarray()
    M, K = _mass_and_stiffness_1d(space.kv_u, p + 3)
    # x = 2u: grad = (d_u / 2, d_v), |det| = 2
    oracle = 2 * (0.25 * np.kron(M, K) + np.kron(K, M))
    np.testing.assert_allclose(A, oracle, atol=1e-12)


def test_load_examples():
    space = uniform_space(1, 0)
    b = assemble_full_load(space, identity_map(), lambda x, y: np.ones_like(x))
    np.testing.assert_allclose(b, [0.25] * 4, atol=1e-15)
    b = assemble_full_load(space, identity_map(), lambda x, y: 0.0 * x)
    assert not b.any()
    d = classify_dofs(uniform_space(2, 1))
    s = assemble_patch(d, identity_map(), None)
    assert not s.f.any() and s.f_I.size == d.n_interior and s.f_G.size == d.n_skeleton


def test_degenerate_geometry():
    G = bilinear_map((0, 0), (1, 0), (1, 1), (0, 1))  # corners swapped: folded patch
    with pytest.raises(DegenerateGeometryError, match="patch 5"):
        assemble_full_stiffness(uniform_space(1, 1), G, patch=5)


def galerkin_l2(p, r):
    G = identity_map()
    d = classify_dofs(uniform_space(p, r), SIDES)
    s = assemble_patch(d, G, default_rhs)
    u = factor_spd(s.A_II).solve(s.f_I)
    return l2_error(d.space, G, d.scatter(u), exact_solution)


def test_manufactured_solution():
    assert galerkin_l2(3, 4) <= 1e-6


@pytest.mark.parametrize("p", [1, 2, 3])
def test_convergence_order(p):
    rs = np.arange(2, 6)
    errs = np.array([galerkin_l2(p, r) for r in rs])
    order = -np.polyfit(rs, np.log2(errs), 1)[0]
    assert order >= p + 0.8
