import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ietidp.geometry import (SIDES, DomainParseError, GeometryError, Interface, MultiPatchDomain,
                             NurbsPatchMap, bilinear_map, build_ring, build_unit_square_grid, build_yeti,
                             domain_from_quads, map_eval, map_jacobian, parse_domain, quarter_annulus,
                             serialize_domain, side_param, trace_mismatch, validate_matching)
from ietidp.ieti import analysis_space
from ietidp.splines import TensorSplineSpace, open_uniform_knots

unit = st.floats(0.0, 1.0)


def identity_map():
    return bilinear_map((0, 0), (1, 0), (0, 1), (1, 1))


def spaces_for(domain, p, r):
    return [analysis_space(G, p, r) for G in domain.patches]


@given(unit, unit)
def test_identity_map(u, v):
    G = identity_map()
    np.testing.assert_allclose(map_eval(G, u, v), (u, v), atol=1e-15)
    np.testing.assert_allclose(map_jacobian(G, u, v), np.eye(2), atol=1e-14)


def test_affine_jacobian():
    G = bilinear_map((0, 0), (2, 0), (0, 3), (2, 3))
    for u, v in ((0.1, 0.9), (0.5, 0.5), (1.0, 0.0)):
        np.testing.assert_allclose(map_jacobian(G, u, v), np.diag([2.0, 3.0]), atol=1e-14)


def test_out_of_domain():
    with pytest.raises(ValueError):
        map_eval(identity_map(), 1.2, 0.5)


def test_bad_control_net():
    kv = open_uniform_knots(1, 1)
    with pytest.raises(GeometryError):
        NurbsPatchMap(TensorSplineSpace(kv, kv), np.zeros((3, 2)), np.ones(3))
    with pytest.raises(GeometryError):
        NurbsPatchMap(TensorSplineSpace(kv, kv), np.zeros((4, 2)), np.array([1, 1, 0, 1]))


def test_annulus_is_exact():
    G = quarter_annulus(1.0, 2.0)
    for t in np.linspace(0, 1, 50):
        assert abs(np.linalg.norm(G.eval(0.0, t)) - 1.0) <= 1e-12
        assert abs(np.linalg.norm(G.eval(1.0, t)) - 2.0) <= 1e-12
    np.testing.assert_allclose(G.eval(0, 0), (1, 0), atol=1e-15)
    # corner (1,1) is the last control point
    np.testing.assert_allclose(G.eval(1, 1), G.control_points[-1], atol=1e-15)


def test_annulus_jacobian_fd(rng):
    G = quarter_annulus(1.0, 2.0, 1)
    h = 1e-6
    for u, v in rng.uniform(h, 1 - h, (20, 2)):
        fd = np.column_stack([(G.eval(u + h, v) - G.eval(u - h, v)) / (2 * h),
                              (G.eval(u, v + h) - G.eval(u, v - h)) / (2 * h)])
        np.testing.assert_allclose(G.jacobian(u, v), fd, atol=1e-6)


def test_eval_tensor_matches_pointwise():
    G = quarter_annulus(1.0, 1.5, 2)
    us, vs = np.array([0.0, 0.3, 1.0]), np.array([0.2, 0.9])
    X, J = G.eval_tensor(us, vs)
    for q, (v, u) in enumerate((v, u) for v in vs for u in us):
        np.testing.assert_allclose(X[q], G.eval(u, v), atol=1e-14)
        np.testing.assert_allclose(J[q], G.jacobian(u, v), atol=1e-13)


def test_grid_builder_counts():
    d = build_unit_square_grid(1, 1)
    assert len(d.patches) == 1 and not d.interfaces and len(d.boundary_sides) == 4
    assert len(build_unit_square_grid(2, 1).interfaces) == 1
    d = build_unit_square_grid(2, 2)
    assert len(d.interfaces) == 4
    inner = d.interior_vertices()
    assert len(inner) == 1 and len(d.vertices[inner[0]]) == 4


def check_topology(d):
    seen = {}
    for n, itf in enumerate(d.interfaces):
        for key in ((itf.k, itf.side_k), (itf.l, itf.side_l)):
            assert key not in seen
            seen[key] = n
        assert itf.other(itf.k, itf.side_k) == (itf.l, itf.side_l)
        assert itf.other(itf.l, itf.side_l) == (itf.k, itf.side_k)
    for b in d.boundary_sides:
        assert b not in seen
        seen[b] = "bd"
    assert len(seen) == 4 * len(d.patches)
    corners = [kc for vset in d.vertices for kc in vset]
    assert sorted(corners) == [(k, c) for k in range(len(d.patches)) for c in range(4)]


def test_ring():
    d = build_ring()
    check_topology(d)
    assert len(d.patches) == 12
    inner = d.interior_vertices()
    assert len(inner) == 8 and all(len(d.vertices[v]) == 4 for v in inner)
    ts = np.linspace(0, 1, 10)
    for G in d.patches:
        J = G.eval_tensor(ts, ts)[1]
        assert np.all(np.linalg.det(J) > 0)
    for itf in d.interfaces:
        assert trace_mismatch(d, itf, np.linspace(0, 1, 100)) <= 1e-9
    for p, r in ((1, 0), (2, 2), (4, 1)):
        assert validate_matching(d, spaces_for(d, p, r)).ok


def test_ring_inner_circumference():
    d = build_ring()
    x, w = np.polynomial.legendre.leggauss(20)
    t, w = 0.5 * (x + 1), 0.5 * w
    total = 0.0
    for k, s in d.boundary_sides:
        if k >= 4:
            continue
        speed = [np.hypot(*d.patches[k].jacobian(*side_param(s, ti))[:, 1]) for ti in t]
        total += float(np.dot(w, speed))
    assert abs(total - 2 * math.pi) <= 1e-10


def test_yeti():
    d = build_yeti()
    check_topology(d)
    assert len(d.patches) == 84
    assert len(d.interior_vertices()) > 0
    assert max(len(v) for v in d.vertices) <= 4
    assert d.min_jacobian() > 0
    assert validate_matching(d, spaces_for(d, 2, 1)).ok
    for itf in d.interfaces:
        assert trace_mismatch(d, itf, np.linspace(0, 1, 100)) <= 1e-9


def test_matching_failure_on_refinement_mismatch():
    d = build_unit_square_grid(2, 1)
    spaces = spaces_for(d, 2, 1)
    assert validate_matching(d, spaces).ok
    spaces[1] = spaces[1].refine()
    rep = validate_matching(d, spaces)
    assert not rep.ok and rep.first_failure[0] == 0


def test_reversed_interface_detected():
    # second quad listed starting at another corner: shared edge traversed backwards
    pts = [(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (2, 1)]
    d = domain_from_quads(pts, [(0, 1, 4, 3), (5, 4, 1, 2)])
    assert len(d.interfaces) == 1 and d.interfaces[0].reversed
    assert trace_mismatch(d, d.interfaces[0], np.linspace(0, 1, 7)) <= 1e-14
    flipped = Interface(*[getattr(d.interfaces[0], f) for f in ("k", "side_k", "l", "side_l")], False)
    assert trace_mismatch(d, flipped, np.linspace(0, 1, 7)) > 0.5
    check_topology(d)


def test_topology_errors():
    G = identity_map()
    with pytest.raises(GeometryError):
        MultiPatchDomain([G], [], [(0, "umin")])             # sides missing
    with pytest.raises(GeometryError):
        MultiPatchDomain([G], [Interface(0, "umin", 3, "umax")], [])
    with pytest.raises(GeometryError):
        MultiPatchDomain([G], [Interface(0, "umin", 0, "umin")], [])


SQUARE_DOC = """\
patch 0 degree 1 1 knots_u 0.0 0.0 1.0 1.0 knots_v 0.0 0.0 1.0 1.0 weights 1.0 1.0 1.0 1.0 points 0.0 0.0 1.0 0.0 0.0 1.0 1.0 1.0
dirichlet 0 umin
dirichlet 0 umax
dirichlet 0 vmin
dirichlet 0 vmax
"""


def test_square_roundtrip_bytes():
    assert serialize_domain(parse_domain(SQUARE_DOC)) == SQUARE_DOC


def test_ring_roundtrip_exact():
    d = build_ring()
    e = parse_domain(serialize_domain(d))
    for G, H in zip(d.patches, e.patches):
        assert np.array_equal(G.weights, H.weights)
        assert np.array_equal(G.control_points, H.control_points)
        assert G.space == H.space
    assert e.interfaces == d.interfaces and e.boundary_sides == d.boundary_sides
    assert serialize_domain(e) == serialize_domain(d)


def test_yeti_roundtrip():
    d = build_yeti()
    assert serialize_domain(parse_domain(serialize_domain(d))) == serialize_domain(d)


def test_comments_and_blank_lines():
    d = parse_domain("# a square\n\n" + SQUARE_DOC.replace("dirichlet 0 vmax", "dirichlet 0 vmax  # top"))
    assert len(d.patches) == 1


@pytest.mark.parametrize("doc, line, token", [
    (SQUARE_DOC + "interface 0 umin 7 umax normal\n", 6, "7"),
    (SQUARE_DOC.replace("weights 1.0 1.0 1.0 1.0", "weights 1.0 1.0 x 1.0"), 1, "x"),
    (SQUARE_DOC.replace("dirichlet 0 vmin", "dirichlet 0 top"), 4, "top"),
    (SQUARE_DOC.replace("points 0.0 0.0 1.0 0.0 0.0 1.0 1.0 1.0", "points 0.0 0.0 1.0 0.0 0.0 1.0"), 1, None),
    (SQUARE_DOC + "boundary 0 umin\n", 6, "boundary"),
])
def test_parse_errors(doc, line, token):
    with pytest.raises(DomainParseError) as ei:
        parse_domain(doc)
    assert ei.value.line == line
    if token is not None:
        assert ei.value.token == token
    assert f"line {line}" in str(ei.value)


@given(st.lists(st.floats(0.05, 20.0), min_size=4, max_size=4))
def test_float_roundtrip(radii):
    radii = sorted(radii)
    if min(np.diff(radii)) < 1e-3:
        return
    d = build_ring(tuple(radii))
    e = parse_domain(serialize_domain(d))
    assert all(np.array_equal(G.control_points, H.control_points) for G, H in zip(d.patches, e.patches))
