"""NURBS patch maps, multi-patch topology, benchmark domains and the domain file format."""

from dataclasses import dataclass, field
import math

import numpy as np

from .splines import KnotVector, TensorSplineSpace, collocation, eval_basis_derivs, open_uniform_knots

SIDES = ("umin", "umax", "vmin", "vmax")
# corner c <-> (u, v) = (c % 2, c // 2)
CORNERS = ((0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0))
SIDE_CORNERS = {"umin": (0, 2), "umax": (1, 3), "vmin": (0, 1), "vmax": (2, 3)}


def side_param(side, t):
    """Point (u, v) of ``side`` at traversal parameter t."""
    if side == "umin":
        return 0.0, t
    if side == "umax":
        return 1.0, t
    if side == "vmin":
        return t, 0.0
    if side == "vmax":
        return t, 1.0
    raise ValueError(f"unknown side {side!r}")


def side_direction(side):
    """(fixed axis, fixed end, running axis) with axis 0 = u, 1 = v."""
    return {"umin": (0, 0, 1), "umax": (0, 1, 1), "vmin": (1, 0, 0), "vmax": (1, 1, 0)}[side]


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class NurbsPatchMap:
    space: TensorSplineSpace
    control_points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        cp = np.asarray(self.control_points, dtype=float).reshape(-1, 2)
        w = np.asarray(self.weights, dtype=float).ravel()
        if cp.shape[0] != self.space.dim or w.size != self.space.dim:
            raise GeometryError(
                "expected %d control points/weights, got %d/%d" % (self.space.dim, cp.shape[0], w.size))
        if np.any(w <= 0):
            raise GeometryError("weights must be positive")
        cp.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "control_points", cp)
        object.__setattr__(self, "weights", w)

    def _local(self, u, v):
        for t in (u, v):
            if not (0.0 <= t <= 1.0):
                raise ValueError(f"parameter ({u}, {v}) outside the unit square")
        su, bu = eval_basis_derivs(self.space.kv_u, float(u), 1)
        sv, bv = eval_basis_derivs(self.space.kv_v, float(v), 1)
        pu, pv = self.space.kv_u.p, self.space.kv_v.p
        idx = (np.arange(sv, sv + pv + 1)[:, None] * self.space.n_u + np.arange(su, su + pu + 1)[None, :]).ravel()
        w = self.weights[idx]
        cp = self.control_points[idx]
        N = np.outer(bv[0], bu[0]).ravel()
        Nu = np.outer(bv[0], bu[1]).ravel()
        Nv = np.outer(bv[1], bu[0]).ravel()
        return w, cp, N, Nu, Nv

    def __call__(self, u, v):
        return self.eval(u, v)

    def eval(self, u, v):
        w, cp, N, _, _ = self._local(u, v)
        W = N @ w
        return (N * w) @ cp / W

    def jacobian(self, u, v):
        """2x2 matrix J[i, a] = d x_i / d u_a."""
        w, cp, N, Nu, Nv = self._local(u, v)
        W = N @ w
        X = (N * w) @ cp
        J = np.empty((2, 2))
        for a, Na in enumerate((Nu, Nv)):
            Wa = Na @ w
            J[:, a] = ((Na * w) @ cp * W - X * Wa) / W**2
        return J

    def eval_tensor(self, us, vs):
        """Points and Jacobians on the tensor grid us x vs (u fastest).

        Returns ``X`` of shape (len(vs)*len(us), 2) and ``J`` of shape (.., 2, 2).
        """
        Bu = collocation(self.space.kv_u, us, 1)
        Bv = collocation(self.space.kv_v, vs, 1)
        nu, nv = self.space.n_u, self.space.n_v
        cw = (self.control_points * self.weights[:, None]).reshape(nv, nu, 2)
        w = self.weights.reshape(nv, nu)

        def contract(A, Bv_, Bu_):
            # A indexed [j, i, ...] -> [qv, qu, ...]
            return np.einsum("aj,bi,ji...->ab...", Bv_, Bu_, A)

        W = contract(w, Bv[0], Bu[0])
        Wu = contract(w, Bv[0], Bu[1])
        Wv = contract(w, Bv[1], Bu[0])
        P = contract(cw, Bv[0], Bu[0])
        Pu = contract(cw, Bv[0], Bu[1])
        Pv = contract(cw, Bv[1], Bu[0])
        X = P / W[..., None]
        J = np.empty(W.shape + (2, 2))
        J[..., 0] = (Pu * W[..., None] - P * Wu[..., None]) / (W**2)[..., None]
        J[..., 1] = (Pv * W[..., None] - P * Wv[..., None]) / (W**2)[..., None]
        return X.reshape(-1, 2), J.reshape(-1, 2, 2)


def map_eval(G, u, v):
    return G.eval(u, v)


def map_jacobian(G, u, v):
    return G.jacobian(u, v)


def bilinear_map(p00, p10, p01, p11):
    kv = open_uniform_knots(1, 1)
    return NurbsPatchMap(TensorSplineSpace(kv, kv), np.array([p00, p10, p01, p11], dtype=float), np.ones(4))


@dataclass(frozen=True)
class Interface:
    k: int
    side_k: str
    l: int
    side_l: str
    reversed: bool = False

    def other(self, patch, side):
        if (patch, side) == (self.k, self.side_k):
            return self.l, self.side_l
        if (patch, side) == (self.l, self.side_l):
            return self.k, self.side_k
        raise KeyError((patch, side))


@dataclass
class MultiPatchDomain:
    """Patches plus interfaces, Dirichlet sides and (derived) vertex sets."""

    patches: list
    interfaces: list
    boundary_sides: list
    vertices: list = field(default=None)

    def __post_init__(self):
        self.interfaces = [i if isinstance(i, Interface) else Interface(*i) for i in self.interfaces]
        self.boundary_sides = [tuple(b) for b in self.boundary_sides]
        self.check_topology()
        if self.vertices is None:
            self.vertices = self._derive_vertices()

    @property
    def num_patches(self):
        return len(self.patches)

    def check_topology(self):
        seen = {}
        K = len(self.patches)
        for n, itf in enumerate(self.interfaces):
            for pk, sk in ((itf.k, itf.side_k), (itf.l, itf.side_l)):
                if not (0 <= pk < K):
                    raise GeometryError(f"interface {n} references missing patch {pk}")
                if sk not in SIDES:
                    raise GeometryError(f"interface {n}: bad side {sk!r}")
            if (itf.k, itf.side_k) == (itf.l, itf.side_l):
                raise GeometryError(f"interface {n} joins a side to itself")
            for key in ((itf.k, itf.side_k), (itf.l, itf.side_l)):
                if key in seen:
                    raise GeometryError(f"side {key} used twice ({seen[key]} and interface {n})")
                seen[key] = f"interface {n}"
        for pk, sk in self.boundary_sides:
            if not (0 <= pk < K):
                raise GeometryError(f"boundary side references missing patch {pk}")
            if (pk, sk) in seen:
                raise GeometryError(f"side {(pk, sk)} used twice")
            seen[(pk, sk)] = "boundary"
        missing = [(k, s) for k in range(K) for s in SIDES if (k, s) not in seen]
        if missing:
            raise GeometryError(f"sides neither interface nor boundary: {missing[:4]}")

    def _derive_vertices(self):
        parent = {(k, c): (k, c) for k in range(len(self.patches)) for c in range(4)}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for itf in self.interfaces:
            ck = SIDE_CORNERS[itf.side_k]
            cl = SIDE_CORNERS[itf.side_l]
            if itf.reversed:
                cl = cl[::-1]
            for a, b in zip(ck, cl):
                ra, rb = find((itf.k, a)), find((itf.l, b))
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
        groups = {}
        for key in sorted(parent):
            groups.setdefault(find(key), []).append(key)
        return [tuple(sorted(g)) for _, g in sorted(groups.items())]

    def interface_of(self, patch, side):
        for n, itf in enumerate(self.interfaces):
            if (itf.k, itf.side_k) == (patch, side) or (itf.l, itf.side_l) == (patch, side):
                return n
        return None

    def dirichlet_sides(self, patch):
        return tuple(s for k, s in self.boundary_sides if k == patch)

    def dirichlet_corners(self, patch):
        """Corners of ``patch`` whose vertex touches a Dirichlet side of any patch."""
        bset = set(self.boundary_sides)
        out = []
        for vset in self.vertices:
            on_bd = any((k, s) in bset for k, c in vset for s in SIDES if c in SIDE_CORNERS[s])
            if on_bd:
                out.extend(c for k, c in vset if k == patch)
        return tuple(sorted(out))

    def vertex_of(self, patch, corner):
        for n, vset in enumerate(self.vertices):
            if (patch, corner) in vset:
                return n
        raise KeyError((patch, corner))

    def interior_vertices(self):
        """Vertex ids that do not touch the Dirichlet boundary."""
        bset = set(self.boundary_sides)
        return [n for n, vset in enumerate(self.vertices)
                if not any((k, s) in bset for k, c in vset for s in SIDES if c in SIDE_CORNERS[s])]

    def min_jacobian(self, samples=10):
        ts = np.linspace(0.0, 1.0, samples)
        return min(float(np.min(np.linalg.det(G.eval_tensor(ts, ts)[1]))) for G in self.patches)


@dataclass
class MatchReport:
    ok: bool
    failures: list

    @property
    def first_failure(self):
        return self.failures[0] if self.failures else None

    def __bool__(self):
        return self.ok


def _side_knots(space, side):
    axis = side_direction(side)[2]
    return space.kv_u if axis == 0 else space.kv_v


def validate_matching(domain, spaces, tol=1e-9):
    """Check that every interface is fully matching for the given analysis spaces."""
    failures = []
    for n, itf in enumerate(domain.interfaces):
        kk = _side_knots(spaces[itf.k], itf.side_k)
        kl = _side_knots(spaces[itf.l], itf.side_l)
        knots_l = kl.kv
        if itf.reversed:
            knots_l = 1.0 - knots_l[::-1]
        if kk.p != kl.p or kk.kv.size != knots_l.size or np.any(np.abs(kk.kv - knots_l) > 1e-14):
            failures.append((n, "knot vectors differ"))
            continue
        ts = np.linspace(0.0, 1.0, 4 * (kk.p + 1))
        err = trace_mismatch(domain, itf, ts)
        if err > tol:
            failures.append((n, f"geometry traces differ by {err:.3e}"))
    return MatchReport(not failures, failures)


def trace_mismatch(domain, itf, ts):
    Gk, Gl = domain.patches[itf.k], domain.patches[itf.l]
    err = 0.0
    for t in ts:
        tl = 1.0 - t if itf.reversed else t
        xk = Gk.eval(*side_param(itf.side_k, float(t)))
        xl = Gl.eval(*side_param(itf.side_l, float(tl)))
        err = max(err, float(np.max(np.abs(xk - xl))))
    return err


def domain_from_quads(points, quads):
    """Bilinear multi-patch domain from a conforming quad mesh.

    ``quads`` lists counterclockwise vertex indices (a, b, c, d); the patch maps
    a, b, c, d to parameter corners (0,0), (1,0), (1,1), (0,1). Unshared edges
    become Dirichlet sides.
    """
    points = np.asarray(points, dtype=float)
    patches = []
    side_verts = {}
    for k, (a, b, c, d) in enumerate(quads):
        patches.append(bilinear_map(points[a], points[b], points[d], points[c]))
        corner_vert = (a, b, d, c)
        for s in SIDES:
            c0, c1 = SIDE_CORNERS[s]
            side_verts[(k, s)] = (corner_vert[c0], corner_vert[c1])
    by_edge = {}
    for key, (v0, v1) in side_verts.items():
        by_edge.setdefault(frozenset((v0, v1)), []).append(key)
    interfaces, boundary = [], []
    for key in sorted(side_verts, key=lambda ks: (ks[0], SIDES.index(ks[1]))):
        owners = by_edge[frozenset(side_verts[key])]
        if len(owners) == 1:
            boundary.append(key)
        elif len(owners) == 2:
            other = owners[1] if owners[0] == key else owners[0]
            if (other[0], SIDES.index(other[1])) < (key[0], SIDES.index(key[1])):
                continue
            rev = side_verts[key] != side_verts[other]
            interfaces.append(Interface(key[0], key[1], other[0], other[1], rev))
        else:
            raise GeometryError(f"non-manifold edge {side_verts[key]}")
    return MultiPatchDomain(patches, interfaces, boundary)


def build_unit_square_grid(m, n):
    """m x n unit squares tiling (0, m) x (0, n); Dirichlet on the outer boundary."""
    if m < 1 or n < 1:
        raise ValueError("grid needs m, n >= 1")
    pts = [(float(i), float(j)) for j in range(n + 1) for i in range(m + 1)]
    vid = lambda i, j: j * (m + 1) + i
    quads = [(vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)) for j in range(n) for i in range(m)]
    return domain_from_quads(pts, quads)


RING_RADII = (1.0, 4.0 / 3.0, 5.0 / 3.0, 2.0)
_AXES = ((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0))


def quarter_annulus(r0, r1, sector=0):
    """Exact degree-2 NURBS for the quarter annulus r0 <= |x| <= r1 in quadrant ``sector``.

    u runs outward, v runs counterclockwise along the arc.
    """
    kv = open_uniform_knots(2, 1)
    (c0, s0), (c1, s1) = _AXES[sector % 4], _AXES[(sector + 1) % 4]
    arc = ((c0, s0), (c0 + c1, s0 + s1), (c1, s1))
    s2 = math.sqrt(0.5)
    pts, wts = [], []
    for j, (cx, cy) in enumerate(arc):
        for r in (r0, 0.5 * (r0 + r1), r1):
            pts.append((r * cx, r * cy))
            wts.append(s2 if j == 1 else 1.0)
    return NurbsPatchMap(TensorSplineSpace(kv, kv), np.array(pts), np.array(wts))


def build_ring(radii=RING_RADII):
    """12-patch ring: len(radii)-1 concentric layers x 4 quarter sectors.

    Patch id = 4 * layer + sector. Dirichlet on the inner and outer circle.
    """
    layers = len(radii) - 1
    patches = [quarter_annulus(radii[L], radii[L + 1], s) for L in range(layers) for s in range(4)]
    pid = lambda L, s: 4 * L + s % 4
    interfaces = []
    for L in range(layers):
        for s in range(4):
            interfaces.append(Interface(pid(L, s), "vmax", pid(L, s + 1), "vmin", False))
    for L in range(layers - 1):
        for s in range(4):
            interfaces.append(Interface(pid(L, s), "umax", pid(L + 1, s), "umin", False))
    boundary = [(pid(0, s), "umin") for s in range(4)] + [(pid(layers - 1, s), "umax") for s in range(4)]
    return MultiPatchDomain(patches, interfaces, boundary)


def split_quads(points, quads):
    """Split every quad into 2x2 bilinear sub-quads (shared edge midpoints)."""
    points = [tuple(map(float, p)) for p in points]
    mids = {}

    def midpoint(a, b):
        key = (min(a, b), max(a, b))
        if key not in mids:
            pa, pb = points[key[0]], points[key[1]]
            points.append(((pa[0] + pb[0]) / 2, (pa[1] + pb[1]) / 2))
            mids[key] = len(points) - 1
        return mids[key]

    out = []
    for a, b, c, d in quads:
        ab, bc, cd, da = midpoint(a, b), midpoint(b, c), midpoint(c, d), midpoint(d, a)
        pa, pb, pc, pd = (np.array(points[i]) for i in (a, b, c, d))
        points.append(tuple((pa + pb + pc + pd) / 4))
        m = len(points) - 1
        out += [(a, ab, m, da), (ab, b, bc, m), (m, bc, c, cd), (da, m, cd, d)]
    return points, out


# Coarse 21-quad footprint without inner vertices: a 5-quad heel strip, a
# ball quad flanked by two wing quads on each side, and five tapered toes
# (2 + 3 + 2 + 2 + 2 quads) rising from the five quads of the ball row.
_HEEL = ((0.0, 0.6), (1.0, 0.68), (2.0, 0.72), (3.0, 0.76), (4.0, 0.82), (5.0, 0.9))  # (y, half width)
_BALL_X = (-2.7, -1.85, -0.9, 0.9, 1.8, 2.6)
_BALL_BOTTOM = (5.45, 5.2, None, None, 5.2, 5.4)   # None: the heel's top corners
_BALL_TOP = (6.05, 6.3, 6.45, 6.45, 6.3, 6.0)
_TOE_QUADS = (2, 3, 2, 2, 2)
_TOE_LEN = (0.5, 0.55, 0.5, 0.45, 0.4)        # per toe quad
_TOE_TILT = (-0.3, -0.1, 0.05, 0.2, 0.35)
_TOE_TAPER = 0.12


def _footprint_coarse():
    pts = []
    for y, hw in _HEEL:
        pts += [(-hw, y), (hw, y)]
    quads = [(2 * j, 2 * j + 1, 2 * j + 3, 2 * j + 2) for j in range(len(_HEEL) - 1)]
    top_l, top_r = 2 * (len(_HEEL) - 1), 2 * (len(_HEEL) - 1) + 1
    # ball row: bottom vertices (the two middle ones are the heel's top), top vertices
    bottom, top = [], []
    for i, x in enumerate(_BALL_X):
        if i == 2:
            bottom.append(top_l)
        elif i == 3:
            bottom.append(top_r)
        else:
            pts.append((x, _BALL_BOTTOM[i]))
            bottom.append(len(pts) - 1)
        pts.append((x, _BALL_TOP[i]))
        top.append(len(pts) - 1)
    for i in range(5):
        quads.append((bottom[i], bottom[i + 1], top[i + 1], top[i]))
    # toes
    for t in range(5):
        a, b = top[t], top[t + 1]
        for step in range(_TOE_QUADS[t]):
            pa, pb = np.array(pts[a]), np.array(pts[b])
            w = pb - pa
            up = np.array([_TOE_TILT[t], 1.0])
            up = up / np.hypot(*up) * _TOE_LEN[t] * (1.6 if step == 0 else 1.0)
            pts.append(tuple(pb + up - _TOE_TAPER * w))
            c = len(pts) - 1
            pts.append(tuple(pa + up + _TOE_TAPER * w))
            d = len(pts) - 1
            quads.append((a, b, c, d))
            a, b = d, c
    return pts, quads


def build_yeti():
    """84-patch footprint-shaped bilinear domain (21 coarse quads, each split 2x2)."""
    pts, quads = _footprint_coarse()
    pts, quads = split_quads(pts, quads)
    return domain_from_quads(pts, quads)


# ---------------------------------------------------------------- file format

class DomainParseError(ValueError):
    def __init__(self, msg, line, col, token=None):
        where = f"line {line}, column {col}"
        if token is not None:
            msg = f"{msg} (token {token!r})"
        super().__init__(f"{where}: {msg}")
        self.line, self.col, self.token = line, col, token


def _fmt(x):
    return repr(float(x))


def serialize_domain(domain):
    lines = []
    for k, G in enumerate(domain.patches):
        sp = G.space
        parts = ["patch", str(k), "degree", str(sp.kv_u.p), str(sp.kv_v.p), "knots_u"]
        parts += [_fmt(x) for x in sp.kv_u.knots]
        parts.append("knots_v")
        parts += [_fmt(x) for x in sp.kv_v.knots]
        parts.append("weights")
        parts += [_fmt(x) for x in G.weights]
        parts.append("points")
        parts += [_fmt(x) for x in G.control_points.ravel()]
        lines.append(" ".join(parts))
    for itf in domain.interfaces:
        lines.append("interface %d %s %d %s %s" % (
            itf.k, itf.side_k, itf.l, itf.side_l, "reversed" if itf.reversed else "normal"))
    for k, s in domain.boundary_sides:
        lines.append("dirichlet %d %s" % (k, s))
    return "\n".join(lines) + "\n"


def _tokens(line):
    col = 0
    out = []
    for tok in line.split():
        col = line.index(tok, col)
        out.append((tok, col + 1))
        col += len(tok)
    return out


def parse_domain(text):
    patches = {}
    interfaces, boundary = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        toks = _tokens(line)
        if not toks:
            continue
        kind = toks[0][0]
        err = lambda msg, t: DomainParseError(msg, lineno, t[1], t[0])

        def integer(t):
            try:
                return int(t[0])
            except ValueError:
                raise err("expected integer", t) from None

        def number(t):
            try:
                return float(t[0])
            except ValueError:
                raise err("malformed number", t) from None

        if kind == "patch":
            sections = {}
            cur = None
            if len(toks) < 2:
                raise DomainParseError("patch id missing", lineno, len(line) + 1)
            pid = integer(toks[1])
            for t in toks[2:]:
                if t[0] in ("degree", "knots_u", "knots_v", "weights", "points"):
                    cur = t[0]
                    if cur in sections:
                        raise err("duplicate section", t)
                    sections[cur] = []
                elif cur is None:
                    raise err("unexpected token", t)
                else:
                    sections[cur].append(t)
            for name in ("degree", "knots_u", "knots_v", "weights", "points"):
                if name not in sections:
                    raise DomainParseError(f"patch {pid}: missing section {name!r}", lineno, toks[0][1])
            deg = sections["degree"]
            if len(deg) != 2:
                raise err("degree needs two integers", deg[0] if deg else toks[0])
            pu, pv = integer(deg[0]), integer(deg[1])
            try:
                ku = KnotVector(tuple(number(t) for t in sections["knots_u"]), pu)
                kvv = KnotVector(tuple(number(t) for t in sections["knots_v"]), pv)
            except DomainParseError:
                raise
            except ValueError as e:
                raise DomainParseError(f"patch {pid}: {e}", lineno, toks[0][1]) from None
            space = TensorSplineSpace(ku, kvv)
            w = [number(t) for t in sections["weights"]]
            xy = [number(t) for t in sections["points"]]
            if len(w) != space.dim:
                t = sections["weights"][-1] if sections["weights"] else toks[0]
                raise err(f"patch {pid}: expected {space.dim} weights, got {len(w)}", t)
            if len(xy) != 2 * space.dim:
                t = sections["points"][-1] if sections["points"] else toks[0]
                raise err(f"patch {pid}: expected {2 * space.dim} coordinates, got {len(xy)}", t)
            if pid in patches:
                raise err("duplicate patch id", toks[1])
            try:
                patches[pid] = NurbsPatchMap(space, np.array(xy).reshape(-1, 2), np.array(w))
            except GeometryError as e:
                raise DomainParseError(str(e), lineno, toks[0][1]) from None
        elif kind == "interface":
            if len(toks) != 6:
                raise DomainParseError("interface needs 5 fields", lineno, toks[0][1])
            k, l = integer(toks[1]), integer(toks[3])
            for t in (toks[2], toks[4]):
                if t[0] not in SIDES:
                    raise err("unknown side", t)
            if toks[5][0] not in ("normal", "reversed"):
                raise err("orientation must be 'normal' or 'reversed'", toks[5])
            interfaces.append((Interface(k, toks[2][0], l, toks[4][0], toks[5][0] == "reversed"), lineno, toks))
        elif kind == "dirichlet":
            if len(toks) != 3:
                raise DomainParseError("dirichlet needs 2 fields", lineno, toks[0][1])
            if toks[2][0] not in SIDES:
                raise err("unknown side", toks[2])
            boundary.append(((integer(toks[1]), toks[2][0]), lineno, toks))
        else:
            raise err("unknown record", toks[0])

    ids = sorted(patches)
    if ids != list(range(len(ids))):
        raise DomainParseError("patch ids must be 0..K-1", 1, 1)
    for itf, lineno, toks in interfaces:
        for pk, t in ((itf.k, toks[1]), (itf.l, toks[3])):
            if pk not in patches:
                raise DomainParseError("interface references missing patch", lineno, t[1], t[0])
    for (pk, _), lineno, toks in boundary:
        if pk not in patches:
            raise DomainParseError("dirichlet references missing patch", lineno, toks[1][1], toks[1][0])
    try:
        return MultiPatchDomain([patches[k] for k in ids], [i for i, _, _ in interfaces], [b for b, _, _ in boundary])
    except GeometryError as e:
        raise DomainParseError(str(e), 1, 1) from None


def load_domain(path):
    with open(path, encoding="utf-8") as fh:
        return parse_domain(fh.read())


def save_domain(domain, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_domain(domain))
