"""Univariate B-spline bases and tensor-product space bookkeeping."""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class KnotVector:
    """An open (p-open) knot vector on [0, 1] together with its degree.

    Breakpoints and multiplicities are the run-length encoding of ``knots``.
    Knots are compared by exact equality; no tolerance merging is done.
    """

    knots: tuple
    degree: int
    breakpoints: np.ndarray = field(init=False, repr=False, compare=False)
    multiplicities: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        p = int(self.degree)
        kv = tuple(float(k) for k in self.knots)
        if p < 1:
            raise ValueError(f"degree must be >= 1, got {p}")
        object.__setattr__(self, "knots", kv)
        object.__setattr__(self, "degree", p)
        arr = np.asarray(kv)
        if arr.size < 2 * (p + 1):
            raise ValueError("knot vector too short for degree %d" % p)
        if np.any(np.diff(arr) < 0):
            raise ValueError("knots must be nondecreasing")
        z, m = [], []
        for k in kv:
            if z and k == z[-1]:
                m[-1] += 1
            else:
                z.append(k)
                m.append(1)
        if z[0] != 0.0 or z[-1] != 1.0:
            raise ValueError("knot vector must span [0, 1]")
        if m[0] != p + 1 or m[-1] != p + 1:
            raise ValueError("knot vector is not p-open")
        if any(mi > p for mi in m[1:-1]):
            raise ValueError("interior multiplicity exceeds degree")
        object.__setattr__(self, "breakpoints", np.array(z))
        object.__setattr__(self, "multiplicities", np.array(m, dtype=int))

    @property
    def p(self):
        return self.degree

    @property
    def kv(self):
        return np.asarray(self.knots)

    @property
    def n(self):
        """Number of basis functions."""
        return len(self.knots) - self.degree - 1

    @property
    def numspans(self):
        return len(self.breakpoints) - 1

    @property
    def h(self):
        """Largest breakpoint gap."""
        return float(np.max(np.diff(self.breakpoints)))

    def span_ratio(self):
        """max/min span length; recorded for diagnostics only."""
        d = np.diff(self.breakpoints)
        return float(d.max() / d.min())

    def __str__(self):
        return "<KnotVector p=%d n=%d spans=%d>" % (self.p, self.n, self.numspans)


def open_uniform_knots(p, elements):
    """p-open knot vector with ``elements`` equal spans and single interior knots."""
    if p < 1 or elements < 1:
        raise ValueError("need p >= 1 and elements >= 1")
    interior = [i / elements for i in range(1, elements)]
    return KnotVector((0.0,) * (p + 1) + tuple(interior) + (1.0,) * (p + 1), p)


def uniform_refine(kv):
    """Insert one single knot at the midpoint of every nonempty span."""
    z = kv.breakpoints
    mids = 0.5 * (z[:-1] + z[1:])
    knots = np.sort(np.concatenate([kv.kv, mids]), kind="stable")
    return KnotVector(tuple(knots), kv.p)


def _check_param(t):
    if not (0.0 <= t <= 1.0):
        raise ValueError(f"parameter {t!r} outside [0, 1]")


def find_knot_span(kv, t):
    """Index mu with knots[mu] <= t < knots[mu+1]; the last nonempty span at t = 1."""
    _check_param(t)
    knots = kv.kv
    p = kv.p
    if t >= 1.0:
        return kv.n - 1
    mu = int(np.searchsorted(knots, t, side="right")) - 1
    return max(p, min(mu, kv.n - 1))


def active_span(kv, t):
    """Breakpoint interval index i (0-based) with zeta_i <= t < zeta_{i+1}."""
    _check_param(t)
    z = kv.breakpoints
    if t >= 1.0:
        return len(z) - 2
    return int(np.searchsorted(z, t, side="right")) - 1


def eval_basis(kv, t):
    """Values of the p+1 active B-splines at t (Cox-de Boor).

    Returns ``(first, values)`` with ``values[j]`` belonging to basis function
    ``first + j``.
    """
    first, table = eval_basis_derivs(kv, t, 0)
    return first, table[0]


def eval_basis_derivs(kv, t, order=1):
    """Active B-splines and their derivatives up to ``order`` at t.

    Returns ``(first, table)`` where ``table[k, j]`` is the k-th derivative of
    basis function ``first + j``.
    """
    p = kv.p
    if order < 0 or order > p:
        raise ValueError(f"derivative order {order} not in [0, {p}]")
    mu = find_knot_span(kv, t)
    knots = kv.kv

    # triangular table of basis functions of degrees 0..p (NURBS book A2.3)
    ndu = np.zeros((p + 1, p + 1))
    left = np.zeros(p + 1)
    right = np.zeros(p + 1)
    ndu[0, 0] = 1.0
    for j in range(1, p + 1):
        left[j] = t - knots[mu + 1 - j]
        right[j] = knots[mu + j] - t
        saved = 0.0
        for r in range(j):
            ndu[j, r] = right[r + 1] + left[j - r]
            tmp = ndu[r, j - 1] / ndu[j, r]
            ndu[r, j] = saved + right[r + 1] * tmp
            saved = left[j - r] * tmp
        ndu[j, j] = saved

    ders = np.zeros((order + 1, p + 1))
    ders[0] = ndu[:, p]
    a = np.zeros((2, p + 1))
    for r in range(p + 1):
        s1, s2 = 0, 1
        a[0, 0] = 1.0
        for k in range(1, order + 1):
            d = 0.0
            rk = r - k
            pk = p - k
            if r >= k:
                a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                d = a[s2, 0] * ndu[rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[s2, j] = (a[s1, j] - a[s1, j - 1]) / ndu[pk + 1, rk + j]
                d += a[s2, j] * ndu[rk + j, pk]
            if r <= pk:
                a[s2, k] = -a[s1, k - 1] / ndu[pk + 1, r]
                d += a[s2, k] * ndu[r, pk]
            ders[k, r] = d
            s1, s2 = s2, s1
    fac = p
    for k in range(1, order + 1):
        ders[k] *= fac
        fac *= p - k
    return mu - p, ders


def collocation(kv, points, order=0):
    """Dense matrices ``M[k][i, j] = d^k/dt^k B_j(points[i])`` for k <= order."""
    points = np.asarray(points, dtype=float)
    mats = np.zeros((order + 1, points.size, kv.n))
    for i, t in enumerate(points):
        first, table = eval_basis_derivs(kv, float(t), order)
        mats[:, i, first:first + kv.p + 1] = table
    return mats


def interpolate(kv, points, values):
    """Coefficients of the spline in span(kv) interpolating (or least-squares fitting) the data."""
    M = collocation(kv, points)[0]
    coeffs, *_ = np.linalg.lstsq(M, np.asarray(values, dtype=float), rcond=None)
    return coeffs


@dataclass(frozen=True)
class TensorSplineSpace:
    """S[p, kv_u] x S[p, kv_v] with lexicographic numbering, u running fastest."""

    kv_u: KnotVector
    kv_v: KnotVector

    @property
    def n_u(self):
        return self.kv_u.n

    @property
    def n_v(self):
        return self.kv_v.n

    @property
    def dim(self):
        return self.n_u * self.n_v

    def index(self, i, j):
        return j * self.n_u + i

    def multi_index(self, k):
        return k % self.n_u, k // self.n_u

    def refine(self, times=1):
        ku, kv = self.kv_u, self.kv_v
        for _ in range(times):
            ku, kv = uniform_refine(ku), uniform_refine(kv)
        return TensorSplineSpace(ku, kv)


def uniform_space(p, r, elements=1):
    """Tensor space of degree p with ``elements * 2**r`` spans per direction."""
    kv = open_uniform_knots(p, elements)
    for _ in range(r):
        kv = uniform_refine(kv)
    return TensorSplineSpace(kv, kv)
