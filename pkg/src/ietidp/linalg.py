"""Direct factorizations, PCG with Lanczos spectrum estimates, Sturm bisection.

Sparse storage is plain ``scipy.sparse.csr_matrix``; the direct solvers wrap
SuperLU.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class NotSPDError(np.linalg.LinAlgError):
    def __init__(self, pivot, value=None):
        msg = f"matrix is not positive definite (pivot {pivot}"
        msg += f", value {value:.3e})" if value is not None else ")"
        super().__init__(msg)
        self.pivot = pivot


class RankDeficiencyError(np.linalg.LinAlgError):
    pass


class IndefiniteError(np.linalg.LinAlgError):
    pass


class Factorization:
    """Reusable solver for a fixed square matrix."""

    def __init__(self, lu, shape):
        self._lu = lu
        self.shape = shape

    def solve(self, b):
        b = np.asarray(b, dtype=float)
        if self.shape[0] == 0:
            return np.zeros_like(b)
        return self._lu.solve(b)

    __call__ = solve


class DenseCholesky(Factorization):
    def __init__(self, A):
        A = np.asarray(A, dtype=float)
        self.shape = A.shape
        if A.size == 0:
            self._cf = None
            return
        try:
            self._cf = scipy.linalg.cho_factor(A)
        except np.linalg.LinAlgError as e:
            raise NotSPDError(_first_bad_pivot(A)) from e

    def solve(self, b):
        b = np.asarray(b, dtype=float)
        if self._cf is None:
            return np.zeros_like(b)
        return scipy.linalg.cho_solve(self._cf, b)


def _first_bad_pivot(A):
    # leading principal minor test via incremental Cholesky
    n = A.shape[0]
    for k in range(1, n + 1):
        try:
            np.linalg.cholesky(A[:k, :k])
        except np.linalg.LinAlgError:
            return k - 1
    return n - 1


def _as_csc(A):
    A = sp.csc_matrix(A, dtype=float)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"matrix must be square, got {A.shape}")
    return A


def factor_spd(A):
    """Factor a sparse symmetric positive definite matrix.

    Uses a symmetric fill-reducing ordering with diagonal pivots only, so the
    pivots are those of an LDL^T factorization; a nonpositive one raises
    :class:`NotSPDError`.
    """
    A = _as_csc(A)
    n = A.shape[0]
    if n == 0:
        return Factorization(None, A.shape)
    try:
        lu = spla.splu(A, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                       options=dict(SymmetricMode=True))
    except RuntimeError:
        d = A.diagonal()
        bad = np.flatnonzero(d <= 0)
        raise NotSPDError(int(bad[0]) if bad.size else 0) from None
    if not np.array_equal(lu.perm_r, lu.perm_c):
        raise NotSPDError(int(np.flatnonzero(lu.perm_r != lu.perm_c)[0]))
    piv = lu.U.diagonal()
    bad = np.flatnonzero(piv <= 0)
    if bad.size:
        # report the pivot in the original numbering
        k = int(bad[0])
        raise NotSPDError(int(lu.perm_c[k]), float(piv[k]))
    return Factorization(lu, A.shape)


def factor_symmetric_indefinite(A, rtol=1e-13):
    """Factor a sparse symmetric nonsingular (e.g. saddle point) matrix."""
    A = _as_csc(A)
    n = A.shape[0]
    if n == 0:
        return Factorization(None, A.shape)
    try:
        lu = spla.splu(A)
    except RuntimeError as e:
        raise RankDeficiencyError(f"matrix is singular: {e}") from None
    piv = np.abs(lu.U.diagonal())
    scale = max(abs(A).max(), np.finfo(float).tiny)
    if piv.min() <= rtol * scale:
        raise RankDeficiencyError(
            f"matrix is numerically singular (pivot {piv.min():.3e} vs scale {scale:.3e})")
    return Factorization(lu, A.shape)


def factor_dense_spd(A):
    return DenseCholesky(A)


# ---------------------------------------------------------------- eigenvalues

def sturm_count(diag, off, x):
    """Number of eigenvalues of the symmetric tridiagonal matrix that are < x."""
    count = 0
    q = 1.0
    tiny = np.finfo(float).tiny
    for i in range(len(diag)):
        e2 = off[i - 1] ** 2 if i > 0 else 0.0
        q = diag[i] - x - (e2 / q if i > 0 else 0.0)
        if q == 0.0:
            q = -tiny
        if q < 0:
            count += 1
    return count


def tridiag_eigs(diag, off=(), atol=1e-12):
    """Smallest and largest eigenvalue of a symmetric tridiagonal matrix (bisection)."""
    d = np.asarray(diag, dtype=float)
    e = np.asarray(off, dtype=float)
    n = d.size
    if n == 0:
        raise ValueError("empty tridiagonal matrix")
    if e.size != n - 1:
        raise ValueError("off-diagonal must have length n-1")
    r = np.zeros(n)
    r[:-1] += np.abs(e)
    r[1:] += np.abs(e)
    lo, hi = float(np.min(d - r)), float(np.max(d + r))

    def kth(k):
        a, b = lo - atol, hi + atol
        while b - a > 0.25 * atol:
            m = 0.5 * (a + b)
            if m <= a or m >= b:
                break
            if sturm_count(d, e, m) >= k:
                b = m
            else:
                a = m
        return 0.5 * (a + b)

    return kth(1), kth(n)


def lanczos_tridiag(alphas, betas):
    """Lanczos matrix (diagonal, off-diagonal) from CG step sizes and directions.

    ``alphas[j]`` are the CG step lengths, ``betas[j]`` the ratios
    (r_{j+1}, z_{j+1}) / (r_j, z_j); len(betas) >= len(alphas) - 1.
    """
    a = np.asarray(alphas, dtype=float)
    b = np.asarray(betas, dtype=float)
    k = a.size
    diag = np.empty(k)
    off = np.empty(max(k - 1, 0))
    for j in range(k):
        diag[j] = 1.0 / a[j] + (b[j - 1] / a[j - 1] if j > 0 else 0.0)
        if j < k - 1:
            off[j] = np.sqrt(b[j]) / a[j]
    return diag, off


# ---------------------------------------------------------------- PCG

@dataclass
class PcgOutcome:
    x: np.ndarray
    iterations: int
    residuals: list                 # ||r_k|| / ||r_0||, k = 0..iterations
    lambda_min: float
    lambda_max: float
    converged: bool
    null_operator: bool = False
    alphas: list = field(default_factory=list, repr=False)
    betas: list = field(default_factory=list, repr=False)

    @property
    def kappa(self):
        return self.lambda_max / self.lambda_min


class NonConvergenceError(RuntimeError):
    def __init__(self, outcome):
        super().__init__(f"PCG did not converge in {outcome.iterations} iterations "
                         f"(relative residual {outcome.residuals[-1]:.3e})")
        self.outcome = outcome


def pcg(apply_A, apply_M, b, x0=None, rel_tol=1e-6, max_iter=1000, raise_on_failure=False,
        null_tol=None):
    """Preconditioned CG; stops once ||b - A x_k|| <= rel_tol * ||b - A x_0||.

    The CG coefficients yield the Lanczos matrix of the preconditioned
    operator, whose extreme eigenvalues are returned as spectrum estimates.

    With ``null_tol`` set, a search direction with p^T A p <= null_tol * r^T z
    is taken to lie in the null space of M A (only valid when the spectrum of
    M A is known to be bounded below by 1 on its range); the iteration then
    stops with ``null_operator=True`` instead of reporting a breakdown.
    """
    b = np.asarray(b, dtype=float)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    r = b - apply_A(x)
    r0 = np.linalg.norm(r)
    hist = [1.0]
    alphas, betas = [], []
    if r0 == 0.0:
        return PcgOutcome(x, 0, hist, 1.0, 1.0, True)
    z = apply_M(r)
    p = z.copy()
    rz = float(r @ z)
    converged = False
    it = 0
    while it < max_iter:
        Ap = apply_A(p)
        pAp = float(p @ Ap)
        if null_tol is not None and pAp <= null_tol * rz:
            lmin, lmax = (tridiag_eigs(*lanczos_tridiag(alphas, betas[:len(alphas) - 1]))
                          if alphas else (1.0, 1.0))
            return PcgOutcome(x, it, hist, lmin, lmax, True, True, alphas=alphas, betas=betas)
        if pAp <= 0.0:
            raise IndefiniteError(f"breakdown in PCG: p^T A p = {pAp:.3e} at iteration {it}")
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        it += 1
        alphas.append(alpha)
        hist.append(float(np.linalg.norm(r)) / r0)
        if hist[-1] <= rel_tol:
            converged = True
            break
        z = apply_M(r)
        rz_new = float(r @ z)
        beta = rz_new / rz
        betas.append(beta)
        rz = rz_new
        p = z + beta * p
    diag, off = lanczos_tridiag(alphas, betas[:len(alphas) - 1])
    lmin, lmax = tridiag_eigs(diag, off)
    out = PcgOutcome(x, it, hist, lmin, lmax, converged, alphas=alphas, betas=betas)
    if not converged and raise_on_failure:
        raise NonConvergenceError(out)
    return out
