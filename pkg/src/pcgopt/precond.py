"""Preconditioners: RIC_alpha(0), SSOR(omega), Jacobi, identity.

Every preconditioner exposes three views of the SPD operator M:
``apply`` realizes z = M^{-1} r for PCG, while ``split_solve`` /
``split_solve_t`` realize W^{-1} r and W^{-T} r for a split factor
M = W W^T, which is what the Lanczos condition-number path works on.
"""

from enum import Enum

import numpy as np
from numba import njit

from .errors import BreakdownError, JacobiDivergentError, ZeroOperatorError
from .sparsela import CsrMatrix, TriFactor, spmv, tri_solve, power_spectral_radius

__all__ = ["Variant", "Preconditioner", "ric0_factorize", "ssor_build",
           "jacobi_build", "identity_precond", "precond_apply",
           "sor_optimal_omega"]


@njit(cache=True)
def _find(col_idx, lo, hi, j):
    # binary search for column j in col_idx[lo:hi); -1 if absent
    while lo < hi:
        mid = (lo + hi) // 2
        c = col_idx[mid]
        if c == j:
            return mid
        if c < j:
            lo = mid + 1
        else:
            hi = mid
    return -1


@njit(cache=True)
def _ic0_kernel(lrp, lci, lval, arp, aci, alpha, subcol):
    # Right-looking IC(0) on the stored lower pattern.  Updates that fall
    # outside the pattern are dropped; alpha times each dropped update is
    # subtracted from the diagonal accumulators of both rows it touches
    # (the dropped fill is symmetric), so alpha = 1 preserves row sums.
    n = lrp.shape[0] - 1
    for j in range(n):
        dpos = lrp[j + 1] - 1
        dj = lval[dpos]
        if dj <= 0.0:
            return j
        ljj = np.sqrt(dj)
        lval[dpos] = ljj
        # sub-column rows i > j, from the upper part of symmetric A
        cnt = 0
        for p in range(arp[j], arp[j + 1]):
            i = aci[p]
            if i > j:
                pos = _find(lci, lrp[i], lrp[i + 1], j)
                lval[pos] /= ljj
                subcol[cnt] = i
                cnt += 1
        for a in range(cnt):
            i1 = subcol[a]
            p1 = _find(lci, lrp[i1], lrp[i1 + 1], j)
            l1 = lval[p1]
            lval[lrp[i1 + 1] - 1] -= l1 * l1
            for b in range(a):
                i2 = subcol[b]
                p2 = _find(lci, lrp[i2], lrp[i2 + 1], j)
                upd = l1 * lval[p2]
                tpos = _find(lci, lrp[i1], lrp[i1 + 1], i2)
                if tpos >= 0:
                    lval[tpos] -= upd
                else:
                    lval[lrp[i1 + 1] - 1] -= alpha * upd
                    lval[lrp[i2 + 1] - 1] -= alpha * upd
    return -1


def _lower_triangle(A, diag_scale=1.0):
    """Lower triangle of A (diagonal included, last per row) as CSR arrays."""
    rows = np.repeat(np.arange(A.nrows, dtype=np.int64), np.diff(A.row_ptr))
    keep = A.col_idx <= rows
    r, c, v = rows[keep], A.col_idx[keep], A.values[keep].copy()
    if diag_scale != 1.0:
        v[c == r] *= diag_scale
    return CsrMatrix.from_coo(A.nrows, A.ncols, r, c, v, sum_duplicates=False)


class Variant(Enum):
    IDENTITY = "identity"
    RIC0 = "ric0"
    SSOR = "ssor"
    JACOBI = "jacobi"


class Preconditioner:
    """Opaque SPD operator z = M^{-1} r with a split factorization M = W W^T."""

    def __init__(self, variant, dim, *, factor=None, alpha=None,
                 tri=None, dw=None, omega=None, diag=None):
        self.variant = variant
        self.dim = dim
        self.factor = factor        # ric0: TriFactor L
        self.alpha = alpha
        self.tri = tri              # ssor: TriFactor for D/omega + L_strict
        self.dw = dw                # ssor: D/omega
        self.omega = omega
        self.diag = diag            # jacobi
        if variant is Variant.SSOR:
            self._sqrt_dw = np.sqrt(dw)
            self._scale = np.sqrt(2.0 - omega)
        elif variant is Variant.JACOBI:
            self._sqrt_d = np.sqrt(diag)

    @property
    def param(self):
        if self.variant is Variant.RIC0:
            return self.alpha
        if self.variant is Variant.SSOR:
            return self.omega
        return None

    def apply(self, r):
        v = self.variant
        if v is Variant.IDENTITY:
            return np.array(r, dtype=np.float64)
        if v is Variant.JACOBI:
            return np.asarray(r, dtype=np.float64) / self.diag
        if v is Variant.RIC0:
            return tri_solve(self.factor, tri_solve(self.factor, r), transposed=True)
        # SSOR: z = (2-w) * C^{-T} [ Dw * (C^{-1} r) ]
        y = tri_solve(self.tri, r)
        return (2.0 - self.omega) * tri_solve(self.tri, self.dw * y, transposed=True)

    def split_solve(self, r):
        """W^{-1} r for M = W W^T."""
        v = self.variant
        if v is Variant.IDENTITY:
            return np.array(r, dtype=np.float64)
        if v is Variant.JACOBI:
            return np.asarray(r, dtype=np.float64) / self._sqrt_d
        if v is Variant.RIC0:
            return tri_solve(self.factor, r)
        return self._scale * (self._sqrt_dw * tri_solve(self.tri, r))

    def split_solve_t(self, r):
        """W^{-T} r for M = W W^T."""
        v = self.variant
        if v is Variant.IDENTITY:
            return np.array(r, dtype=np.float64)
        if v is Variant.JACOBI:
            return np.asarray(r, dtype=np.float64) / self._sqrt_d
        if v is Variant.RIC0:
            return tri_solve(self.factor, r, transposed=True)
        return self._scale * tri_solve(self.tri, self._sqrt_dw * r, transposed=True)


def precond_apply(P, r):
    """z = M^{-1} r."""
    return P.apply(r)


def ric0_factorize(A, alpha):
    """Relaxed incomplete Cholesky without fill on the lower pattern of A.

    alpha = 0 is plain IC(0); alpha = 1 folds the full dropped update into
    the pivot (modified variant).  Breakdown raises; no diagonal shifting.
    """
    if not (0.0 <= alpha <= 1.0):
        raise ValueError("alpha must lie in [0, 1]")
    if not A.symmetric:
        raise ValueError("ric0_factorize requires a symmetric matrix")
    L = _lower_triangle(A)
    max_row = int(np.max(np.diff(A.row_ptr))) if A.nrows else 0
    subcol = np.empty(max_row, dtype=np.int64)
    bad = _ic0_kernel(L.row_ptr, L.col_idx, L.values, A.row_ptr, A.col_idx,
                      float(alpha), subcol)
    if bad >= 0:
        raise BreakdownError(bad, f"RIC({alpha}) breakdown: nonpositive pivot in row {bad}")
    return Preconditioner(Variant.RIC0, A.nrows, factor=TriFactor(L), alpha=float(alpha))


def ssor_build(A, omega):
    """SSOR preconditioner M = 1/(2-w) (D/w + L) (D/w)^{-1} (D/w + L)^T."""
    if not (0.0 < omega < 2.0):
        raise ValueError("omega must lie in (0, 2)")
    d = A.diag()
    if np.any(d <= 0.0):
        raise ValueError("SSOR requires a positive diagonal")
    C = _lower_triangle(A, diag_scale=1.0 / omega)
    return Preconditioner(Variant.SSOR, A.nrows, tri=TriFactor(C),
                          dw=d / omega, omega=float(omega))


def jacobi_build(A):
    d = A.diag()
    if np.any(d <= 0.0):
        raise ValueError("Jacobi requires a positive diagonal")
    return Preconditioner(Variant.JACOBI, A.nrows, diag=d)


def identity_precond(dim):
    return Preconditioner(Variant.IDENTITY, dim)


def sor_optimal_omega(A, iters=500, seed=0):
    """omega = 2 / (1 + sqrt(1 - rho_J^2)) with rho_J estimated by power iteration.

    rho_J is taken on the symmetrized Jacobi operator
    I - D^{-1/2} A D^{-1/2}, similar to I - D^{-1} A.
    """
    d = A.diag()
    if np.any(d <= 0.0):
        raise ValueError("positive diagonal required")
    dis = 1.0 / np.sqrt(d)

    def g(v):
        return v - dis * spmv(A, dis * v)

    try:
        rho = power_spectral_radius(g, A.nrows, iters, seed)
    except ZeroOperatorError:
        rho = 0.0  # Jacobi converges in one step (G = 0)
    if rho >= 1.0:
        raise JacobiDivergentError(
            f"Jacobi divergent (rho_J = {rho:.6g} >= 1); omega formula inapplicable")
    return 2.0 / (1.0 + np.sqrt(1.0 - rho * rho))
