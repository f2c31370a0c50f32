"""Preconditioned conjugate gradients with full convergence instrumentation.

Besides the solver itself this module reconstructs the Lanczos tridiagonal
from the CG coefficients, evaluates the CG residual polynomial at a point
from its Ritz-value roots, estimates extreme eigenvalues of the split
preconditioned operator (Lanczos with full reorthogonalization, or a dense
oracle), and runs the two-process demonstration of how small leading error
components delay their own influence on CG convergence.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import IndefiniteOperatorError
from .problems import build_diag_demo
from .precond import identity_precond
from .rng import normals
from .sparsela import (CsrMatrix, EigMethod, SpectrumSummary, dense_sym_eig,
                       dot, norm2, spmv)

__all__ = ["PcgTrace", "LanczosTridiag", "TheoremDemoConfig", "TheoremDemoResult",
           "pcg", "tridiag_from_trace", "residual_poly_value",
           "preconditioned_condition_number", "theorem_demo"]


@dataclass
class PcgTrace:
    relres: np.ndarray          # ||r_k|| / ||r_0||, entry 0 is 1
    cg_alpha: np.ndarray        # step lengths, one per iteration
    cg_beta: np.ndarray         # direction-update coefficients, one per iteration
    final_x: np.ndarray
    iters_done: int
    err2: np.ndarray | None = None   # ||x* - x_k||_2, present iff x_star supplied
    errA: np.ndarray | None = None   # ||x* - x_k||_A, ditto
    iterates_kept: bool = False
    iterates: list = field(default_factory=list)


@dataclass
class LanczosTridiag:
    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        if self.offdiag.shape[0] != max(self.diag.shape[0] - 1, 0):
            raise ValueError("offdiag must be one entry shorter than diag")
        if np.any(self.offdiag < 0):
            raise ValueError("offdiag entries must be nonnegative")

    def eigenvalues(self):
        n = self.diag.shape[0]
        t = np.diag(self.diag)
        if n > 1:
            t += np.diag(self.offdiag, -1) + np.diag(self.offdiag, 1)
        return dense_sym_eig(t)


def pcg(A, b, x0, P, max_iters, rel_tol=0.0, x_star=None, keep_iterates=False):
    """Standard preconditioned CG with per-iteration instrumentation.

    rel_tol = 0 disables the early stop; the stopping test uses the
    recursive residual ||r_k||_2 / ||r_0||_2.
    """
    if rel_tol < 0 or max_iters < 0:
        raise ValueError("rel_tol must be >= 0 and max_iters >= 0")
    b = np.asarray(b, dtype=np.float64)
    x = np.array(x0, dtype=np.float64)
    r = b - spmv(A, x)
    r0n = norm2(r)
    relres = [1.0]
    alphas, betas = [], []
    err2 = errA = None
    if x_star is not None:
        x_star = np.asarray(x_star, dtype=np.float64)
        d = x_star - x
        err2 = [norm2(d)]
        errA = [float(np.sqrt(max(dot(d, spmv(A, d)), 0.0)))]
    iterates = [x.copy()] if keep_iterates else []
    k = 0
    if r0n > 0.0 and max_iters > 0:
        z = P.apply(r)
        rz = dot(r, z)
        if rz <= 0.0:
            raise IndefiniteOperatorError("preconditioner is not positive definite")
        p = z.copy()
        while k < max_iters:
            Ap = spmv(A, p)
            pAp = dot(p, Ap)
            if pAp <= 0.0:
                raise IndefiniteOperatorError("matrix is not positive definite")
            alpha = rz / pAp
            x += alpha * p
            r -= alpha * Ap
            k += 1
            relres.append(norm2(r) / r0n)
            if x_star is not None:
                d = x_star - x
                err2.append(norm2(d))
                errA.append(float(np.sqrt(max(dot(d, spmv(A, d)), 0.0))))
            if keep_iterates:
                iterates.append(x.copy())
            z = P.apply(r)
            rz_new = dot(r, z)
            if rz_new < 0.0:
                raise IndefiniteOperatorError("preconditioner is not positive definite")
            beta = rz_new / rz if rz != 0.0 else 0.0
            alphas.append(alpha)
            betas.append(beta)
            if rel_tol > 0.0 and relres[-1] <= rel_tol:
                break
            if rz_new == 0.0:
                break
            p = z + beta * p
            rz = rz_new
    return PcgTrace(
        relres=np.array(relres),
        cg_alpha=np.array(alphas),
        cg_beta=np.array(betas),
        final_x=x,
        iters_done=k,
        err2=np.array(err2) if err2 is not None else None,
        errA=np.array(errA) if errA is not None else None,
        iterates_kept=keep_iterates,
        iterates=iterates,
    )


def tridiag_from_trace(t, k=None):
    """Lanczos tridiagonal T_k from the CG coefficients of a trace.

    Classical identities: T_jj = 1/alpha_j + beta_{j-1}/alpha_{j-1}
    (the second term absent for j = 1) and T_{j,j+1} = sqrt(beta_j)/alpha_j.
    """
    if k is None:
        k = t.cg_alpha.shape[0]
    if k < 1 or k > t.cg_alpha.shape[0]:
        raise ValueError("trace must hold at least one recorded iteration")
    a = t.cg_alpha[:k]
    be = t.cg_beta[:k]
    if np.any(a <= 0) or np.any(be < 0):
        raise ValueError("nonpositive alpha or negative beta in trace")
    diag = np.empty(k)
    diag[0] = 1.0 / a[0]
    if k > 1:
        diag[1:] = 1.0 / a[1:] + be[:k - 1] / a[:k - 1]
    offdiag = np.sqrt(be[:k - 1]) / a[:k - 1]
    return LanczosTridiag(diag=diag, offdiag=offdiag)


def residual_poly_value(theta, t):
    """q(t) = prod_i (theta_i - t)/theta_i, evaluated left to right."""
    value = 1.0
    for th in np.asarray(theta, dtype=np.float64):
        if th <= 0.0:
            raise ValueError("Ritz values must be positive")
        value *= (th - t) / th
    return value


def _lanczos_extremes(op, m, k, seed):
    """Extreme eigenvalue estimates of a symmetric operator.

    Lanczos with full reorthogonalization (two classical Gram-Schmidt
    passes per step) from a seeded random start.
    """
    k = min(k, m)
    V = np.empty((k, m))
    v = normals(seed, m)
    v /= norm2(v)
    V[0] = v
    diag = np.empty(k)
    off = np.empty(max(k - 1, 0))
    j_done = 0
    beta = 0.0
    v_prev = np.zeros(m)
    for j in range(k):
        w = np.asarray(op(V[j]), dtype=np.float64)
        if j > 0:
            w -= beta * v_prev
        diag[j] = dot(V[j], w)
        w -= diag[j] * V[j]
        for _ in range(2):
            for i in range(j + 1):
                w -= dot(V[i], w) * V[i]
        j_done = j + 1
        if j + 1 == k:
            break
        beta = norm2(w)
        if beta <= 1e-14 * max(abs(diag[:j + 1]).max(), 1.0):
            break  # invariant subspace found; Ritz values are exact
        off[j] = beta
        v_prev = V[j]
        V[j + 1] = w / beta
    if j_done < 1:
        raise RuntimeError("Lanczos broke down before producing any Ritz value")
    # j_done == 1 with an early beta = 0 means the start vector spans an
    # invariant subspace (e.g. a perfectly preconditioned operator); the
    # single Ritz value is then exact and kappa = 1.
    tri = LanczosTridiag(diag=diag[:j_done].copy(), offdiag=off[:j_done - 1].copy())
    ev = tri.eigenvalues() if j_done > 1 else tri.diag
    return float(ev[0]), float(ev[-1])


def preconditioned_condition_number(A, P, lanczos_iters=200, seed=0, oracle=False):
    """Extreme generalized eigenvalues of A z = lambda M z and their ratio.

    Works on the split-preconditioned operator B = W^{-1} A W^{-T}; with
    ``oracle`` the matrix B is formed densely (m <= 3000) and handed to
    the in-repo dense eigensolver.
    """
    m = A.nrows

    def op(v):
        return P.split_solve(spmv(A, P.split_solve_t(v)))

    if oracle:
        if m > 3000:
            raise ValueError("dense oracle path is capped at m = 3000")
        B = np.empty((m, m))
        e = np.zeros(m)
        for j in range(m):
            e[j] = 1.0
            B[:, j] = op(e)
            e[j] = 0.0
        B = 0.5 * (B + B.T)  # kill round-off asymmetry from columnwise solves
        w = dense_sym_eig(B)
        lam_min, lam_max = float(w[0]), float(w[-1])
        method = EigMethod.DENSE
    else:
        lam_min, lam_max = _lanczos_extremes(op, m, lanczos_iters, seed)
        method = EigMethod.LANCZOS
    return SpectrumSummary(lambda_min=lam_min, lambda_max=lam_max,
                           kappa=lam_max / lam_min, method=method)


@dataclass
class TheoremDemoConfig:
    m: int = 1000
    s: int = 2
    gamma_head: float = 0.05
    seed: int = 0
    iters: int = 200
    delta: float = 1e-3

    def __post_init__(self):
        if not (1 <= self.s <= self.m):
            raise ValueError("require 1 <= s <= m")
        if self.iters > self.m:
            raise ValueError("iters must not exceed m")


@dataclass
class TheoremDemoResult:
    errA: np.ndarray        # main run, entries 0..iters
    errA_bar: np.ndarray    # comparison run started without the head components
    bound_C1: np.ndarray    # 2 C_1^j * errA[0]
    bound_Cs: np.ndarray    # 2 C_s^j * errA[0]
    head_q: np.ndarray      # |gamma_1 q(lambda_1)| per iteration (entry 0 = |gamma_1|)
    head_qbar: np.ndarray   # |gamma_1 qbar(lambda_1)| per iteration
    C1: float
    Cs: float
    J: int                  # largest J for which the smallness condition holds at delta
    crossing: int | None    # first iteration where the head component dominates errA


def _chebyshev_factor(kappa):
    sk = np.sqrt(kappa)
    return (sk - 1.0) / (sk + 1.0)


def theorem_demo(cfg):
    """Run the two CG processes on diag(1..m) and tabulate bounds and head terms.

    The main run starts from an initial error whose first s-1 eigen
    components equal gamma_head and whose remaining components are i.i.d.
    standard normal; the comparison run zeroes the head components.
    """
    m, s = cfg.m, cfg.s
    system = build_diag_demo(m)
    A, b, x_star = system.A, system.b, system.x_exact
    lam = np.arange(1, m + 1, dtype=np.float64)
    gamma = np.empty(m)
    gamma[:s - 1] = cfg.gamma_head
    gamma[s - 1:] = normals(cfg.seed, m - s + 1)
    gamma_bar = gamma.copy()
    gamma_bar[:s - 1] = 0.0
    # eigenvectors of a diagonal matrix are the unit vectors
    x0 = x_star - gamma
    x0_bar = x_star - gamma_bar
    ident = identity_precond(m)
    tr = pcg(A, b, x0, ident, cfg.iters, rel_tol=0.0, x_star=x_star)
    tr_bar = pcg(A, b, x0_bar, ident, cfg.iters, rel_tol=0.0, x_star=x_star)
    iters = tr.iters_done

    C1 = _chebyshev_factor(lam[-1] / lam[0])
    Cs = _chebyshev_factor(lam[-1] / lam[s - 1])
    j_arr = np.arange(iters + 1)
    bound_C1 = 2.0 * C1 ** j_arr * tr.errA[0]
    bound_Cs = 2.0 * Cs ** j_arr * tr.errA[0]

    lam1 = lam[0]
    g1 = gamma[0]
    head_q = np.empty(iters + 1)
    head_qbar = np.empty(iters + 1)
    head_q[0] = head_qbar[0] = abs(g1)
    for j in range(1, iters + 1):
        head_q[j] = abs(g1 * residual_poly_value(tridiag_from_trace(tr, j).eigenvalues(), lam1))
        head_qbar[j] = abs(g1 * residual_poly_value(tridiag_from_trace(tr_bar, j).eigenvalues(), lam1))

    # smallness condition: sum_{i<s} lam_i g_i^2 / ||x - xbar_0||_A^2 <= 4 Cs^{2j} delta
    head_energy = float(np.sum(lam[:s - 1] * gamma[:s - 1] ** 2))
    tail_energy = float(np.sum(lam[s - 1:] * gamma[s - 1:] ** 2))
    ratio = head_energy / tail_energy if tail_energy > 0 else np.inf
    J = 0
    while J < iters and ratio <= 4.0 * Cs ** (2 * (J + 1)) * cfg.delta:
        J += 1

    # crossing: first j where the head component carries at least half of errA^2
    crossing = None
    for j in range(1, iters + 1):
        if lam1 * head_q[j] ** 2 >= 0.5 * tr.errA[j] ** 2:
            crossing = j
            break

    return TheoremDemoResult(errA=tr.errA, errA_bar=tr_bar.errA,
                             bound_C1=bound_C1, bound_Cs=bound_Cs,
                             head_q=head_q, head_qbar=head_qbar,
                             C1=C1, Cs=Cs, J=J, crossing=crossing)
