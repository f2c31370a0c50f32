"""Trial-vector ensembles and the two convergence functionals.

F_s is the mean iterate norm after exactly K preconditioned CG iterations
over n random initial guesses, evaluated with x* = 0 and b = 0 so the
initial guess directly realizes the initial error.  F_c is the Chebyshev
factor ((sqrt(kappa)-1)/(sqrt(kappa)+1))^K of the preconditioned operator.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from numba import njit

from .krylov import pcg, preconditioned_condition_number
from .rng import trial_normals
from .sparsela import dot, norm2, spmv

__all__ = ["DistKind", "TrialDistribution", "FunctionalEval",
           "sample_trials", "eval_Fs", "eval_Fc"]


class DistKind(Enum):
    IID_NORMAL = "iid_normal"
    GRF = "grf"


@dataclass
class TrialDistribution:
    kind: DistKind = DistKind.IID_NORMAL
    sigma2: float | None = None     # grf only
    grid_side: int | None = None    # grf only

    def __post_init__(self):
        if isinstance(self.kind, str):
            self.kind = DistKind(self.kind)
        if self.kind is DistKind.GRF:
            if self.sigma2 is None or self.sigma2 <= 0:
                raise ValueError("grf requires sigma2 > 0")
            if self.grid_side is None or self.grid_side < 1:
                raise ValueError("grf requires a positive grid_side")


@dataclass
class FunctionalEval:
    value: float
    kind: str                   # "Fs" or "Fc"
    K: int
    n: int | None = None        # Fs only
    seed: int | None = None     # Fs only
    param: float | None = None
    std_err: float | None = None

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("functional value must be nonnegative")


# cache of GRF Cholesky factors keyed by (grid_side, sigma2)
_GRF_CHOL_CACHE = {}


def _grf_cholesky(grid_side, sigma2):
    """Cholesky factor of the squared-exponential covariance on the grid.

    Grid points are the interior nodes of the unit square with mesh width
    h = 1/(grid_side+1), matching the diffusion discretization.  A jitter
    ladder 1e-10 .. 1e-6 (x10 per retry) is added to the diagonal on
    factorization breakdown.
    """
    key = (grid_side, float(sigma2))
    cached = _GRF_CHOL_CACHE.get(key)
    if cached is not None:
        return cached
    h = 1.0 / (grid_side + 1)
    xs = (np.arange(grid_side) + 1.0) * h
    px, py = np.meshgrid(xs, xs, indexing="xy")
    p = np.column_stack([px.ravel(), py.ravel()])
    d2 = np.sum((p[:, None, :] - p[None, :, :]) ** 2, axis=2)
    # the covariance is exp(-||x-y||^2 / sigma^2); only the minus sign is
    # positive definite
    cov = np.exp(-d2 / sigma2)
    jitters = [0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6]
    for jit in jitters:
        try:
            chol = _chol_kernel(cov + jit * np.eye(cov.shape[0]))
            _GRF_CHOL_CACHE[key] = chol
            return chol
        except np.linalg.LinAlgError:
            continue
    raise np.linalg.LinAlgError(
        f"GRF covariance not factorizable with jitter up to 1e-6 (sigma2={sigma2})")


@njit(cache=True)
def _chol_impl(a):
    n = a.shape[0]
    for j in range(n):
        d = a[j, j]
        for k in range(j):
            d -= a[j, k] * a[j, k]
        if d <= 0.0:
            return j
        a[j, j] = np.sqrt(d)
        for i in range(j + 1, n):
            s = a[i, j]
            for k in range(j):
                s -= a[i, k] * a[j, k]
            a[i, j] = s / a[j, j]
    return -1


def _chol_kernel(a):
    work = np.array(a, dtype=np.float64, order="C")
    bad = _chol_impl(work)
    if bad >= 0:
        raise np.linalg.LinAlgError(f"matrix not positive definite at pivot {bad}")
    return np.tril(work)


def sample_trials(dim, n, dist=None, master_seed=0):
    """n seeded trial vectors of the given dimension as an (n, dim) array.

    Trial i draws from the stream split(master_seed, i), so individual
    trials are reproducible independently of n.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if dist is None:
        dist = TrialDistribution()
    out = np.empty((n, dim))
    if dist.kind is DistKind.IID_NORMAL:
        for i in range(n):
            out[i] = trial_normals(master_seed, i, dim)
        return out
    if dim != dist.grid_side ** 2:
        raise ValueError(f"grf requires dim == grid_side^2 ({dist.grid_side ** 2}), got {dim}")
    chol = _grf_cholesky(dist.grid_side, dist.sigma2)
    for i in range(n):
        out[i] = chol @ trial_normals(master_seed, i, dim)
    return out


def eval_Fs(A, P, K, n, dist=None, master_seed=0, norm="two_norm", param=None):
    """Stochastic convergence functional: mean ||x_K|| over n trials.

    Each trial runs exactly K PCG iterations with b = 0 and x* = 0 (early
    stopping disabled), started at a sampled trial vector.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if norm not in ("two_norm", "A_norm"):
        raise ValueError("norm must be 'two_norm' or 'A_norm'")
    trials = sample_trials(A.nrows, n, dist, master_seed)
    b = np.zeros(A.nrows)
    vals = np.empty(n)
    for i in range(n):
        tr = pcg(A, b, trials[i], P, K, rel_tol=0.0)
        xk = tr.final_x
        if norm == "two_norm":
            vals[i] = norm2(xk)
        else:
            vals[i] = np.sqrt(max(dot(xk, spmv(A, xk)), 0.0))
    value = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return FunctionalEval(value=value, kind="Fs", K=K, n=n, seed=master_seed,
                          param=param, std_err=se)


def eval_Fc(A, P, K, lanczos_iters=200, seed=0, oracle=False, param=None):
    """Classical convergence functional ((sqrt(k)-1)/(sqrt(k)+1))^K."""
    if K < 1:
        raise ValueError("K must be >= 1")
    summary = preconditioned_condition_number(A, P, lanczos_iters, seed, oracle=oracle)
    sk = np.sqrt(summary.kappa)
    value = float(((sk - 1.0) / (sk + 1.0)) ** K)
    return FunctionalEval(value=value, kind="Fc", K=K, param=param)
