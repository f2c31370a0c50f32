"""Mean-rate verification for stationary linear iterations.

For x* - x_{k+1} = G (x* - x_k) with a random initial error of i.i.d.
standard normal entries, the expected squared error after k steps equals
||G^k||_F^2 (Hutchinson trace identity), and ||G^k||_F^{1/k} tends to the
spectral radius of G (Gelfand).  This module checks both on small dense
iteration matrices by Monte-Carlo simulation against explicit powering.
"""

from dataclasses import dataclass

import numpy as np

from .rng import trial_normals
from .sparsela import power_spectral_radius

__all__ = ["StationaryScheme", "MeanRateRecord", "verify_mean_rate",
           "random_contraction"]


@dataclass
class StationaryScheme:
    G: np.ndarray

    def __post_init__(self):
        self.G = np.asarray(self.G, dtype=np.float64)
        if self.G.ndim != 2 or self.G.shape[0] != self.G.shape[1]:
            raise ValueError("iteration matrix must be square")

    @property
    def m(self):
        return self.G.shape[0]


@dataclass
class MeanRateRecord:
    k: int
    empirical_ek: float      # sqrt(mean over trials of ||G^k d0||^2)
    frob_norm: float         # ||G^k||_F by explicit dense powering
    rho_pow: float           # rho(G)^k from power iteration
    std_err: float = 0.0     # standard error of empirical_ek


def verify_mean_rate(scheme, k_max, n_trials, seed=0, rho_iters=500):
    """MeanRateRecord for k = 1..k_max."""
    if n_trials < 100:
        raise ValueError("n_trials must be >= 100")
    G = scheme.G
    m = scheme.m
    D = np.empty((m, n_trials))
    for i in range(n_trials):
        D[:, i] = trial_normals(seed, i, m)
    rho = power_spectral_radius(lambda v: G @ v, m, rho_iters, seed)
    Gk = np.eye(m)
    records = []
    for k in range(1, k_max + 1):
        D = G @ D
        Gk = G @ Gk
        sq = np.sum(D * D, axis=0)
        mean_sq = float(np.mean(sq))
        ek = float(np.sqrt(mean_sq))
        # se of sqrt(mean) by the delta method
        se_mean = float(np.std(sq, ddof=1) / np.sqrt(n_trials))
        se = se_mean / (2.0 * ek) if ek > 0 else 0.0
        records.append(MeanRateRecord(
            k=k,
            empirical_ek=ek,
            frob_norm=float(np.linalg.norm(Gk, "fro")),
            rho_pow=float(rho ** k),
            std_err=se,
        ))
    return records


def random_contraction(m, rho_target, seed=0, rho_iters=2000):
    """A random symmetric matrix rescaled to the requested spectral radius.

    Symmetry keeps the spectrum real so the power-iteration rescaling is
    well behaved.
    """
    g = trial_normals(seed, 0, m * m).reshape(m, m)
    g = 0.5 * (g + g.T) / np.sqrt(m)
    rho = power_spectral_radius(lambda v: g @ v, m, rho_iters, seed)
    return StationaryScheme(G=g * (rho_target / rho))
