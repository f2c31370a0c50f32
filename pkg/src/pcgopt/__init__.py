"""Preconditioner parameter optimization for the conjugate gradient method.

The package optimizes a scalar preconditioner parameter (RIC_alpha(0) or
SSOR(omega)) for preconditioned CG by minimizing either a stochastic
mean-convergence functional F_s over random initial-guess trials or the
classical condition-number functional F_c, and ships the supporting sparse
linear algebra, test problems, and experiment CLI.
"""

from .errors import (BreakdownError, FormatError, IndefiniteOperatorError,
                     JacobiDivergentError, OptimizationFailedError,
                     PcgoptError, SingularFactorError, ZeroOperatorError)
from .sparsela import (CsrMatrix, EigMethod, SpectrumSummary, TriFactor,
                       dense_sym_eig, dot, norm2, power_spectral_radius,
                       read_matrix_market, spmv, tri_solve,
                       write_matrix_market)
from .problems import (CoeffKind, DiffusionSpec, LinearSystem,
                       build_diag_demo, build_diffusion)
from .precond import (Preconditioner, Variant, identity_precond, jacobi_build,
                      precond_apply, ric0_factorize, sor_optimal_omega,
                      ssor_build)
from .krylov import (LanczosTridiag, PcgTrace, TheoremDemoConfig,
                     TheoremDemoResult, pcg, preconditioned_condition_number,
                     residual_poly_value, theorem_demo, tridiag_from_trace)
from .stationary import (MeanRateRecord, StationaryScheme, random_contraction,
                         verify_mean_rate)
from .stochastic import (DistKind, FunctionalEval, TrialDistribution, eval_Fc,
                         eval_Fs, sample_trials)
from .optimize import (BrentResult, Family, Functional, OptimizeSpec,
                       brent_minimize, optimize_parameter)

__version__ = "0.1.0"
