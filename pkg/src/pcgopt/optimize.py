"""Derivative-free scalar minimization and the parameter-optimization driver.

Brent's bounded method (golden-section fallback plus successive parabolic
interpolation, one objective evaluation per step) minimizes either
functional over a preconditioner-parameter interval.  The same master seed
is reused for every F_s evaluation inside one optimization (common random
numbers), which makes the objective a deterministic function of the
parameter.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

from .errors import BreakdownError, OptimizationFailedError
from .precond import ric0_factorize, ssor_build
from .stochastic import eval_Fc, eval_Fs

__all__ = ["BrentResult", "Family", "Functional", "OptimizeSpec",
           "brent_minimize", "optimize_parameter"]

_GOLDEN = 0.3819660112501051


@dataclass
class BrentResult:
    x_star: float
    f_star: float
    n_evals: int
    converged: bool


class Family(Enum):
    RIC0 = "ric0"
    SSOR = "ssor"


class Functional(Enum):
    FS = "fs"
    FC = "fc"


@dataclass
class OptimizeSpec:
    family: Family
    interval: tuple
    K: int
    n: int = 50
    seed: int = 0
    xtol: float = 1e-5
    max_evals: int = 100
    functional: Functional = Functional.FS
    dist: object = None              # TrialDistribution for Fs (None = iid normal)
    norm: str = "two_norm"
    lanczos_iters: int = 200         # Fc only
    oracle: bool = False             # Fc only: dense eigen path

    def __post_init__(self):
        if isinstance(self.family, str):
            self.family = Family(self.family)
        if isinstance(self.functional, str):
            self.functional = Functional(self.functional)
        lo, hi = self.interval
        if not lo < hi:
            raise ValueError("interval must satisfy lo < hi")
        if self.xtol <= 0:
            raise ValueError("xtol must be positive")
        if self.family is Family.RIC0 and not (0.0 <= lo and hi <= 1.0):
            raise ValueError("ric0 interval must lie within [0, 1]")
        if self.family is Family.SSOR and not (0.0 <= lo and hi <= 2.0):
            raise ValueError("ssor interval must lie within [0, 2]")


def brent_minimize(f, lo, hi, xtol=1e-5, max_evals=100):
    """Classical bounded Brent minimization of a scalar function.

    Terminates when the bracket around the best point shrinks below
    xtol*(1+|x|) or after max_evals objective evaluations.  +inf values are
    tolerated as rejected points (the next step falls back to golden
    section); NaN raises.
    """
    if not lo < hi:
        raise ValueError("lo must be less than hi")

    n_evals = 0

    def call(xx):
        nonlocal n_evals
        val = f(xx)
        n_evals += 1
        if math.isnan(val):
            raise OptimizationFailedError(f"objective returned NaN at x={xx}", x=xx)
        return val

    a, b = lo, hi
    x = w = v = a + _GOLDEN * (b - a)
    fx = fw = fv = call(x)
    d = e = 0.0
    converged = False
    while n_evals < max_evals:
        mid = 0.5 * (a + b)
        tol1 = xtol * (1.0 + abs(x))
        tol2 = 2.0 * tol1
        if abs(x - mid) <= tol2 - 0.5 * (b - a):
            converged = True
            break
        use_golden = True
        if abs(e) > tol1 and math.isfinite(fx) and math.isfinite(fw) and math.isfinite(fv):
            # parabola through (x, fx), (w, fw), (v, fv)
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0.0:
                p = -p
            q = abs(q)
            etemp = e
            e = d
            if abs(p) < abs(0.5 * q * etemp) and p > q * (a - x) and p < q * (b - x):
                d = p / q
                u = x + d
                if (u - a) < tol2 or (b - u) < tol2:
                    d = tol1 if mid > x else -tol1
                use_golden = False
        if use_golden:
            e = (b - x) if x < mid else (a - x)
            d = _GOLDEN * e
        u = x + d if abs(d) >= tol1 else x + (tol1 if d > 0 else -tol1)
        fu = call(u)
        if fu <= fx:
            if u >= x:
                a = x
            else:
                b = x
            v, w, x = w, x, u
            fv, fw, fx = fw, fx, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, w = w, u
                fv, fw = fw, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
    if not math.isfinite(fx):
        raise OptimizationFailedError("no finite objective value found in the interval")
    return BrentResult(x_star=float(x), f_star=float(fx),
                       n_evals=n_evals, converged=converged)


def optimize_parameter(A, spec):
    """Brent-optimize a preconditioner parameter against F_s or F_c.

    Returns (BrentResult, eval_log) where eval_log is the list of
    (param, value) pairs in evaluation order.  Factorization breakdown at a
    probed parameter yields +inf, which Brent treats as a rejected point.
    """
    log = []

    def objective(p):
        try:
            if spec.family is Family.RIC0:
                P = ric0_factorize(A, p)
            else:
                P = ssor_build(A, p)
        except (BreakdownError, ValueError):
            log.append((p, math.inf))
            return math.inf
        if spec.functional is Functional.FS:
            ev = eval_Fs(A, P, spec.K, spec.n, spec.dist, spec.seed, spec.norm, param=p)
        else:
            ev = eval_Fc(A, P, spec.K, spec.lanczos_iters, spec.seed,
                         oracle=spec.oracle, param=p)
        log.append((p, ev.value))
        return ev.value

    lo, hi = spec.interval
    result = brent_minimize(objective, lo, hi, xtol=spec.xtol, max_evals=spec.max_evals)
    if sum(1 for _, v in log if math.isfinite(v)) < 3:
        raise OptimizationFailedError("fewer than 3 successful objective evaluations")
    return result, log
