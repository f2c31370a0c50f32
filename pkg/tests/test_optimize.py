"""Brent minimization and the parameter-optimization driver."""

import math

import numpy as np
import pytest

from pcgopt.errors import OptimizationFailedError
from pcgopt.optimize import (Family, Functional, OptimizeSpec, brent_minimize,
                             optimize_parameter)
from pcgopt.problems import DiffusionSpec, build_diffusion


class TestBrentMinimize:
    def test_parabola(self):
        res = brent_minimize(lambda x: (x - 0.25) ** 2, 0.0, 1.0, xtol=1e-5)
        assert res.x_star == pytest.approx(0.25, abs=1e-5)
        assert res.converged

    def test_absolute_value(self):
        res = brent_minimize(lambda x: abs(x - 0.7), 0.0, 1.0, xtol=1e-5)
        assert res.x_star == pytest.approx(0.7, abs=1e-5)

    def test_cosine(self):
        res = brent_minimize(math.cos, 0.0, 2.0 * math.pi, xtol=1e-5)
        assert res.x_star == pytest.approx(math.pi, abs=1e-4)

    def test_one_eval_per_step(self):
        calls = []
        brent_minimize(lambda x: (calls.append(x), (x - 0.3) ** 2)[1], 0.0, 1.0)
        # every probed point is distinct: no re-evaluation
        assert len(calls) == len(set(calls))

    def test_respects_max_evals(self):
        res = brent_minimize(lambda x: math.sin(50 * x), 0.0, 1.0,
                             xtol=1e-15, max_evals=12)
        assert res.n_evals <= 12

    def test_inf_tolerated_as_rejection(self):
        def f(x):
            return math.inf if x < 0.5 else (x - 0.8) ** 2
        res = brent_minimize(f, 0.0, 1.0, xtol=1e-5)
        assert res.x_star == pytest.approx(0.8, abs=1e-4)

    def test_nan_raises(self):
        with pytest.raises(OptimizationFailedError):
            brent_minimize(lambda x: math.nan, 0.0, 1.0)

    def test_all_inf_raises(self):
        with pytest.raises(OptimizationFailedError):
            brent_minimize(lambda x: math.inf, 0.0, 1.0, max_evals=20)

    def test_bad_interval(self):
        with pytest.raises(ValueError):
            brent_minimize(lambda x: x, 1.0, 0.0)


class TestOptimizeSpec:
    def test_family_interval_validation(self):
        with pytest.raises(ValueError):
            OptimizeSpec(family="ric0", interval=(0.5, 1.5), K=5)
        with pytest.raises(ValueError):
            OptimizeSpec(family="ssor", interval=(-0.5, 1.0), K=5)
        with pytest.raises(ValueError):
            OptimizeSpec(family="ric0", interval=(0.9, 0.9), K=5)

    def test_string_coercion(self):
        spec = OptimizeSpec(family="ssor", interval=(0.1, 1.9), K=5,
                            functional="fc")
        assert spec.family is Family.SSOR
        assert spec.functional is Functional.FC


@pytest.fixture(scope="module")
def system():
    return build_diffusion(DiffusionSpec(n_interior=15))


class TestOptimizeParameter:
    def test_interior_minimum_found(self, system):
        spec = OptimizeSpec(family="ric0", interval=(0.5, 1.0), K=10, n=10,
                            seed=0)
        res, log = optimize_parameter(system.A, spec)
        assert 0.5 <= res.x_star <= 1.0
        finite = [v for _, v in log if math.isfinite(v)]
        assert res.f_star <= min(finite) * (1 + 1e-15)
        assert len(finite) >= 3

    def test_identical_runs_identical_logs(self, system):
        spec = OptimizeSpec(family="ric0", interval=(0.8, 1.0), K=8, n=6, seed=2)
        _, log1 = optimize_parameter(system.A, spec)
        _, log2 = optimize_parameter(system.A, spec)
        assert log1 == log2

    def test_eval_count_regression_bound(self, system):
        spec = OptimizeSpec(family="ric0", interval=(0.9, 1.0), K=10, n=10, seed=1)
        res, _ = optimize_parameter(system.A, spec)
        assert res.n_evals <= 40

    def test_fc_path(self, system):
        spec = OptimizeSpec(family="ric0", interval=(0.9, 1.0), K=10,
                            functional="fc", lanczos_iters=225, seed=0)
        res, log = optimize_parameter(system.A, spec)
        assert 0.9 <= res.x_star <= 1.0
        assert all(0.0 <= v < 1.0 for _, v in log if math.isfinite(v))

    def test_ssor_family(self, system):
        spec = OptimizeSpec(family="ssor", interval=(0.0, 2.0), K=12, n=6, seed=0)
        res, log = optimize_parameter(system.A, spec)
        # endpoints are infeasible (omega in the open interval) and must have
        # been rejected, not crashed
        assert 0.0 < res.x_star < 2.0

    def test_breakdown_logged_as_inf(self):
        # An indefinite-but-positive-diagonal matrix breaks RIC at any alpha,
        # so every log entry is +inf and optimization fails loudly.
        from pcgopt.sparsela import CsrMatrix
        A = CsrMatrix.from_dense(np.array([[1.0, 2.0], [2.0, 1.0]]),
                                 symmetric=True)
        spec = OptimizeSpec(family="ric0", interval=(0.0, 1.0), K=2, n=2,
                            max_evals=15)
        with pytest.raises(OptimizationFailedError):
            optimize_parameter(A, spec)
