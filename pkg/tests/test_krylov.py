"""PCG, Lanczos/Ritz reconstruction, condition-number estimation, theorem demo."""

import numpy as np
import pytest

from pcgopt.errors import IndefiniteOperatorError
from pcgopt.krylov import (TheoremDemoConfig, pcg,
                           preconditioned_condition_number,
                           residual_poly_value, theorem_demo,
                           tridiag_from_trace)
from pcgopt.precond import identity_precond, jacobi_build, ric0_factorize
from pcgopt.problems import DiffusionSpec, build_diag_demo, build_diffusion
from pcgopt.sparsela import CsrMatrix, dense_sym_eig, norm2


def random_spd(m, seed):
    rng = np.random.default_rng(seed)
    G = rng.normal(size=(m, m))
    return CsrMatrix.from_dense(G @ G.T + m * np.eye(m), symmetric=True)


class TestPcg:
    def test_exact_convergence_in_m_steps(self):
        m = 12
        A = random_spd(m, 0)
        rng = np.random.default_rng(1)
        b = rng.normal(size=m)
        trace = pcg(A, b, np.zeros(m), identity_precond(m), m, rel_tol=0.0)
        x = np.linalg.solve(A.to_dense(), b)
        assert norm2(trace.final_x - x) <= 1e-8 * norm2(x)

    def test_perfect_preconditioner_one_step(self):
        d = np.array([1.0, 2.0, 3.0, 4.0])
        A = CsrMatrix.diagonal(d)
        P = jacobi_build(A)  # exact inverse for a diagonal matrix
        trace = pcg(A, np.ones(4), np.zeros(4), P, 10, rel_tol=1e-14)
        assert trace.iters_done == 1
        assert trace.relres[-1] <= 1e-14

    def test_early_stop_at_tolerance(self):
        system = build_diffusion(DiffusionSpec(n_interior=15))
        P = ric0_factorize(system.A, 0.9)
        trace = pcg(system.A, system.b, np.zeros(system.A.nrows), P, 500,
                    rel_tol=1e-7)
        assert trace.relres[trace.iters_done] <= 1e-7
        assert trace.relres[trace.iters_done - 1] > 1e-7

    def test_error_norms_monotone_in_A_norm(self):
        system = build_diffusion(DiffusionSpec(n_interior=10))
        P = identity_precond(system.A.nrows)
        trace = pcg(system.A, system.b, np.zeros(system.A.nrows), P, 40,
                    rel_tol=0.0, x_star=system.x_exact)
        assert np.all(np.diff(trace.errA) <= 1e-13 * trace.errA[0])

    def test_exactly_k_iterations_with_zero_tol(self):
        system = build_diffusion(DiffusionSpec(n_interior=8))
        P = identity_precond(system.A.nrows)
        trace = pcg(system.A, system.b, np.zeros(system.A.nrows), P, 7, rel_tol=0.0)
        assert trace.iters_done == 7
        assert trace.relres.shape[0] == 8

    def test_indefinite_matrix_detected(self):
        A = CsrMatrix.diagonal(np.array([1.0, -1.0]))
        with pytest.raises(IndefiniteOperatorError):
            pcg(A, np.ones(2), np.zeros(2), identity_precond(2), 5)

    def test_zero_rhs_zero_start_is_fixed_point(self):
        A = CsrMatrix.identity(3)
        trace = pcg(A, np.zeros(3), np.zeros(3), identity_precond(3), 5)
        assert trace.iters_done == 0
        assert np.array_equal(trace.final_x, np.zeros(3))


class TestTridiagFromTrace:
    def test_ritz_values_converge_to_spectrum(self):
        # A full-length CG run on a small SPD matrix reproduces its
        # spectrum through the Lanczos tridiagonal built from alpha/beta.
        m = 10
        A = random_spd(m, 3)
        rng = np.random.default_rng(4)
        b = rng.normal(size=m)
        trace = pcg(A, b, np.zeros(m), identity_precond(m), m, rel_tol=0.0)
        ritz = tridiag_from_trace(trace).eigenvalues()
        w = dense_sym_eig(A.to_dense())
        assert np.allclose(ritz, w, rtol=1e-6)

    def test_diag_matrix_one_step(self):
        A = CsrMatrix.diagonal(np.array([2.0, 2.0]))
        trace = pcg(A, np.ones(2), np.zeros(2), identity_precond(2), 2, rel_tol=0.0)
        tri = tridiag_from_trace(trace, k=1)
        assert tri.diag[0] == pytest.approx(2.0)

    def test_empty_trace_rejected(self):
        A = CsrMatrix.identity(2)
        trace = pcg(A, np.zeros(2), np.zeros(2), identity_precond(2), 5)
        with pytest.raises(ValueError):
            tridiag_from_trace(trace)


class TestResidualPolyValue:
    def test_single_root(self):
        # q(t) = (theta - t)/theta with theta=2 at t=1 -> 0.5
        assert residual_poly_value(np.array([2.0]), 1.0) == pytest.approx(0.5)

    def test_value_at_zero_is_one(self):
        assert residual_poly_value(np.array([1.0, 3.0, 7.0]), 0.0) == pytest.approx(1.0)

    def test_nonpositive_root_rejected(self):
        with pytest.raises(ValueError):
            residual_poly_value(np.array([1.0, -2.0]), 0.5)


class TestConditionNumber:
    def test_identity_preconditioner_recovers_kappa(self):
        m = 50
        A = random_spd(m, 5)
        s = preconditioned_condition_number(A, identity_precond(m),
                                            lanczos_iters=m, seed=1)
        w = dense_sym_eig(A.to_dense())
        assert s.kappa == pytest.approx(w[-1] / w[0], rel=1e-8)

    def test_oracle_matches_lanczos(self):
        system = build_diffusion(DiffusionSpec(n_interior=12))
        P = ric0_factorize(system.A, 0.9)
        s1 = preconditioned_condition_number(system.A, P, lanczos_iters=144, seed=2)
        s2 = preconditioned_condition_number(system.A, P, oracle=True)
        assert s1.kappa == pytest.approx(s2.kappa, rel=1e-8)

    def test_perfect_preconditioner_kappa_one(self):
        A = CsrMatrix.diagonal(np.array([3.0, 5.0, 7.0]))
        s = preconditioned_condition_number(A, jacobi_build(A), lanczos_iters=3, seed=0)
        assert s.kappa == pytest.approx(1.0, abs=1e-12)


class TestTheoremDemo:
    def test_bounds_hold_and_crossing_found(self):
        cfg = TheoremDemoConfig(m=300, s=2, gamma_head=0.05, seed=0, iters=120)
        res = theorem_demo(cfg)
        # classical Chebyshev bound on the full process
        assert np.all(res.errA <= res.bound_C1 * (1 + 1e-13))
        assert res.crossing is not None

    def test_zero_head_gives_identical_processes(self):
        cfg = TheoremDemoConfig(m=200, s=2, gamma_head=0.0, seed=1, iters=60)
        res = theorem_demo(cfg)
        assert np.allclose(res.errA, res.errA_bar, rtol=1e-12, atol=1e-12)

    def test_reduced_process_beats_its_own_bound(self):
        cfg = TheoremDemoConfig(m=300, s=2, gamma_head=0.05, seed=0, iters=100)
        res = theorem_demo(cfg)
        bound = 2.0 * res.Cs ** np.arange(res.errA_bar.shape[0]) * res.errA_bar[0]
        assert np.all(res.errA_bar <= bound * (1 + 1e-13))

    def test_invalid_config(self):
        with pytest.raises(ValueError):
            TheoremDemoConfig(m=10, s=11)
        with pytest.raises(ValueError):
            TheoremDemoConfig(m=10, iters=20)
