"""Sparse/dense kernel tests: CSR, triangular solves, Matrix Market, eigensolver."""

import numpy as np
import pytest

from pcgopt.errors import FormatError, SingularFactorError, ZeroOperatorError
from pcgopt.sparsela import (CsrMatrix, TriFactor, dense_sym_eig, dot, norm2,
                             power_spectral_radius, read_matrix_market, spmv,
                             tri_solve, write_matrix_market)


def dense_to_tri(L, unit_diag=False):
    return TriFactor(CsrMatrix.from_dense(L), unit_diag=unit_diag)


class TestSpmv:
    def test_identity(self):
        A = CsrMatrix.identity(3)
        assert np.array_equal(spmv(A, np.array([1.0, 2.0, 3.0])), [1.0, 2.0, 3.0])

    def test_diagonal_scaling(self):
        A = CsrMatrix.diagonal(np.array([1.0, 2.0, 3.0, 4.0]))
        assert np.array_equal(spmv(A, np.ones(4)), [1.0, 2.0, 3.0, 4.0])

    def test_dense_oracle_2x2(self):
        A = CsrMatrix.from_dense(np.array([[2.0, -1.0], [-1.0, 2.0]]))
        assert np.array_equal(spmv(A, np.ones(2)), [1.0, 1.0])

    def test_matches_dense_on_random(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            D = rng.normal(size=(8, 8))
            D[rng.random(size=(8, 8)) < 0.5] = 0.0
            x = rng.normal(size=8)
            got = spmv(CsrMatrix.from_dense(D), x)
            assert np.allclose(got, D @ x, rtol=1e-14, atol=1e-14)

    def test_identity_property_random_sizes(self):
        rng = np.random.default_rng(0)
        for m in (1, 3, 17, 64):
            x = rng.normal(size=m)
            assert np.array_equal(spmv(CsrMatrix.identity(m), x), x)

    def test_dimension_mismatch(self):
        A = CsrMatrix.identity(3)
        with pytest.raises(ValueError):
            spmv(A, np.ones(4))


class TestTriSolve:
    def test_identity(self):
        F = dense_to_tri(np.eye(3))
        b = np.array([4.0, 5.0, 6.0])
        assert np.array_equal(tri_solve(F, b), b)

    def test_forward_oracle(self):
        F = dense_to_tri(np.array([[2.0, 0.0], [1.0, 1.0]]))
        assert np.allclose(tri_solve(F, np.array([2.0, 3.0])), [1.0, 2.0])

    def test_transposed_oracle(self):
        F = dense_to_tri(np.array([[2.0, 0.0], [1.0, 1.0]]))
        assert np.allclose(tri_solve(F, np.array([4.0, 2.0]), transposed=True), [1.0, 2.0])

    def test_roundtrip_residual(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            m = 12
            L = np.tril(rng.normal(size=(m, m)))
            np.fill_diagonal(L, np.abs(np.diag(L)) + 1.0)
            b = rng.normal(size=m)
            x = tri_solve(dense_to_tri(L), b)
            assert norm2(L @ x - b) <= 1e-12 * norm2(b)
            xt = tri_solve(dense_to_tri(L), b, transposed=True)
            assert norm2(L.T @ xt - b) <= 1e-12 * norm2(b)

    def test_zero_diagonal_rejected(self):
        with pytest.raises((SingularFactorError, ValueError)):
            F = dense_to_tri(np.array([[0.0, 0.0], [1.0, 1.0]]))
            tri_solve(F, np.ones(2))


class TestMatrixMarket:
    def test_symmetric_mirroring(self, tmp_path):
        path = tmp_path / "m.mtx"
        path.write_text("%%MatrixMarket matrix coordinate real symmetric\n"
                        "2 2 3\n1 1 2.0\n2 1 -1.0\n2 2 2.0\n")
        A = read_matrix_market(str(path))
        assert np.allclose(A.to_dense(), [[2.0, -1.0], [-1.0, 2.0]])
        assert A.symmetric

    def test_out_of_range_index(self, tmp_path):
        path = tmp_path / "bad.mtx"
        path.write_text("%%MatrixMarket matrix coordinate real symmetric\n"
                        "2 2 1\n3 1 1.0\n")
        with pytest.raises(FormatError):
            read_matrix_market(str(path))

    def test_unsupported_header(self, tmp_path):
        path = tmp_path / "gen.mtx"
        path.write_text("%%MatrixMarket matrix coordinate real general\n"
                        "1 1 1\n1 1 1.0\n")
        with pytest.raises(FormatError):
            read_matrix_market(str(path))

    def test_roundtrip_preserves_entries(self, tmp_path):
        rng = np.random.default_rng(11)
        D = rng.normal(size=(6, 6))
        D = D + D.T + 10 * np.eye(6)
        D[np.abs(D) < 0.8] = 0.0
        D = 0.5 * (D + D.T)
        A = CsrMatrix.from_dense(D, symmetric=True)
        path = tmp_path / "rt.mtx"
        write_matrix_market(A, str(path))
        B = read_matrix_market(str(path))
        assert np.array_equal(A.to_dense(), B.to_dense())

    def test_duplicates_summed(self, tmp_path):
        path = tmp_path / "dup.mtx"
        path.write_text("%%MatrixMarket matrix coordinate real symmetric\n"
                        "2 2 3\n1 1 1.0\n1 1 1.5\n2 2 1.0\n")
        A = read_matrix_market(str(path))
        assert np.allclose(A.to_dense(), [[2.5, 0.0], [0.0, 1.0]])


class TestDenseSymEig:
    def test_diagonal(self):
        assert np.allclose(dense_sym_eig(np.diag([3.0, 1.0, 2.0])), [1.0, 2.0, 3.0])

    def test_characteristic_polynomial_oracle(self):
        # [[2,-1],[-1,2]] has char poly (2-l)^2 - 1 with roots 1, 3
        w = dense_sym_eig(np.array([[2.0, -1.0], [-1.0, 2.0]]))
        assert np.allclose(w, [1.0, 3.0], atol=1e-12)

    def test_identity(self):
        assert np.allclose(dense_sym_eig(np.eye(5)), np.ones(5))

    def test_trace_and_residual(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            G = rng.normal(size=(20, 20))
            A = 0.5 * (G + G.T)
            w, V = dense_sym_eig(A, eigenvectors=True)
            assert abs(np.sum(w) - np.trace(A)) <= 1e-10 * max(abs(np.trace(A)), 1.0)
            assert (np.linalg.norm(A @ V - V @ np.diag(w), "fro")
                    <= 1e-10 * np.linalg.norm(A, "fro"))

    def test_sorted_ascending(self):
        rng = np.random.default_rng(9)
        G = rng.normal(size=(30, 30))
        w = dense_sym_eig(0.5 * (G + G.T))
        assert np.all(np.diff(w) >= 0)

    def test_nonsymmetric_rejected(self):
        with pytest.raises(ValueError):
            dense_sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))


class TestPowerSpectralRadius:
    def test_scaled_identity(self):
        rho = power_spectral_radius(lambda v: 0.5 * v, 4, 50, seed=1)
        assert abs(rho - 0.5) <= 1e-12

    def test_dominant_diagonal(self):
        G = np.diag([0.9, 0.1])
        rho = power_spectral_radius(lambda v: G @ v, 2, 200, seed=1)
        assert abs(rho - 0.9) <= 1e-6

    def test_zero_operator_errors(self):
        with pytest.raises(ZeroOperatorError):
            power_spectral_radius(lambda v: 0.0 * v, 3, 10, seed=1)


class TestCsrValidation:
    def test_symmetric_flag_verified(self):
        with pytest.raises(ValueError):
            CsrMatrix.from_dense(np.array([[1.0, 2.0], [0.0, 1.0]]), symmetric=True)

    def test_dot_norm(self):
        v = np.array([3.0, 4.0])
        assert dot(v, v) == 25.0
        assert norm2(v) == 5.0
