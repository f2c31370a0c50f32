"""Mean-rate identity for stationary iterations on small dense matrices."""

import numpy as np
import pytest

from pcgopt.stationary import (StationaryScheme, random_contraction,
                               verify_mean_rate)


class TestVerifyMeanRate:
    def test_empirical_matches_frobenius(self):
        # E ||G^k d0||^2 = ||G^k||_F^2 for iid standard normal d0.
        scheme = random_contraction(20, 0.8, seed=0)
        records = verify_mean_rate(scheme, k_max=5, n_trials=4000, seed=1)
        for r in records:
            assert abs(r.empirical_ek - r.frob_norm) <= 3.0 * r.std_err

    def test_scalar_operator_exact(self):
        scheme = StationaryScheme(G=0.5 * np.eye(3))
        records = verify_mean_rate(scheme, k_max=3, n_trials=200, seed=0)
        # ||G^k||_F = 0.5^k sqrt(3)
        for r in records:
            assert r.frob_norm == pytest.approx(0.5 ** r.k * np.sqrt(3.0))
            assert r.rho_pow == pytest.approx(0.5 ** r.k, rel=1e-10)

    def test_gelfand_limit(self):
        scheme = random_contraction(30, 0.9, seed=2)
        records = verify_mean_rate(scheme, k_max=200, n_trials=100, seed=2)
        last = records[-1]
        assert last.frob_norm ** (1.0 / last.k) == pytest.approx(0.9, abs=0.02)

    def test_requires_enough_trials(self):
        scheme = random_contraction(5, 0.5, seed=0)
        with pytest.raises(ValueError):
            verify_mean_rate(scheme, k_max=2, n_trials=50)


class TestRandomContraction:
    def test_target_spectral_radius(self):
        scheme = random_contraction(25, 0.7, seed=4)
        rho = np.max(np.abs(np.linalg.eigvalsh(scheme.G)))
        assert rho == pytest.approx(0.7, rel=1e-3)

    def test_scheme_must_be_square(self):
        with pytest.raises(ValueError):
            StationaryScheme(G=np.zeros((2, 3)))
