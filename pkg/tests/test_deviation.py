"""Tests for the normal-deviation limit: rescaled fluctuations around the
gradient flow converge to a Gaussian process with a Lyapunov covariance."""

import math

import numpy as np
import pytest

from sgdlab import (
    AdditiveGaussianOracle,
    builtin,
    deviation_covariance,
    deviation_empirical,
    flow_sup_gap,
)

WELL = builtin("quadratic_well")


def test_lyapunov_covariance_quadratic_closed_form():
    """For F = x^2/2 the limit covariance is int_0^t e^{-2(t-s)} ds."""
    t_grid = np.array([0.5, 1.0])
    covs = deviation_covariance(WELL, np.array([1.0]), t_grid, diffusion=1.0)
    for t, cov in zip(t_grid, covs):
        exact = (1.0 - math.exp(-2.0 * t)) / 2.0
        assert cov[0, 0] == pytest.approx(exact, abs=1e-5)


def test_empirical_deviations_match_lyapunov_covariance():
    oracle = AdditiveGaussianOracle.isotropic(WELL, 1.0)
    rep = deviation_empirical(
        WELL, oracle, eta=0.01, T=1.0, x0=np.array([1.0]), n_paths=2000, seed=3,
        experiment="deviation",
    )
    assert rep.rel_frobenius_err < 0.15
    # rescaled deviations are centred
    se = math.sqrt(rep.lyapunov_cov[0, 0] / rep.n_paths)
    assert abs(rep.empirical_mean[0]) < 4 * se + 0.05


def test_sup_gap_to_flow_shrinks_with_eta():
    oracle = AdditiveGaussianOracle.isotropic(WELL, 1.0)
    gaps = []
    for eta in (0.1, 0.025):
        mean, stderr = flow_sup_gap(
            WELL, oracle, eta, T=1.0, x0=np.array([1.0]), n_paths=400, seed=5,
            experiment="ode-limit",
        )
        assert mean > 0.0 and stderr > 0.0
        gaps.append((mean, stderr))
    (g_hi, se_hi), (g_lo, se_lo) = gaps
    assert g_lo + 3 * se_lo < g_hi - 3 * se_hi
