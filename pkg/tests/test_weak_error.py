"""Tests for weak-error measurement against the diffusion limits."""

import math

import numpy as np
import pytest

from sgdlab import (
    AdditiveGaussianOracle,
    builtin,
    gauss_hermite_expectation,
    order_fit,
    weak_error_ladder_linear,
    weak_error_linear,
    weak_error_mc,
)

ETA_LADDER = [0.2, 0.1, 0.05, 0.025, 0.0125]


def test_exact_weak_errors_linear_case():
    pt1 = weak_error_linear(1.0, 0.1, 1.0, T=1.0, x0=1.0, drift_order="first")
    idx = 0  # observable "x"
    assert pt1.errors[idx] == pytest.approx(abs(0.9**10 - math.exp(-1.0)), abs=1e-12)
    assert pt1.errors[idx] == pytest.approx(0.019201, abs=5e-7)

    pt2 = weak_error_linear(1.0, 0.1, 1.0, T=1.0, x0=1.0, drift_order="second")
    assert pt2.errors[idx] == pytest.approx(abs(0.9**10 - math.exp(-1.05)), abs=1e-12)
    assert pt2.errors[idx] == pytest.approx(0.0012593, abs=5e-7)


def test_ladder_orders_first_and_second():
    for order, band in (("first", (0.75, 1.25)), ("second", (1.7, 2.3))):
        rep = weak_error_ladder_linear(1.0, 1.0, 1.0, 1.0, ETA_LADDER, drift_order=order)
        for name in ("x", "x2", "tanh_x"):
            slope = rep.fitted_orders[rep.observables.index(name)]
            assert band[0] <= slope <= band[1], f"{order}/{name}: slope {slope:.4f}"


def test_second_order_errors_dominate_first_order_at_small_eta():
    rep1 = weak_error_ladder_linear(1.0, 1.0, 1.0, 1.0, ETA_LADDER, drift_order="first")
    rep2 = weak_error_ladder_linear(1.0, 1.0, 1.0, 1.0, ETA_LADDER, drift_order="second")
    idx = rep1.observables.index("x")
    e1 = rep1.points[-1].errors[idx]
    e2 = rep2.points[-1].errors[idx]
    assert e2 < 0.2 * e1


def test_order_fit_recovers_synthetic_power_law():
    etas = [0.2, 0.1, 0.05, 0.025]
    errors = [3.0 * e**2 for e in etas]
    fit = order_fit(etas, errors)
    assert fit.slope == pytest.approx(2.0, abs=1e-12)
    assert math.exp(fit.intercept) == pytest.approx(3.0, rel=1e-10)
    assert fit.n_used == 4


def test_order_fit_drops_noise_floor_points():
    etas = [0.2, 0.1, 0.05, 0.025]
    errors = [1e-1 * e for e in etas[:3]] + [1e-12]
    stderrs = [1e-6, 1e-6, 1e-6, 1e-6]
    fit = order_fit(etas, errors, stderrs=stderrs)
    assert fit.n_used < 4


def test_gauss_hermite_matches_normal_moments():
    val = gauss_hermite_expectation(lambda x: x**2, mean=0.3, var=0.49)
    assert val == pytest.approx(0.3**2 + 0.49, abs=1e-12)
    val3 = gauss_hermite_expectation(lambda x: x**3, mean=0.5, var=2.0)
    assert val3 == pytest.approx(0.5**3 + 3 * 0.5 * 2.0, abs=1e-10)


def test_monte_carlo_ladder_agrees_with_exact_source():
    pot = builtin("quadratic_well")
    oracle = AdditiveGaussianOracle.isotropic(pot, 1.0)
    etas = [0.2, 0.1, 0.05]
    rep_mc = weak_error_mc(pot, oracle, 1.0, np.array([1.0]), etas, n_paths=20000, seed=6)
    for pt_mc, eta in zip(rep_mc.points, etas):
        pt_exact = weak_error_linear(1.0, eta, 1.0, T=1.0, x0=1.0, drift_order="first")
        idx = rep_mc.observables.index("x")
        tol = 4 * pt_mc.stderrs[idx] + 1e-4
        assert abs(pt_mc.errors[idx] - pt_exact.errors[idx]) < tol
