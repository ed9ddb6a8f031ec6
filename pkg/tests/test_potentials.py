"""Tests for the built-in potential catalogue and its analysis helpers."""

import numpy as np
import pytest

from sgdlab import (
    Domain,
    builtin,
    check_gradients,
    classify_stationary,
    gaussian_cloud,
    population_covariance,
    quasi_potential_isotropic,
)

ALL_BUILTINS = [
    ("quadratic_well", ()),
    ("inverted_quadratic", ()),
    ("double_well_1d", ()),
    ("asym_double_well_1d", (-0.05,)),
    ("saddle_2d", ()),
]


@pytest.mark.parametrize("name,params", ALL_BUILTINS)
def test_gradients_match_finite_differences(name, params):
    spec = builtin(name, params=params)
    report = check_gradients(spec, n_points=40, seed=3)
    assert report.passed, f"{name}: grad err {report.max_gradient_error:.3e}"
    assert report.max_gradient_error < 1e-6
    assert report.max_hessian_asymmetry < 1e-8


def test_quadratic_well_critical_points():
    spec = builtin("quadratic_well")
    (cp,) = spec.minimizers()
    assert np.allclose(cp.location, 0.0)
    assert np.allclose(cp.eigenvalues, 1.0)
    assert cp.kind == "minimizer"
    assert len(spec.unstable_points()) == 0


def test_double_well_structure():
    spec = builtin("double_well_1d")
    mins = sorted(cp.location[0] for cp in spec.minimizers())
    assert np.allclose(mins, [-1.0, 1.0], atol=1e-10)
    (top,) = spec.unstable_points()
    assert np.allclose(top.location, 0.0)
    assert top.kind == "maximizer"
    # barrier height F(0) - F(+-1) = 1/4
    barrier = spec.value(top.location) - spec.value(np.array([1.0]))
    assert abs(barrier - 0.25) < 1e-12


def test_asymmetric_double_well_global_minimizer():
    spec = builtin("asym_double_well_1d", params=(-0.05,))
    mins = spec.minimizers()
    assert len(mins) == 2
    (glob,) = spec.global_minimizers()
    assert glob.location[0] > 0.9  # the tilt favours the right-hand well
    vals = sorted(spec.value(cp.location) for cp in mins)
    assert spec.value(glob.location) == pytest.approx(vals[0])


def test_saddle_2d_eigenstructure():
    spec = builtin("saddle_2d")
    (cp,) = spec.unstable_points()
    assert np.allclose(cp.location, [0.0, 0.0])
    assert cp.kind == "saddle"
    assert sorted(cp.eigenvalues) == pytest.approx([-1.0, 1.0])


def test_classify_stationary_labels():
    assert classify_stationary(np.array([2.0, 1.0])) == "minimizer"
    assert classify_stationary(np.array([-1.0, -3.0])) == "maximizer"
    assert classify_stationary(np.array([1.0, -1.0])) == "saddle"


def test_gaussian_cloud_component_structure():
    rng = np.random.default_rng(11)
    centers = rng.normal(size=(5, 2))
    fs = gaussian_cloud(centers)
    x = rng.normal(size=2)
    grads = np.array([g(x) for g in fs.component_gradients])
    assert grads.shape == (5, 2)
    np.testing.assert_allclose(grads, x[None, :] - centers)
    np.testing.assert_allclose(grads.mean(axis=0), fs.base.gradient(x))
    cov = population_covariance(fs, x)
    # population covariance of the component gradients (1/M normalisation)
    centered = grads - grads.mean(axis=0)
    np.testing.assert_allclose(cov, centered.T @ centered / 5, atol=1e-14)
    eigs = np.linalg.eigvalsh(cov)
    assert eigs.min() > -1e-14


def test_finite_sum_builtin_matches_cloud_helper():
    centers = np.array([[0.5, 0.0], [-0.5, 0.0], [0.0, 0.5], [0.0, -0.5]])
    spec = builtin("gaussian_cloud_finite_sum", params=tuple(centers.ravel()), dim=2)
    x = np.array([0.25, 0.25])
    np.testing.assert_allclose(spec.base.gradient(x), x - centers.mean(axis=0), atol=1e-12)


def test_quasi_potential_reference_values():
    well = builtin("quadratic_well")
    dw = builtin("double_well_1d")
    assert quasi_potential_isotropic(well, 1.0, Domain.interval(-1, 1)) == pytest.approx(1.0)
    assert quasi_potential_isotropic(well, 1.0, Domain.interval(-0.5, 0.5)) == pytest.approx(0.25)
    assert quasi_potential_isotropic(well, 2.0, Domain.interval(-1, 1)) == pytest.approx(0.25)
    ball = Domain.ball(np.array([1.0]), 0.8)
    assert quasi_potential_isotropic(dw, 1.0, ball) == pytest.approx(0.4608)
