"""Tests for exit-time machinery: the 1-D BVP oracle, Monte Carlo hitting
times, deterministic-flow travel times, and the escape-scaling fits."""

import math

import numpy as np
import pytest

from sgdlab import (
    Domain,
    ExitRecord,
    SdeConfig,
    builtin,
    exit_time_stats,
    flow_exit_time,
    hitting_time_mc,
    kramers_predictor,
    log_mean_exit_bvp_1d,
    mean_exit_bvp_1d,
    minimizer_scaling_fit,
    saddle_scaling_fit,
)

WELL = builtin("quadratic_well")
INVERTED = builtin("inverted_quadratic")
DOUBLE_WELL = builtin("double_well_1d")
UNIT = Domain.interval(-1.0, 1.0)


def test_bvp_brownian_interval_exact():
    """Pure diffusion on (-a, a): mean exit from x is (a^2 - x^2) / eps."""
    flat = lambda x: np.zeros_like(x)  # noqa: E731
    eps = 0.04
    for x in (0.0, 0.3, -0.7):
        u = mean_exit_bvp_1d(flat, eps, (-1.0, 1.0), x)
        exact = (1.0 - x * x) / eps
        assert abs(u - exact) / exact < 1e-6


def test_bvp_vanishes_toward_the_boundary():
    u_mid = mean_exit_bvp_1d(WELL, 0.1, (-1.0, 1.0), 0.0)
    tail = [mean_exit_bvp_1d(WELL, 0.1, (-1.0, 1.0), 1.0 - d) for d in (0.1, 0.01, 0.001)]
    assert u_mid > tail[0] > tail[1] > tail[2] > 0.0
    assert tail[2] < 0.05 * u_mid
    # starts on the boundary itself are rejected rather than extrapolated
    with pytest.raises(ValueError, match="strictly inside"):
        mean_exit_bvp_1d(WELL, 0.1, (-1.0, 1.0), 1.0)


def test_bvp_handles_outward_drift_without_cancellation():
    """Mean exit under strong outward drift stays near the travel time."""
    u = mean_exit_bvp_1d(INVERTED, 1e-3, (-1.0, 1.0), 0.5)
    assert 0.0 < u < 1.1 * math.log(2.0)
    # deep small-noise regime still evaluates cleanly in log space
    log_u = log_mean_exit_bvp_1d(WELL, 1e-4, (-1.0, 1.0), 0.0)
    assert log_u * 1e-4 == pytest.approx(1.0, rel=0.01)


def test_mc_exit_times_match_bvp_oracle():
    eta = 0.25
    dom = Domain.interval(-0.6, 0.6)
    bvp = mean_exit_bvp_1d(WELL, eta, (-0.6, 0.6), 0.0)
    cfg = SdeConfig(potential=WELL, eta=eta, dt=1e-4, T=1.0, x0=np.array([0.0]))
    recs = hitting_time_mc(cfg, dom, n_paths=2000, horizon=400.0, seed=11, experiment="exit-min")
    st = exit_time_stats(recs)
    assert st.censor_frac == 0.0
    tol = max(3 * st.stderr, 0.02 * bvp)
    assert abs(st.mean - bvp) < tol, f"MC {st.mean:.4f} vs BVP {bvp:.4f} (tol {tol:.4f})"


def test_mc_exit_quadratic_well_unit_interval():
    """Escape from the unit interval at eta=1/4 agrees with the BVP value."""
    eta = 0.25
    bvp = mean_exit_bvp_1d(WELL, eta, (-1.0, 1.0), 0.0)
    cfg = SdeConfig(potential=WELL, eta=eta, dt=2e-4, T=1.0, x0=np.array([0.0]))
    recs = hitting_time_mc(cfg, UNIT, n_paths=400, horizon=2000.0, seed=21, experiment="exit-min")
    st = exit_time_stats(recs)
    assert st.censor_frac == 0.0
    assert abs(st.mean - bvp) < 3 * st.stderr


def test_exit_steps_are_time_over_eta():
    cfg = SdeConfig(potential=WELL, eta=0.25, dt=1e-3, T=1.0, x0=np.array([0.0]))
    recs = hitting_time_mc(
        cfg, Domain.interval(-0.5, 0.5), n_paths=16, horizon=100.0, seed=3, experiment="exit-min"
    )
    for rec in recs:
        assert rec.exit_steps == pytest.approx(rec.exit_time / 0.25, rel=1e-12)


def test_outward_drift_without_noise_exits_at_travel_time():
    dt = 1e-3
    cfg = SdeConfig(
        potential=INVERTED, eta=0.1, dt=dt, T=1.0, x0=np.array([0.5]), diffusion=0.0
    )
    recs = hitting_time_mc(cfg, UNIT, n_paths=4, horizon=10.0, seed=1, experiment="exit-min")
    for rec in recs:
        assert abs(rec.exit_time - math.log(2.0)) <= 2 * dt


def test_mean_exit_uniform_over_interior_starts():
    """eta * log E[T] is flat across starts within half the domain radius."""
    eta = 1.0 / 20.0
    values = [
        eta * log_mean_exit_bvp_1d(WELL, eta, (-1.0, 1.0), x)
        for x in (-0.5, -0.25, 0.0, 0.25, 0.5)
    ]
    lo, hi = min(values), max(values)
    assert (hi - lo) <= 0.5 * (0.5 * (hi + lo))


def test_mean_exit_decreases_with_step_size():
    means = [mean_exit_bvp_1d(WELL, eta, (-1.0, 1.0), 0.0) for eta in (0.1, 0.2, 0.3, 0.5)]
    assert all(a > b for a, b in zip(means, means[1:]))


def test_log_exit_scaling_constants():
    # halving the domain scales the barrier constant from 1 to 1/4
    eta = 1.0 / 40.0
    half = eta * log_mean_exit_bvp_1d(WELL, eta, (-0.5, 0.5), 0.0)
    assert half == pytest.approx(0.25, rel=0.15)
    # doubling sigma divides the constant by 4
    sig2 = eta * log_mean_exit_bvp_1d(WELL, 4.0 * eta, (-1.0, 1.0), 0.0)
    assert sig2 == pytest.approx(0.25, rel=0.15)
    # ball of radius 0.8 around the right-hand minimum of the double well
    ball = eta * log_mean_exit_bvp_1d(DOUBLE_WELL, eta, (0.2, 1.8), 1.0)
    assert ball == pytest.approx(0.4608, rel=0.15)


def test_kramers_predictor_reference_value():
    x_star = np.array([1.0])
    pred = kramers_predictor(DOUBLE_WELL, 0.1, x_star=x_star)
    assert pred == pytest.approx(659.3822923750206, rel=1e-9)
    # exponent law: d log tau / d (1/eta) equals twice the barrier height
    pred2 = kramers_predictor(DOUBLE_WELL, 0.05, x_star=x_star)
    slope = (math.log(pred2) - math.log(pred)) / (1 / 0.05 - 1 / 0.1)
    assert slope == pytest.approx(0.5, abs=1e-12)


def test_flow_travel_times():
    assert flow_exit_time(INVERTED, np.array([0.5]), UNIT) == pytest.approx(
        math.log(2.0), abs=1e-6
    )
    # starting at an unstable stationary point: the flow never leaves
    assert flow_exit_time(INVERTED, np.array([0.0]), UNIT) is None
    # a well interior to the domain: the flow converges without exiting
    assert flow_exit_time(WELL, np.array([0.5]), UNIT) is None


def test_minimizer_fit_transform_window():
    rep = minimizer_scaling_fit(
        WELL, 1.0, UNIT, eta_list=[1 / 4, 1 / 6, 1 / 8, 1 / 10], source="bvp_1d"
    )
    values = [e.transform_value for e in rep.entries]
    assert all(0.75 <= v <= 1.0 for v in values)
    assert all(a < b for a, b in zip(values, values[1:]))
    assert rep.reference_constant == pytest.approx(1.0)
    assert rep.fitted_constant == pytest.approx(values[-1])


def test_saddle_fit_step_count_bound():
    dom = Domain.interval(-1.0, 1.0)
    rep = saddle_scaling_fit(
        INVERTED, 1.0, dom, np.array([0.0]), eta_list=[1e-2, 1e-3, 1e-4], source="bvp_1d"
    )
    assert rep.reference_constant == pytest.approx(0.5)
    bounds = rep.extra["steps_bound"]
    assert bounds[-1] <= 1.3  # N * 2*gamma*eta / log(1/eta) at the smallest eta


def test_exit_time_stats_handles_censoring():
    recs = [
        ExitRecord(0, 1.0, 10.0, np.array([1.0]), False),
        ExitRecord(1, 3.0, 30.0, np.array([-1.0]), False),
        ExitRecord(2, 50.0, 500.0, np.array([0.2]), True),
    ]
    st = exit_time_stats(recs)
    assert st.mean == pytest.approx(2.0)
    assert st.censor_frac == pytest.approx(1.0 / 3.0)
    assert st.n_used == 2


def test_hitting_mc_path_subsets_match_full_run():
    cfg = SdeConfig(potential=WELL, eta=0.25, dt=1e-3, T=1.0, x0=np.array([0.0]))
    dom = Domain.interval(-0.5, 0.5)
    full = hitting_time_mc(cfg, dom, n_paths=32, horizon=100.0, seed=5, experiment="exit-min")
    part = hitting_time_mc(
        cfg, dom, n_paths=32, horizon=100.0, seed=5, experiment="exit-min",
        path_indices=range(8, 16),
    )
    for rec_full, rec_part in zip(full[8:16], part):
        assert rec_full.path_index == rec_part.path_index
        assert rec_full.exit_time == rec_part.exit_time
        np.testing.assert_array_equal(rec_full.exit_point, rec_part.exit_point)
