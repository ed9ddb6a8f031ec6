"""Continuous-time companions of the SGD chain.

This module integrates the diffusion approximations

    dX = b(X) ds + sqrt(eta) * S(X) dB,

with first-order drift b = -grad F or second-order drift
b = -grad F - (eta/4) grad |grad F|^2, the noiseless gradient flow
dY = -grad F(Y) ds, and the Lyapunov equation governing the covariance of
the rescaled fluctuations zeta = (x_sgd - Y) / sqrt(eta),

    dC/ds = M C + C M^T + S S^T,   M(s) = -hessian F(Y(s)).

An Ornstein-Uhlenbeck transition kernel is provided in closed form so that
linear benchmarks can be sampled without discretization error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from . import streams
from .errors import NumericalError
from .oracles import GradientOracle
from .potentials import PotentialSpec
from .sgd import EnsembleResult, SgdConfig, Trajectory, run_sgd_ensemble

FIRST_ORDER = "first"
SECOND_ORDER = "second"

Diffusion = Union[float, np.ndarray, Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class SdeConfig:
    """Configuration of one diffusion integration.

    ``diffusion`` is S(x): a scalar (isotropic S = sigma I), a constant
    matrix, or a map x -> matrix.  ``noise_schedule`` optionally replaces
    the constant noise amplitude sqrt(eta) by a function of time, which is
    how the log-cooling schedule sqrt(gamma / log(2 + s)) is expressed.
    """

    potential: PotentialSpec
    eta: float
    dt: float
    T: float
    x0: np.ndarray
    diffusion: Diffusion = 1.0
    drift_order: str = FIRST_ORDER
    seed: int = 0
    noise_schedule: Optional[Callable[[float], float]] = None

    def __post_init__(self):
        x0 = np.atleast_1d(np.asarray(self.x0, dtype=float))
        x0.setflags(write=False)
        object.__setattr__(self, "x0", x0)
        if self.eta <= 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if not (0 < self.dt <= self.T):
            raise ValueError(f"need 0 < dt <= T, got dt={self.dt}, T={self.T}")
        if self.drift_order not in (FIRST_ORDER, SECOND_ORDER):
            raise ValueError(f"unknown drift order {self.drift_order!r}")
        if x0.shape != (self.potential.dim,):
            raise ValueError(
                f"x0 shape {x0.shape} does not match dim {self.potential.dim}"
            )

    def drift(self, x: np.ndarray) -> np.ndarray:
        """Drift field, vectorized over a leading batch axis."""
        g = np.asarray(self.potential.gradient(x), dtype=float)
        if self.drift_order == FIRST_ORDER:
            return -g
        h = np.asarray(self.potential.hessian(x), dtype=float)
        correction = np.einsum("...ij,...j->...i", h, g)
        return -g - 0.5 * self.eta * correction

    def amplitude(self, s: float) -> float:
        """Noise amplitude multiplying S(x) dB at time s."""
        if self.noise_schedule is not None:
            return float(self.noise_schedule(s))
        return math.sqrt(self.eta)


def apply_diffusion(diffusion: Diffusion, x: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """S(x) xi for batched states x (n, d) and draws xi (n, d)."""
    if callable(diffusion):
        x2 = np.atleast_2d(x)
        xi2 = np.atleast_2d(xi)
        out = np.stack(
            [np.asarray(diffusion(xr), dtype=float) @ xir for xr, xir in zip(x2, xi2)]
        )
        return out.reshape(np.shape(xi))
    if np.ndim(diffusion) == 0:
        return float(diffusion) * xi
    s = np.asarray(diffusion, dtype=float)
    return xi @ s.T


def _time_grid(T: float, dt: float) -> int:
    return int(math.ceil(T / dt - 1e-12))


def euler_maruyama(cfg: SdeConfig, rng: np.random.Generator | None = None) -> Trajectory:
    """Integrate one path on a uniform grid (final step shortened to hit T)."""
    if rng is None:
        rng = streams.generator(cfg.seed)
    n_steps = _time_grid(cfg.T, cfg.dt)
    d = cfg.potential.dim
    x = cfg.x0.copy()
    times = np.minimum(np.arange(n_steps + 1) * cfg.dt, cfg.T)
    states = np.empty((n_steps + 1, d))
    states[0] = x
    for k in range(n_steps):
        h = times[k + 1] - times[k]
        xi = rng.standard_normal(d)
        x = (
            x
            + cfg.drift(x) * h
            + cfg.amplitude(times[k]) * math.sqrt(h) * apply_diffusion(cfg.diffusion, x, xi)
        )
        if not np.all(np.isfinite(x)):
            raise NumericalError(f"non-finite state at step {k + 1}", step=k + 1)
        states[k + 1] = x
    return Trajectory(
        times=times,
        states=states,
        meta={"dt": cfg.dt, "seed": cfg.seed, "steps": np.arange(n_steps + 1)},
    )


def em_endpoints(
    cfg: SdeConfig,
    n_paths: int,
    experiment: str = "sde-ensemble",
    path_indices: range | None = None,
) -> np.ndarray:
    """Endpoint states X(T) of many paths with private per-path streams."""
    indices = path_indices if path_indices is not None else range(n_paths)
    gens = streams.path_streams(cfg.seed, experiment, indices)
    n = len(gens)
    d = cfg.potential.dim
    n_steps = _time_grid(cfg.T, cfg.dt)
    noise = np.empty((n, n_steps, d))
    for i, gen in enumerate(gens):
        noise[i] = gen.standard_normal((n_steps, d))
    times = np.minimum(np.arange(n_steps + 1) * cfg.dt, cfg.T)
    x = np.tile(cfg.x0, (n, 1))
    for k in range(n_steps):
        h = times[k + 1] - times[k]
        x = (
            x
            + cfg.drift(x) * h
            + cfg.amplitude(times[k]) * math.sqrt(h) * apply_diffusion(cfg.diffusion, x, noise[:, k])
        )
        if not np.all(np.isfinite(x)):
            raise NumericalError(f"non-finite state at step {k + 1}", step=k + 1)
    return x


# ---------------------------------------------------------------------------
# Ornstein-Uhlenbeck closed forms: dX = -lam X ds + sqrt(eta_sigma2) dB.
# ---------------------------------------------------------------------------


def ou_moments(lam: float, eta_sigma2: float, x0: float, t: float) -> tuple[float, float]:
    """Exact mean and variance of the OU process at time t."""
    if lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    mean = x0 * math.exp(-lam * t)
    var = eta_sigma2 / (2.0 * lam) * (1.0 - math.exp(-2.0 * lam * t))
    return mean, var


def ou_exact_step(
    lam: float, eta_sigma2: float, x: float, dt: float, rng: np.random.Generator
) -> float:
    """Sample the exact OU transition kernel over a step of length dt."""
    mean, var = ou_moments(lam, eta_sigma2, float(x), dt)
    if var == 0.0:
        return mean
    return mean + math.sqrt(var) * rng.standard_normal()


def ou_endpoints(
    rates: np.ndarray,
    eta_sigma2: float,
    x0: np.ndarray,
    T: float,
    n_paths: int,
    seed: int,
    experiment: str = "ou-ensemble",
    path_indices: range | None = None,
) -> np.ndarray:
    """Exact endpoint samples of a diagonal OU system (one rate per axis)."""
    rates = np.atleast_1d(np.asarray(rates, dtype=float))
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    moments = [ou_moments(r, eta_sigma2, x, T) for r, x in zip(rates, x0)]
    mean = np.array([m for m, _ in moments])
    std = np.sqrt([v for _, v in moments])
    indices = path_indices if path_indices is not None else range(n_paths)
    gens = streams.path_streams(seed, experiment, indices)
    out = np.empty((len(gens), rates.size))
    for i, gen in enumerate(gens):
        out[i] = mean + std * gen.standard_normal(rates.size)
    return out


# ---------------------------------------------------------------------------
# Noiseless gradient flow (classical fourth-order Runge-Kutta).
# ---------------------------------------------------------------------------


def _rk4_step(f: Callable[[np.ndarray], np.ndarray], y: np.ndarray, h: float) -> np.ndarray:
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def gradient_flow(
    potential: PotentialSpec, x0, T: float, dt: float, store_every: int = 1
) -> Trajectory:
    """Integrate dY/ds = -grad F(Y) with RK4 on a uniform grid."""
    if not (0 < dt <= T):
        raise ValueError(f"need 0 < dt <= T, got dt={dt}, T={T}")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    f = lambda y: -np.asarray(potential.gradient(y), dtype=float)
    n_steps = _time_grid(T, dt)
    times_all = np.minimum(np.arange(n_steps + 1) * dt, T)
    y = x0.copy()
    times = [0.0]
    states = [y.copy()]
    stored = [0]
    for k in range(n_steps):
        y = _rk4_step(f, y, times_all[k + 1] - times_all[k])
        if not np.all(np.isfinite(y)):
            raise NumericalError(f"non-finite flow state at step {k + 1}", step=k + 1)
        if (k + 1) % store_every == 0 or (k + 1) == n_steps:
            times.append(times_all[k + 1])
            states.append(y.copy())
            stored.append(k + 1)
    return Trajectory(
        times=np.array(times), states=np.vstack(states), meta={"steps": np.array(stored)}
    )


def flow_knots(
    potential: PotentialSpec, x0, eta: float, n_knots: int, substeps: int = 10
) -> np.ndarray:
    """Gradient-flow states at the SGD knot times 0, eta, ..., n_knots*eta."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    f = lambda y: -np.asarray(potential.gradient(y), dtype=float)
    h = eta / substeps
    out = np.empty((n_knots + 1, x0.size))
    out[0] = x0
    y = x0.copy()
    for k in range(n_knots):
        for _ in range(substeps):
            y = _rk4_step(f, y, h)
        out[k + 1] = y
    return out


# ---------------------------------------------------------------------------
# Normal deviations: Lyapunov covariance and its empirical counterpart.
# ---------------------------------------------------------------------------


def deviation_covariance(
    potential: PotentialSpec,
    x0,
    t_grid,
    diffusion: Diffusion,
    dt: float = 1e-3,
) -> np.ndarray:
    """Covariance C(t) of the rescaled SGD fluctuations around the flow.

    Solves the joint system dY = -grad F(Y), dC = M C + C M^T + S S^T with
    M = -hessian F(Y) and C(0) = 0, returning C at each requested time.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if np.any(t_grid < 0) or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be non-negative and strictly increasing")
    d = x0.size

    def s_matrix(y: np.ndarray) -> np.ndarray:
        if callable(diffusion):
            return np.asarray(diffusion(y), dtype=float)
        if np.ndim(diffusion) == 0:
            return float(diffusion) * np.eye(d)
        return np.asarray(diffusion, dtype=float)

    def rhs(state: np.ndarray) -> np.ndarray:
        y, c = state[:d], state[d:].reshape(d, d)
        g = np.asarray(potential.gradient(y), dtype=float)
        m = -np.asarray(potential.hessian(y), dtype=float)
        s = s_matrix(y)
        dc = m @ c + c @ m.T + s @ s.T
        return np.concatenate([-g, dc.ravel()])

    state = np.concatenate([x0, np.zeros(d * d)])
    out = np.empty((t_grid.size, d, d))
    t = 0.0
    for j, target in enumerate(t_grid):
        span = target - t
        if span > 0:
            n = int(math.ceil(span / dt - 1e-12))
            h = span / n
            for _ in range(n):
                state = _rk4_step(rhs, state, h)
        t = target
        out[j] = state[d:].reshape(d, d)
    return out


@dataclass(frozen=True)
class DeviationReport:
    """Empirical law of (x_sgd(T) - Y(T)) / sqrt(eta) against its Gaussian limit."""

    t: float
    eta: float
    n_paths: int
    empirical_mean: np.ndarray
    empirical_cov: np.ndarray
    lyapunov_cov: np.ndarray
    rel_frobenius_err: float


def deviation_empirical(
    potential: PotentialSpec,
    oracle: GradientOracle,
    eta: float,
    T: float,
    x0,
    n_paths: int,
    seed: int = 0,
    experiment: str = "deviation",
    path_indices: range | None = None,
    endpoints_fn: Callable[[SgdConfig, int, str], np.ndarray] | None = None,
) -> DeviationReport:
    """Monte Carlo check of the normal-deviation covariance at time T.

    ``endpoints_fn(cfg, n_paths, label) -> (n, d) endpoints`` may replace the
    in-process ensemble, e.g. with a worker-pool version; per-path streams
    keep the result identical either way.
    """
    k = int(round(T / eta))
    if abs(k * eta - T) > 1e-9 * max(1.0, T):
        raise ValueError(f"T={T} is not a multiple of eta={eta}")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    cfg = SgdConfig(eta=eta, steps=k, x0=x0, oracle=oracle, seed=seed)
    if endpoints_fn is not None:
        endpoints = endpoints_fn(cfg, n_paths, experiment)
    else:
        endpoints = run_sgd_ensemble(
            cfg, n_paths, experiment=experiment, path_indices=path_indices
        ).endpoints
    y_final = flow_knots(potential, x0, eta, k)[-1]
    zeta = (endpoints - y_final) / math.sqrt(eta)
    emp_mean = zeta.mean(axis=0)
    emp_cov = np.atleast_2d(np.cov(zeta.T, ddof=1))
    if callable(getattr(oracle, "covariance", None)):
        diffusion: Diffusion = lambda y: oracle.diffusion_at(y)
    else:
        diffusion = oracle.diffusion_at(x0)
    lyap = deviation_covariance(potential, x0, [T], diffusion)[-1]
    rel = float(np.linalg.norm(emp_cov - lyap) / max(np.linalg.norm(lyap), 1e-300))
    return DeviationReport(
        t=T,
        eta=eta,
        n_paths=zeta.shape[0],
        empirical_mean=emp_mean,
        empirical_cov=emp_cov,
        lyapunov_cov=lyap,
        rel_frobenius_err=rel,
    )


def flow_sup_gap(
    potential: PotentialSpec,
    oracle: GradientOracle,
    eta: float,
    T: float,
    x0,
    n_paths: int,
    seed: int = 0,
    experiment: str = "ode-limit",
    path_indices: range | None = None,
    gaps_fn: Callable[[SgdConfig, np.ndarray, int, str], np.ndarray] | None = None,
) -> tuple[float, float]:
    """Mean and standard error of max_k ||x_k - Y(eta k)|| over an ensemble.

    ``gaps_fn(cfg, reference, n_paths, label) -> (n,) sup gaps`` may replace
    the in-process ensemble, e.g. with a worker-pool version.
    """
    k = int(round(T / eta))
    if abs(k * eta - T) > 1e-9 * max(1.0, T):
        raise ValueError(f"T={T} is not a multiple of eta={eta}")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    reference = flow_knots(potential, x0, eta, k)
    cfg = SgdConfig(eta=eta, steps=k, x0=x0, oracle=oracle, seed=seed)
    if gaps_fn is not None:
        gaps = gaps_fn(cfg, reference, n_paths, experiment)
    else:
        gaps = run_sgd_ensemble(
            cfg,
            n_paths,
            experiment=experiment,
            path_indices=path_indices,
            reference_states=reference,
        ).sup_gaps
    return float(gaps.mean()), float(gaps.std(ddof=1) / math.sqrt(gaps.size))
