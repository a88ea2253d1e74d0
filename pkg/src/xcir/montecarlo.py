"""Simulation oracles for the square-root rate model.

Euler schemes under the risk-neutral and expiry-forward measures, pathwise
bond and option estimators, the squared Ornstein-Uhlenbeck construction of
the rate law (components redistributed at reset times), and the stochastic
volatility variants. Everything is seeded and bit-reproducible for a fixed
configuration: draws come from a counter-based Philox stream keyed by the
seed, consumed step-major.

There is no strong-convergence theory for Euler on square-root diffusions,
so every consumer treats these as statistical oracles: agreement is always
judged against reported standard errors, never pathwise.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .bondpricing import solve_riccati
from .errors import ResourceLimitError
from .optionpricer import OptionSpec, forward_drift
from .stochvol import CorrelatedWvModel, IndependentVolModel
from .termstructure import ExtendedCirParams, ParameterCurve, dimension, validate_assumption1

__all__ = [
    "SimConfig",
    "PathSet",
    "ConstructiveConfig",
    "simulate_cir",
    "simulate_forward_measure",
    "mc_bond_price",
    "mc_option_price",
    "simulate_constructive",
    "simulate_stochvol_independent",
    "simulate_correlated_wv",
]

FULL_TRUNCATION = "euler_full_truncation"
REFLECTION = "euler_reflection"


@dataclass(frozen=True)
class SimConfig:
    """Euler simulation controls.

    ``store_stride`` thins the stored grid (1 keeps every step; the first
    and last points are always kept), which is what makes million-path runs
    affordable: estimators integrate at full resolution while the returned
    ``PathSet`` only materializes the thinned grid.
    """

    n_paths: int
    dt: float
    seed: int = 0
    scheme: str = FULL_TRUNCATION
    store_stride: int = 1

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.scheme not in (FULL_TRUNCATION, REFLECTION):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.store_stride < 1:
            raise ValueError("store_stride must be >= 1")


@dataclass(frozen=True)
class PathSet:
    """Simulated paths on a stored time grid; values are nonnegative rates."""

    times: np.ndarray
    values: np.ndarray
    measure_tag: str
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times.setflags(write=False)
        self.values.setflags(write=False)

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]

    @property
    def terminal(self) -> np.ndarray:
        return self.values[:, -1]

    def to_csv(self, path) -> None:
        """Columnar dump (time, path_id, value) for external analysis."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["time", "path_id", "value"])
            for j, t in enumerate(self.times):
                for i in range(self.n_paths):
                    writer.writerow([f"{t:.12g}", i, f"{self.values[i, j]:.12g}"])


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def _time_grid(t_end: float, dt: float) -> np.ndarray:
    n_steps = max(1, int(round(t_end / dt)))
    return np.linspace(0.0, t_end, n_steps + 1)


def _stored_indices(n_steps: int, stride: int) -> np.ndarray:
    idx = np.arange(0, n_steps + 1, stride)
    if idx[-1] != n_steps:
        idx = np.append(idx, n_steps)
    return idx


def _euler_rate_paths(
    drift_curve: ParameterCurve,
    theta_curve: ParameterCurve,
    sigma_at,
    r0: float,
    t_end: float,
    cfg: SimConfig,
    rng: np.random.Generator,
    want_integral: bool = False,
    measure_tag: str = "risk_neutral",
) -> tuple[PathSet, np.ndarray | None]:
    """Shared Euler engine.

    ``sigma_at(k, t_k)`` returns the diffusion coefficient for step k, either
    a scalar (deterministic volatility) or a per-path vector (stochastic
    volatility callers). Full truncation feeds the positive part of the
    state into both drift and diffusion and stores positive parts; the
    reflection scheme keeps the state nonnegative by mirroring.
    """
    grid = _time_grid(t_end, cfg.dt)
    n_steps = grid.size - 1
    h = grid[1] - grid[0]
    sqrt_h = math.sqrt(h)
    b_vals = drift_curve(grid[:-1])
    th_vals = theta_curve(grid[:-1])

    stored_idx = _stored_indices(n_steps, cfg.store_stride)
    stored_pos = {int(k): j for j, k in enumerate(stored_idx)}
    stored = np.empty((cfg.n_paths, stored_idx.size))

    x = np.full(cfg.n_paths, r0)
    integral = np.zeros(cfg.n_paths) if want_integral else None
    if 0 in stored_pos:
        stored[:, 0] = r0

    reflect = cfg.scheme == REFLECTION
    for k in range(n_steps):
        z = rng.standard_normal(cfg.n_paths)
        sig = sigma_at(k, grid[k])
        if reflect:
            x_prev = x
            x = np.abs(x + (-b_vals[k] * x + th_vals[k]) * h + sig * np.sqrt(x) * sqrt_h * z)
        else:
            pos = np.maximum(x, 0.0)
            x_prev = pos
            x = x + (-b_vals[k] * pos + th_vals[k]) * h + sig * np.sqrt(pos) * sqrt_h * z
        rate = x if reflect else np.maximum(x, 0.0)
        if want_integral:
            integral += 0.5 * h * (x_prev + rate)
        j = stored_pos.get(k + 1)
        if j is not None:
            stored[:, j] = rate

    paths = PathSet(times=grid[stored_idx], values=stored, measure_tag=measure_tag)
    return paths, integral


def simulate_cir(params: ExtendedCirParams, t_end: float, cfg: SimConfig) -> PathSet:
    """Euler paths of the rate under the risk-neutral drift."""
    if not 0.0 < t_end <= params.horizon:
        raise ValueError(f"t_end={t_end} outside (0, {params.horizon}]")
    rng = _rng(cfg.seed)
    grid = _time_grid(t_end, cfg.dt)
    sig_vals = params.sigma(grid[:-1])
    paths, _ = _euler_rate_paths(
        params.b, params.theta, lambda k, t: sig_vals[k], params.r0, t_end, cfg, rng
    )
    return paths


def simulate_forward_measure(
    params: ExtendedCirParams, spec: OptionSpec, cfg: SimConfig
) -> PathSet:
    """Euler paths under the expiry-forward measure (tilted drift)."""
    sol_t = solve_riccati(params, spec.expiry)
    fwd = forward_drift(params, spec, sol_t)
    rng = _rng(cfg.seed)
    grid = _time_grid(spec.expiry, cfg.dt)
    sig_vals = params.sigma(grid[:-1])
    paths, _ = _euler_rate_paths(
        fwd,
        params.theta,
        lambda k, t: sig_vals[k],
        params.r0,
        spec.expiry,
        cfg,
        rng,
        measure_tag=f"forward({spec.expiry:g})",
    )
    return paths


def mc_bond_price(params: ExtendedCirParams, T: float, cfg: SimConfig) -> tuple[float, float]:
    """(price, standard error) of E[exp(-int_0^T r)] by pathwise trapezoid."""
    if not 0.0 < T <= params.horizon:
        raise ValueError(f"T={T} outside (0, {params.horizon}]")
    rng = _rng(cfg.seed)
    grid = _time_grid(T, cfg.dt)
    sig_vals = params.sigma(grid[:-1])
    slim = SimConfig(cfg.n_paths, cfg.dt, cfg.seed, cfg.scheme, store_stride=10**9)
    _, integral = _euler_rate_paths(
        params.b, params.theta, lambda k, t: sig_vals[k], params.r0, T, slim, rng,
        want_integral=True,
    )
    disc = np.exp(-integral)
    price = float(np.mean(disc))
    se = float(np.std(disc, ddof=1) / math.sqrt(cfg.n_paths))
    return price, se


def mc_option_price(
    params: ExtendedCirParams, spec: OptionSpec, cfg: SimConfig
) -> tuple[float, float]:
    """(price, standard error) of the discounted bond-call payoff."""
    sol_T = solve_riccati(params, spec.bond_maturity)
    c_tt = float(sol_T.c(spec.expiry))
    a_tt = float(sol_T.a(spec.expiry))
    if spec.strike >= math.exp(a_tt):
        return 0.0, 0.0
    rng = _rng(cfg.seed)
    grid = _time_grid(spec.expiry, cfg.dt)
    sig_vals = params.sigma(grid[:-1])
    slim = SimConfig(cfg.n_paths, cfg.dt, cfg.seed, cfg.scheme, store_stride=10**9)
    paths, integral = _euler_rate_paths(
        params.b, params.theta, lambda k, t: sig_vals[k], params.r0, spec.expiry,
        slim, rng, want_integral=True,
    )
    payoff = np.maximum(np.exp(-c_tt * paths.terminal + a_tt) - spec.strike, 0.0)
    sample = np.exp(-integral) * payoff
    price = float(np.mean(sample))
    se = float(np.std(sample, ddof=1) / math.sqrt(cfg.n_paths))
    return price, se


# -- squared Ornstein-Uhlenbeck construction ---------------------------------


@dataclass(frozen=True)
class ConstructiveConfig:
    """Controls for the component/reset representation of the rate law.

    ``n`` is the dimension resolution: the degrees-of-freedom curve is
    discretized to floor(n d(t)) / n, so the staircase error vanishes as n
    grows. ``reset_count`` (M) is the number of redistribution times; 0
    picks 32 n max(1, Q) with Q the counted extrema of d. ``component_cap``
    guards against absurd component counts from extreme d curves.
    """

    n: int
    reset_count: int = 0
    n_samples: int = 10_000
    seed: int = 0
    component_cap: int = 256

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.reset_count < 0:
            raise ValueError("reset_count must be >= 0 (0 = auto)")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")


def _dim_staircase(params: ExtendedCirParams, times: np.ndarray, n: int) -> np.ndarray:
    d = dimension(params, times)
    return np.floor(n * np.asarray(d) + 1e-9) / n


def simulate_constructive(
    params: ExtendedCirParams, t_target: float, cc: ConstructiveConfig
) -> np.ndarray:
    """Samples of r(t_target) from the squared-component construction.

    Each sample carries ceil(max d_n) Gaussian components started at
    sqrt(r0 / d_n(0)); between reset times every component follows the
    Ornstein-Uhlenbeck dynamics dx = -(1/2) b x ds + (1/2) sigma dW with its
    exact Gaussian transition. At each reset the quadratic functional

        Z = sum_{i <= floor(d_n)} x_i^2 + frac(d_n) x_{floor(d_n)+1}^2

    is redistributed equally over all components, which keeps the boundary
    component synchronized as d_n moves. Z at the final time is returned.
    For constant integer dimension the construction is exact (the classic
    sum-of-squares representation); otherwise its law converges to the
    closed-form transform as n grows with M tied to n.
    """
    if not 0.0 < t_target <= params.horizon:
        raise ValueError(f"t_target={t_target} outside (0, {params.horizon}]")
    n = cc.n
    M = cc.reset_count
    if M == 0:
        q = validate_assumption1(params, 2048).q_optima
        M = 32 * n * max(1, q)
    grid = np.linspace(0.0, t_target, M + 1)
    d_disc = _dim_staircase(params, grid, n)
    if np.any(d_disc <= 0):
        raise ValueError("dimension staircase hit zero; increase n")
    n_comp = int(np.floor(np.max(d_disc))) + 1
    if n_comp > cc.component_cap:
        raise ResourceLimitError(
            f"{n_comp} components exceed the cap {cc.component_cap}"
        )

    # Per-interval exact OU transition: mean factor e^{-(1/2) int b}, variance
    # (1/4) int_s^t e^{-int_u^t b} sigma^2 du, both from exact/dense tables.
    b_cum = params.b.cumulative(grid)
    fine = np.linspace(0.0, t_target, 4097)
    g_anti = CubicSpline(
        fine, np.exp(params.b.cumulative(fine)) * params.sigma(fine) ** 2
    ).antiderivative()
    g_at = g_anti(grid)

    decay_half = np.exp(-0.5 * np.diff(b_cum))
    e_right = np.exp(b_cum[1:])
    step_var = (g_at[1:] - g_at[:-1]) / (4.0 * e_right)
    step_sd = np.sqrt(np.maximum(step_var, 0.0))

    rng = _rng(cc.seed)
    x = np.full((cc.n_samples, n_comp), math.sqrt(params.r0 / d_disc[0]))
    z_vals = np.empty(cc.n_samples)
    for m in range(M):
        x = x * decay_half[m] + step_sd[m] * rng.standard_normal(x.shape)
        d_here = d_disc[m + 1]
        k_full = int(d_here)
        frac = d_here - k_full
        z_vals = np.sum(x[:, :k_full] ** 2, axis=1)
        if frac > 0.0:
            z_vals = z_vals + frac * x[:, k_full] ** 2
        if m + 1 < M:
            np.copyto(x, np.sqrt(z_vals / d_here)[:, None])
    return z_vals


# -- stochastic volatility -----------------------------------------------------


def simulate_stochvol_independent(
    model: IndependentVolModel, t_end: float, cfg: SimConfig
) -> tuple[PathSet, PathSet]:
    """Rate and volatility paths with independent driving noises.

    The variance path v feeds the rate diffusion as sigma = sqrt(v),
    pathwise. v is clamped to (floor, cap); if more than 1% of the steps
    clamp, a warning is issued and recorded in the diagnostics.
    """
    if not 0.0 < t_end <= model.horizon:
        raise ValueError(f"t_end={t_end} outside (0, {model.horizon}]")
    grid = _time_grid(t_end, cfg.dt)
    n_steps = grid.size - 1
    h = grid[1] - grid[0]
    sqrt_h = math.sqrt(h)
    rng = _rng(cfg.seed)
    vol = model.vol

    b_vals = model.b(grid[:-1])
    th_vals = model.theta(grid[:-1])

    stored_idx = _stored_indices(n_steps, cfg.store_stride)
    stored_pos = {int(k): j for j, k in enumerate(stored_idx)}
    r_store = np.empty((cfg.n_paths, stored_idx.size))
    v_store = np.empty((cfg.n_paths, stored_idx.size))

    x = np.full(cfg.n_paths, model.r0)
    v = np.full(cfg.n_paths, vol.v0)
    if 0 in stored_pos:
        r_store[:, 0] = model.r0
        v_store[:, 0] = vol.v0

    clamped = 0
    reflect = cfg.scheme == REFLECTION
    for k in range(n_steps):
        z_r = rng.standard_normal(cfg.n_paths)
        z_v = rng.standard_normal(cfg.n_paths)
        sig = np.sqrt(v)
        if reflect:
            x = np.abs(x + (-b_vals[k] * x + th_vals[k]) * h + sig * np.sqrt(x) * sqrt_h * z_r)
            rate = x
        else:
            pos = np.maximum(x, 0.0)
            x = x + (-b_vals[k] * pos + th_vals[k]) * h + sig * np.sqrt(pos) * sqrt_h * z_r
            rate = np.maximum(x, 0.0)
        v_new = v + vol.mu(v, grid[k]) * h + vol.xi(v, grid[k]) * sqrt_h * z_v
        lo, hi = vol.floor, vol.cap
        out_of_band = (v_new < lo) | (v_new > hi)
        clamped += int(np.count_nonzero(out_of_band))
        v = np.clip(v_new, lo, hi)
        j = stored_pos.get(k + 1)
        if j is not None:
            r_store[:, j] = rate
            v_store[:, j] = v

    clamp_fraction = clamped / (n_steps * cfg.n_paths)
    diagnostics = {"clamp_fraction": clamp_fraction}
    if clamp_fraction > 0.01:
        warnings.warn(
            f"volatility clamped on {100 * clamp_fraction:.2f}% of steps", stacklevel=2
        )
    times = grid[stored_idx]
    return (
        PathSet(times=times, values=r_store, measure_tag="risk_neutral", diagnostics=diagnostics),
        PathSet(times=times, values=v_store, measure_tag="risk_neutral", diagnostics=diagnostics),
    )


def simulate_correlated_wv(
    model: CorrelatedWvModel, t_end: float, cfg: SimConfig
) -> tuple[PathSet, PathSet]:
    """Rate r = w + v where v is the variance factor of w's diffusion.

    The drivers are independent, yet r(t) and v(t) are positively
    correlated by construction. Returns (rate paths, variance paths).
    """
    if not 0.0 < t_end <= model.horizon:
        raise ValueError(f"t_end={t_end} outside (0, {model.horizon}]")
    grid = _time_grid(t_end, cfg.dt)
    n_steps = grid.size - 1
    h = grid[1] - grid[0]
    sqrt_h = math.sqrt(h)
    rng = _rng(cfg.seed)

    b_vals = model.b(grid[:-1])
    thw_vals = model.theta_w(grid[:-1])
    thv_vals = model.theta_v(grid[:-1])

    stored_idx = _stored_indices(n_steps, cfg.store_stride)
    stored_pos = {int(k): j for j, k in enumerate(stored_idx)}
    r_store = np.empty((cfg.n_paths, stored_idx.size))
    v_store = np.empty((cfg.n_paths, stored_idx.size))

    w = np.full(cfg.n_paths, model.w0)
    v = np.full(cfg.n_paths, model.v0)
    if 0 in stored_pos:
        r_store[:, 0] = model.w0 + model.v0
        v_store[:, 0] = model.v0

    for k in range(n_steps):
        z_w = rng.standard_normal(cfg.n_paths)
        z_v = rng.standard_normal(cfg.n_paths)
        w_pos = np.maximum(w, 0.0)
        v_pos = np.maximum(v, 0.0)
        w = w + (-b_vals[k] * w_pos + thw_vals[k]) * h + np.sqrt(v_pos * w_pos) * sqrt_h * z_w
        v = v + (-b_vals[k] * v_pos + thv_vals[k]) * h + model.xi * v_pos * sqrt_h * z_v
        j = stored_pos.get(k + 1)
        if j is not None:
            r_store[:, j] = np.maximum(w, 0.0) + np.maximum(v, 0.0)
            v_store[:, j] = np.maximum(v, 0.0)

    times = grid[stored_idx]
    return (
        PathSet(times=times, values=r_store, measure_tag="risk_neutral"),
        PathSet(times=times, values=v_store, measure_tag="risk_neutral"),
    )
