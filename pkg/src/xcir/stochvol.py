"""Conditional transforms of the rate under stochastic volatility.

When the rate diffusion coefficient is sqrt(v(t)) for an independent
variance process v, the closed-form transform of r(t) still applies along
each frozen variance path; averaging the pathwise transforms over simulated
variance paths gives the unconditional one (tower property). The same idea
conditions on terminal variance in the correlated model r = w + v, where
the w-transform is frozen pathwise and the v contribution enters as a
deterministic shift.

All pathwise quantities are discrete quadratures on the stored simulation
grid: with E(s) = exp(int_0^s b),

    S_j(s, t) = ( int_s^t E(u) v_j(u) du ) / (4 E(t)),

accumulated by one cumulative trapezoid pass per path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable

import numpy as np

from .termstructure import ParameterCurve

if TYPE_CHECKING:  # pragma: no cover
    from .montecarlo import PathSet

__all__ = [
    "VolDynamics",
    "IndependentVolModel",
    "CorrelatedWvModel",
    "conditional_cf_independent",
    "conditional_laplace_taylor",
    "conditional_cf_correlated",
    "terminal_vol_bins",
]


@dataclass(frozen=True)
class VolDynamics:
    """Variance process coefficients: dv = mu(v,t) dt + xi(v,t) dW.

    The user asserts the coefficients keep v inside (floor, cap); the
    simulator clamps excursions and counts them.
    """

    mu: Callable
    xi: Callable
    v0: float
    cap: float
    floor: float = 1e-12

    def __post_init__(self):
        if not self.floor < self.v0 < self.cap:
            raise ValueError(f"v0={self.v0} outside ({self.floor}, {self.cap})")


@dataclass(frozen=True)
class IndependentVolModel:
    """Rate model with diffusion sqrt(v(t) r), v independent of the rate noise."""

    b: ParameterCurve
    theta: ParameterCurve
    r0: float
    horizon: float
    vol: VolDynamics

    def __post_init__(self):
        if self.r0 <= 0:
            raise ValueError("r0 must be positive")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")


@dataclass(frozen=True)
class CorrelatedWvModel:
    """r = w + v; w is square-root with variance factor v, v is mean-reverting.

    dw = (-b w + theta_w) dt + sqrt(v w) dB,
    dv = (-b v + theta_v) dt + xi v dBv,  independent drivers.
    """

    b: ParameterCurve
    theta_w: ParameterCurve
    theta_v: ParameterCurve
    w0: float
    v0: float
    xi: float
    horizon: float

    def __post_init__(self):
        if self.w0 <= 0 or self.v0 <= 0:
            raise ValueError("w0 and v0 must be positive")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")

    @property
    def r0(self) -> float:
        return self.w0 + self.v0


def _cumulative_trapezoid(y: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Cumulative trapezoid along the last axis, starting at 0."""
    dx = np.diff(x)
    inc = 0.5 * dx * (y[..., 1:] + y[..., :-1])
    out = np.zeros(y.shape)
    np.cumsum(inc, axis=-1, out=out[..., 1:])
    return out


class _FrozenVolTransforms:
    """Pathwise transform machinery for one block of variance paths."""

    def __init__(self, b: ParameterCurve, theta: ParameterCurve, r0: float, vol_paths: "PathSet"):
        times = np.asarray(vol_paths.times, dtype=float)
        if times.size < 3:
            raise ValueError("vol paths must be stored on a grid (store_stride too large?)")
        v = np.asarray(vol_paths.values, dtype=float)
        self.r0 = r0
        self.times = times
        e = np.exp(b.cumulative(times))
        self.e_ratio = e / e[-1]
        g = _cumulative_trapezoid(e[None, :] * v, times)
        # S_j(s_k, t), one row per path.
        self.sigma_int = (g[:, -1][:, None] - g) / (4.0 * e[-1])
        self.theta_vals = theta(times)
        self.head0 = r0 / e[-1]

    def charfn(self, omega: float) -> np.ndarray:
        base = 1.0 - 2.0j * omega * self.sigma_int
        integrand = (self.e_ratio * self.theta_vals)[None, :] / base
        tail = np.trapezoid(integrand, self.times, axis=1)
        head = self.head0 / base[:, 0]
        return np.exp(1j * omega * (head + tail))

    def laplace(self, p: float) -> np.ndarray:
        base = 1.0 + 2.0 * p * self.sigma_int
        integrand = (self.e_ratio * self.theta_vals)[None, :] / base
        tail = np.trapezoid(integrand, self.times, axis=1)
        head = self.head0 / base[:, 0]
        return np.exp(-p * (head + tail))

    def moments(self) -> tuple[float, np.ndarray, np.ndarray]:
        """Pathwise first three moments from the frozen transform.

        With phi(p) the exponent factor (transform = e^{-p phi(p)}) and
        phi0, phi1, phi2 its value and derivatives at 0:

            m1 = phi0 (variance-free),
            m2 = phi0^2 - 2 phi1,
            m3 = 3 phi2 - 6 phi0 phi1 + phi0^3.
        """
        base = (self.e_ratio * self.theta_vals)[None, :]
        phi0 = self.head0 + np.trapezoid(
            np.broadcast_to(base, self.sigma_int.shape), self.times, axis=1
        )
        phi1 = -2.0 * (
            self.head0 * self.sigma_int[:, 0]
            + np.trapezoid(base * self.sigma_int, self.times, axis=1)
        )
        phi2 = 8.0 * (
            self.head0 * self.sigma_int[:, 0] ** 2
            + np.trapezoid(base * self.sigma_int**2, self.times, axis=1)
        )
        m1 = float(phi0[0])
        m2 = phi0**2 - 2.0 * phi1
        m3 = 3.0 * phi2 - 6.0 * phi0 * phi1 + phi0**3
        return m1, m2, m3


def _complex_mean_se(values: np.ndarray) -> tuple[complex, float]:
    mean = complex(np.mean(values))
    n = values.size
    if n < 2:
        return mean, 0.0
    var = np.var(values.real, ddof=1) + np.var(values.imag, ddof=1)
    return mean, float(np.sqrt(var / n))


def conditional_cf_independent(
    model: IndependentVolModel, omega: float, vol_paths: "PathSet"
) -> tuple[complex, float]:
    """Average of the frozen-variance transform over the given paths.

    Returns (estimate, standard error); the estimate converges to the
    unconditional E[exp(i omega r(t))] as paths accumulate.
    """
    frozen = _FrozenVolTransforms(model.b, model.theta, model.r0, vol_paths)
    return _complex_mean_se(frozen.charfn(omega))


def conditional_laplace_taylor(
    model: IndependentVolModel, p: float, order: int, vol_paths: "PathSet"
) -> float:
    """Moment-truncated transform sum_{k<=order} (-p)^k m_k / k!.

    The first moment is variance-free; the higher ones are pathwise
    quadratures of the frozen-variance formulas, averaged over paths.
    """
    if order not in (1, 2, 3):
        raise ValueError(f"order must be 1, 2 or 3, got {order}")
    frozen = _FrozenVolTransforms(model.b, model.theta, model.r0, vol_paths)
    m1, m2, m3 = frozen.moments()
    total = 1.0 - p * m1
    if order >= 2:
        total += 0.5 * p * p * float(np.mean(m2))
    if order >= 3:
        total -= p**3 / 6.0 * float(np.mean(m3))
    return total


def conditional_cf_correlated(
    model: CorrelatedWvModel,
    omega: float,
    vol_paths: "PathSet",
    v_range: tuple[float, float],
) -> tuple[complex, float, int]:
    """Conditional transform of r(t) = w(t) + v(t) given terminal variance.

    Restricts to paths whose v(t) lies in ``v_range``, freezes the
    w-transform along each variance path and shifts by the path's own
    terminal variance. Returns (estimate, standard error, paths in bin).
    """
    lo, hi = v_range
    terminal = np.asarray(vol_paths.values)[:, -1]
    mask = (terminal >= lo) & (terminal < hi)
    count = int(np.count_nonzero(mask))
    if count == 0:
        raise ValueError(f"no paths with terminal variance in [{lo}, {hi})")
    from .montecarlo import PathSet  # local import keeps module load acyclic

    subset = PathSet(
        times=np.asarray(vol_paths.times),
        values=np.asarray(vol_paths.values)[mask],
        measure_tag=vol_paths.measure_tag,
    )
    frozen = _FrozenVolTransforms(model.b, model.theta_w, model.w0, subset)
    vals = frozen.charfn(omega) * np.exp(1j * omega * terminal[mask])
    mean, se = _complex_mean_se(vals)
    return mean, se, count


def terminal_vol_bins(vol_paths: "PathSet", n_bins: int = 10) -> list[tuple[float, float]]:
    """Equal-probability bins of the terminal variance values."""
    terminal = np.asarray(vol_paths.values)[:, -1]
    edges = np.quantile(terminal, np.linspace(0.0, 1.0, n_bins + 1))
    edges[0] -= 1e-12
    edges[-1] += 1e-12
    return [(float(edges[i]), float(edges[i + 1])) for i in range(n_bins)]
