"""Zero-coupon bond pricing.

P(t, T) = exp(-r(t) C(t, T) + A(t, T)) where C solves the Riccati equation

    dC/dt = b(t) C + (1/2) sigma(t)^2 C^2 - 1,    C(T, T) = 0,

integrated backward with classical RK4 on a uniform grid, and

    A(t, T) = -int_t^T theta(u) C(u, T) du

by quartic-accurate quadrature on the same grid. The constant-parameter
closed form is kept alongside as an independent oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import SolverError
from .termstructure import ExtendedCirParams

__all__ = ["BondSolution", "solve_riccati", "bond_price_constant_analytic"]

_BLOWUP = 1e6


@dataclass(frozen=True)
class BondSolution:
    """Dense C(., T) and A(., T) for a fixed maturity T."""

    maturity: float
    grid: np.ndarray
    c_values: np.ndarray
    _c_spline: CubicSpline
    _a_spline: CubicSpline

    def c(self, t):
        """C(t, T); positive for t < T, exactly 0 at T."""
        self._check(t)
        return self._c_spline(t)

    def a(self, t):
        """A(t, T) = -int_t^T theta C; nonpositive, exactly 0 at t = T."""
        self._check(t)
        return self._a_spline(t) - self._a_spline(self.maturity)

    def price(self, t, r):
        """exp(-r C(t,T) + A(t,T)); equals 1 at t = T for every r."""
        if np.any(np.asarray(r) < 0):
            raise ValueError("rate must be nonnegative")
        return np.exp(-np.asarray(r) * self.c(t) + self.a(t))

    def _check(self, t):
        t_arr = np.asarray(t)
        if np.any(t_arr < -1e-12) or np.any(t_arr > self.maturity + 1e-12):
            raise ValueError(f"t={t} outside [0, {self.maturity}]")


def solve_riccati(params: ExtendedCirParams, T: float, n_steps: int = 0) -> BondSolution:
    """Solve for C(., T) and A(., T) on a uniform grid of ``n_steps`` steps.

    ``n_steps`` defaults to 1000 per year of maturity. The Riccati right-hand
    side is smooth and bounded at desk maturities, so fixed-step RK4 is
    enough; a blow-up guard trips if |C| ever exceeds 1e6.
    """
    if not 0.0 < T <= params.horizon:
        raise ValueError(f"T={T} outside (0, {params.horizon}]")
    if n_steps == 0:
        n_steps = max(10, int(np.ceil(1000 * T)))
    if n_steps < 10:
        raise ValueError("n_steps must be at least 10")

    b, sigma, theta = params.b, params.sigma, params.theta

    def rhs(t: float, c: float) -> float:
        return b(t) * c + 0.5 * sigma(t) ** 2 * c * c - 1.0

    grid = np.linspace(0.0, T, n_steps + 1)
    h = T / n_steps
    c_vals = np.empty(n_steps + 1)
    c_vals[-1] = 0.0
    c = 0.0
    # Backward march T -> 0 (RK4 with step -h).
    for k in range(n_steps, 0, -1):
        t_k = grid[k]
        k1 = rhs(t_k, c)
        k2 = rhs(t_k - 0.5 * h, c - 0.5 * h * k1)
        k3 = rhs(t_k - 0.5 * h, c - 0.5 * h * k2)
        k4 = rhs(t_k - h, c - h * k3)
        c = c - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.isfinite(c) or abs(c) > _BLOWUP:
            raise SolverError(f"Riccati solution blew up near t={t_k - h:.6g}")
        c_vals[k - 1] = c

    c_spline = CubicSpline(grid, c_vals)
    a_spline = CubicSpline(grid, theta(grid) * c_vals).antiderivative()
    return BondSolution(
        maturity=float(T),
        grid=grid,
        c_values=c_vals,
        _c_spline=c_spline,
        _a_spline=a_spline,
    )


def bond_price_constant_analytic(
    b: float, sigma: float, theta: float, r: float, tau: float
) -> float:
    """Closed-form P over a horizon tau for constant coefficients.

    gamma = sqrt(b^2 + 2 sigma^2),
    C = 2 (e^{gamma tau} - 1) / ((gamma + b)(e^{gamma tau} - 1) + 2 gamma),
    A = (2 theta / sigma^2) log( 2 gamma e^{(b+gamma) tau / 2} / denom ).
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    if tau == 0.0:
        return 1.0
    gamma = np.sqrt(b * b + 2.0 * sigma * sigma)
    em1 = np.expm1(gamma * tau)
    denom = (gamma + b) * em1 + 2.0 * gamma
    c = 2.0 * em1 / denom
    a = (2.0 * theta / sigma**2) * (
        np.log(2.0 * gamma / denom) + 0.5 * (b + gamma) * tau
    )
    return float(np.exp(-r * c + a))


def constant_c_a(b: float, sigma: float, theta: float, tau: float) -> tuple[float, float]:
    """Closed-form (C, A) pair for constant coefficients; oracle helper."""
    if tau == 0.0:
        return 0.0, 0.0
    gamma = np.sqrt(b * b + 2.0 * sigma * sigma)
    em1 = np.expm1(gamma * tau)
    denom = (gamma + b) * em1 + 2.0 * gamma
    c = 2.0 * em1 / denom
    a = (2.0 * theta / sigma**2) * (np.log(2.0 * gamma / denom) + 0.5 * (b + gamma) * tau)
    return float(c), float(a)
