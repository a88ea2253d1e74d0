"""Time-varying model parameters and derived quantities.

The short-rate model is driven by three deterministic curves on [0, T]:
the mean-reversion speed ``b``, the volatility ``sigma`` and the inflow
``theta``, entering the dynamics

    dr(t) = (-b(t) r(t) + theta(t)) dt + sigma(t) sqrt(r(t)) dB(t).

Curves are piecewise-cubic interpolants over a strictly increasing knot
grid, which gives the degrees-of-freedom curve d(t) = 4 theta / sigma^2 the
differentiability the validation and transform machinery rely on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicSpline

__all__ = [
    "ParameterCurve",
    "ExtendedCirParams",
    "DimensionReport",
    "dimension",
    "validate_assumption1",
    "integrate_b",
    "curve_from_json",
]


class ParameterCurve:
    """Deterministic real function of time on [0, T].

    Represented as a cubic spline (not-a-knot ends) through the given knots,
    so polynomials of degree <= 3 are reproduced exactly. Evaluation outside
    [knots[0], knots[-1]] is a domain error; splines extrapolate too
    cheerfully to allow it silently.

    Parameters
    ----------
    knots : array_like
        Strictly increasing times, starting at 0.
    values : array_like
        Curve values at the knots.
    positive : bool
        Declare the curve positive; checked at every knot and every
        midpoint between knots at construction.
    """

    def __init__(self, knots: Sequence[float], values: Sequence[float], *, positive: bool = False):
        knots = np.asarray(knots, dtype=float)
        values = np.asarray(values, dtype=float)
        if knots.ndim != 1 or knots.size < 2:
            raise ValueError("need at least two knots")
        if values.shape != knots.shape:
            raise ValueError("knots and values must have matching shapes")
        if np.any(np.diff(knots) <= 0):
            raise ValueError("knots must be strictly increasing")
        if knots[0] != 0.0:
            raise ValueError(f"knot grid must start at 0, got {knots[0]}")
        self.knots = knots
        self.values = values
        self.positive = positive
        self._spline = CubicSpline(knots, values, bc_type="not-a-knot")
        self._deriv = self._spline.derivative()
        self._anti = self._spline.antiderivative()
        if positive:
            mids = 0.5 * (knots[:-1] + knots[1:])
            probe = np.concatenate([knots, mids])
            bad = probe[self._spline(probe) <= 0.0]
            if bad.size:
                raise ValueError(
                    f"curve declared positive is <= 0 at t={bad.min():.6g}"
                )

    @classmethod
    def constant(cls, value: float, horizon: float, *, positive: bool = False) -> "ParameterCurve":
        return cls([0.0, horizon], [value, value], positive=positive)

    @property
    def t_min(self) -> float:
        return float(self.knots[0])

    @property
    def t_max(self) -> float:
        return float(self.knots[-1])

    def _check_domain(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if np.any(t < self.t_min - 1e-12) or np.any(t > self.t_max + 1e-12):
            raise ValueError(
                f"time outside curve domain [{self.t_min}, {self.t_max}]"
            )
        return np.clip(t, self.t_min, self.t_max)

    def __call__(self, t):
        return self._spline(self._check_domain(t))

    def derivative(self, t):
        return self._deriv(self._check_domain(t))

    def integral(self, s, t) -> float:
        """Exact integral of the interpolant over [s, t] (antiderivative lookup)."""
        s = self._check_domain(s)
        t = self._check_domain(t)
        return float(self._anti(t) - self._anti(s))

    def cumulative(self, t):
        """Exact integral of the interpolant over [0, t], vectorized."""
        return self._anti(self._check_domain(t)) - self._anti(0.0)

    def __repr__(self) -> str:
        return f"ParameterCurve({self.knots.size} knots on [0, {self.t_max:g}])"


def curve_from_json(obj, horizon: float | None = None, *, positive: bool = False) -> ParameterCurve:
    """Build a curve from its JSON form.

    Accepts ``{"knots": [...], "values": [...]}``, the constant shorthand
    ``{"const": x}`` (which needs ``horizon``), or a bare number treated the
    same as the shorthand.
    """
    if isinstance(obj, (int, float)):
        obj = {"const": float(obj)}
    if not isinstance(obj, dict):
        raise ValueError(f"cannot build a curve from {obj!r}")
    if "const" in obj:
        if horizon is None:
            raise ValueError("constant curve shorthand needs a horizon")
        return ParameterCurve.constant(float(obj["const"]), horizon, positive=positive)
    try:
        return ParameterCurve(obj["knots"], obj["values"], positive=positive)
    except KeyError as exc:
        raise ValueError(f"curve JSON missing field {exc}") from exc


@dataclass(frozen=True)
class ExtendedCirParams:
    """The model: curves (b, sigma, theta), the initial rate and the horizon.

    ``sigma`` and ``theta`` must be positive on [0, horizon]; ``b`` may take
    any sign (forward-measure adjusted drifts do).
    """

    b: ParameterCurve
    sigma: ParameterCurve
    theta: ParameterCurve
    r0: float
    horizon: float

    def __post_init__(self):
        if self.r0 <= 0:
            raise ValueError(f"r0 must be positive, got {self.r0}")
        if self.horizon <= 0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        for name in ("b", "sigma", "theta"):
            curve = getattr(self, name)
            if curve.t_max < self.horizon - 1e-12:
                raise ValueError(f"curve {name} does not cover [0, {self.horizon}]")
        for name in ("sigma", "theta"):
            curve = getattr(self, name)
            grid = np.linspace(0.0, self.horizon, 257)
            if np.any(curve(grid) <= 0.0):
                raise ValueError(f"curve {name} must be positive on [0, horizon]")

    @classmethod
    def from_constants(
        cls, b: float, sigma: float, theta: float, r0: float, horizon: float
    ) -> "ExtendedCirParams":
        return cls(
            b=ParameterCurve.constant(b, horizon),
            sigma=ParameterCurve.constant(sigma, horizon, positive=True),
            theta=ParameterCurve.constant(theta, horizon, positive=True),
            r0=r0,
            horizon=horizon,
        )

    @classmethod
    def from_json(cls, obj: dict) -> "ExtendedCirParams":
        try:
            horizon = float(obj["horizon"])
            return cls(
                b=curve_from_json(obj["b"], horizon),
                sigma=curve_from_json(obj["sigma"], horizon, positive=True),
                theta=curve_from_json(obj["theta"], horizon, positive=True),
                r0=float(obj["r0"]),
                horizon=horizon,
            )
        except KeyError as exc:
            raise ValueError(f"model JSON missing field {exc}") from exc

    @classmethod
    def load(cls, path) -> "ExtendedCirParams":
        with open(path) as fh:
            doc = json.load(fh)
        return cls.from_json(doc.get("model", doc))


@dataclass(frozen=True)
class DimensionReport:
    """Result of scanning the degrees-of-freedom curve d(t) = 4 theta / sigma^2."""

    q_optima: int
    min_d: float
    differentiable: bool
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations and self.min_d > 0


def dimension(params: ExtendedCirParams, t) -> float:
    """Degrees-of-freedom curve d(t) = 4 theta(t) / sigma(t)^2."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr > params.horizon):
        raise ValueError(f"t={t} outside [0, {params.horizon}]")
    val = 4.0 * params.theta(t_arr) / params.sigma(t_arr) ** 2
    return float(val) if np.isscalar(t) or t_arr.ndim == 0 else val


def _dimension_derivative(params: ExtendedCirParams, t: np.ndarray) -> np.ndarray:
    # d' = 4 (theta' sigma - 2 theta sigma') / sigma^3
    sig = params.sigma(t)
    return 4.0 * (params.theta.derivative(t) * sig - 2.0 * params.theta(t) * params.sigma.derivative(t)) / sig**3


def validate_assumption1(params: ExtendedCirParams, grid_resolution: int = 1024) -> DimensionReport:
    """Grid proxy for the standing regularity assumption on d(t).

    Scans d on a uniform grid: counts sign changes of d' (estimate of the
    number of interior extrema), records the grid minimum of d, and lists
    positivity violations of sigma and theta at knots, midpoints and grid
    points. A finite grid can only ever approximate the critical-point
    condition; the count is reported, not certified.
    """
    if grid_resolution < 2:
        raise ValueError("grid_resolution must be at least 2")
    grid = np.linspace(0.0, params.horizon, grid_resolution)
    violations: list[tuple[float, str]] = []
    for name in ("sigma", "theta"):
        curve: ParameterCurve = getattr(params, name)
        mids = 0.5 * (curve.knots[:-1] + curve.knots[1:])
        probe = np.unique(np.concatenate([curve.knots, mids, grid]))
        probe = probe[(probe >= 0) & (probe <= params.horizon)]
        vals = curve(probe)
        for ti in probe[vals <= 0.0]:
            violations.append((float(ti), f"{name}(t) <= 0"))

    d_vals = 4.0 * params.theta(grid) / np.maximum(params.sigma(grid), 1e-300) ** 2
    dprime = _dimension_derivative(params, grid)
    signs = np.sign(dprime)
    signs = signs[signs != 0]
    q_optima = int(np.count_nonzero(np.diff(signs) != 0)) if signs.size else 0

    return DimensionReport(
        q_optima=q_optima,
        min_d=float(np.min(d_vals)),
        differentiable=True,
        violations=violations,
    )


def integrate_b(params: ExtendedCirParams, s: float, t: float) -> float:
    """Integral of the mean-reversion curve b over [s, t].

    The curve is piecewise cubic, so its antiderivative is exact; callers in
    the transform modules rely on this being cheap (O(1)) and additive.
    """
    if s > t:
        raise ValueError(f"need s <= t, got s={s}, t={t}")
    if s < 0 or t > params.horizon:
        raise ValueError(f"[{s}, {t}] outside [0, {params.horizon}]")
    if s == t:
        return 0.0
    return params.b.integral(s, t)
