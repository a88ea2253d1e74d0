"""European calls on zero-coupon bonds.

Three routes to the same price:

* ``price_call_laplace`` pairs the closed-form transform of the payoff with
  the forward-measure transform of the rate along a vertical line and
  accelerates the oscillatory tail by Euler summation,
* ``price_call_fourier`` prices through two inversion-style probabilities
  (exercise probability and a discount-tilted one),
* ``price_call_constant_analytic`` is the classic constant-parameter
  formula through two scaled noncentral chi-squared CDF evaluations.

The payoff max(P(t,T) - K, 0) vanishes for rates above
r* = (A(t,T) - ln K) / C(t,T), so its transform has the closed form

    int_0^{r*} e^{-p r} (e^{-C r + A} - K) dr
        = e^A (1 - e^{-(p+C) r*})/(p+C) - K (1 - e^{-p r*})/p,

an entire function of p once the removable singularities are filled in.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .bondpricing import BondSolution, solve_riccati
from .charfn import RateLaw
from .errors import InversionError
from .quadrature import adaptive_gauss, gauss_legendre_nodes
from .sncchi2 import SncChi2
from .termstructure import ExtendedCirParams, ParameterCurve

__all__ = [
    "OptionSpec",
    "InversionConfig",
    "forward_drift",
    "payoff_laplace",
    "price_call_laplace",
    "price_call_fourier",
    "price_call_constant_analytic",
]


@dataclass(frozen=True)
class OptionSpec:
    """European call on a zero-coupon bond: expiry t, bond maturity T > t, strike K."""

    expiry: float
    bond_maturity: float
    strike: float

    def __post_init__(self):
        if not 0.0 < self.expiry < self.bond_maturity:
            raise ValueError(
                f"need 0 < expiry < bond maturity, got {self.expiry}, {self.bond_maturity}"
            )
        if self.strike <= 0.0:
            raise ValueError(f"strike must be positive, got {self.strike}")


@dataclass(frozen=True)
class InversionConfig:
    """Controls for the vertical-line inversion.

    ``abscissa`` 0 means auto (min of 1/(2 E[r(t)]) and half the payoff
    decay rate C(t,T), keeping the integrand well scaled deep in the
    money). ``truncation`` caps the line extent, ``n_points`` the total
    node budget, ``euler_terms`` the acceleration order.
    """

    abscissa: float = 0.0
    truncation: float = 1e7
    n_points: int = 4096
    euler_terms: int = 12

    def __post_init__(self):
        if self.abscissa < 0.0:
            raise ValueError("abscissa must be positive (or 0 for auto)")
        if self.n_points < 64:
            raise ValueError("n_points must be at least 64")
        if self.euler_terms < 2:
            raise ValueError("euler_terms must be at least 2")


def forward_drift(params: ExtendedCirParams, spec: OptionSpec, c_expiry: BondSolution) -> ParameterCurve:
    """Effective mean-reversion curve under the expiry-forward measure.

    The numeraire bond's volatility is -sigma(s) sqrt(r) C(s, t), so the
    measure change adds -sigma(s)^2 C(s, t) r to the drift: the rate
    mean-reverts with strength b(s) + sigma(s)^2 C(s, t) under the forward
    measure (reversion strengthens; the constant-parameter transition law
    pins the sign). Sampled on the Riccati solver grid over [0, t].
    """
    t = spec.expiry
    if c_expiry.maturity < t - 1e-12:
        raise ValueError("Riccati solution must extend to the option expiry")
    grid = c_expiry.grid[c_expiry.grid <= t + 1e-12]
    if grid[-1] < t:
        grid = np.append(grid, t)
    values = params.b(grid) + params.sigma(grid) ** 2 * c_expiry.c(grid)
    return ParameterCurve(grid, values)


def _phi(z: np.ndarray) -> np.ndarray:
    """(1 - e^{-z}) / z, entire, with the removable zero filled in."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-6
    out = np.empty_like(z)
    zs = np.where(small, 0.0, z)
    out = -np.expm1(-zs) / np.where(small, 1.0, zs)
    # Two series terms keep 1e-13 accuracy below the switch point.
    out = np.where(small, 1.0 - z / 2.0 + z * z / 6.0, out)
    return out


def payoff_laplace(p, c_tt: float, a_tt: float, strike: float):
    """Transform of the call payoff in the rate variable.

    Returns int_0^inf e^{-p r} max(e^{-c_tt r + a_tt} - strike, 0) dr in
    closed form; identically 0 when the strike is out of reach
    (strike >= e^{a_tt}). Entire in p, vectorized.
    """
    if c_tt <= 0.0:
        raise ValueError(f"c_tt must be positive, got {c_tt}")
    if strike <= 0.0:
        raise ValueError(f"strike must be positive, got {strike}")
    p_arr = np.asarray(p, dtype=complex)
    if strike >= math.exp(a_tt):
        out = np.zeros_like(p_arr)
        return out if np.ndim(p) else complex(out.flat[0])
    r_star = (a_tt - math.log(strike)) / c_tt
    val = math.exp(a_tt) * r_star * _phi((p_arr + c_tt) * r_star) - strike * r_star * _phi(p_arr * r_star)
    return val if np.ndim(p) else complex(val.flat[0])


def _euler_accelerated(partials: np.ndarray, m: int) -> float:
    """Euler-transform the last m+1 partial sums with binomial weights."""
    m = max(1, min(m, len(partials) - 1))
    tail = partials[-(m + 1):]
    weights = np.array([math.comb(m, j) for j in range(m + 1)], dtype=float)
    return float(np.dot(weights, tail) / 2.0**m)


def _oscillatory_halfline(
    f,
    freq: float,
    law_scale: float,
    cfg: InversionConfig,
    abs_tol: float,
    nodes_per_block: int = 16,
) -> float:
    """Integrate f over [0, inf) where f oscillates at ``freq`` in the tail.

    The head (where the transform's poles and phase live, extent set by
    ``law_scale``) is integrated adaptively; beyond it the integrand settles
    into a decaying oscillation at frequency ``freq``, so half-period blocks
    nearly alternate and the Euler transform of their partial sums converges
    geometrically.
    """
    h = min(math.pi / freq, cfg.truncation)
    u_break = h * max(1, math.ceil(8.0 * law_scale / h))
    u_break = min(u_break, cfg.truncation)
    total = float(adaptive_gauss(f, 0.0, u_break, tol=min(abs_tol, 1e-12)))

    max_blocks = max(cfg.euler_terms + 4, cfg.n_points // nodes_per_block)
    partials = []
    for k in range(max_blocks):
        lo = u_break + k * h
        if lo >= cfg.truncation:
            break
        hi = min(lo + h, cfg.truncation)
        x, w = gauss_legendre_nodes(lo, hi, nodes_per_block)
        total += float(np.dot(w, f(x)))
        partials.append(total)
        if len(partials) > cfg.euler_terms + 3:
            accel_now = _euler_accelerated(np.asarray(partials), cfg.euler_terms)
            accel_prev = _euler_accelerated(np.asarray(partials[:-2]), cfg.euler_terms)
            if abs(accel_now - accel_prev) < abs_tol:
                return accel_now

    partials = np.asarray(partials)
    if len(partials) < 4:
        return total
    accel_now = _euler_accelerated(partials, cfg.euler_terms)
    accel_prev = _euler_accelerated(partials[:-2], cfg.euler_terms)
    disagree = abs(accel_now - accel_prev)
    if disagree > 1000.0 * abs_tol:
        raise InversionError(
            "line integral did not converge within the node budget",
            diagnostics={
                "blocks": len(partials),
                "half_period": h,
                "head_extent": u_break,
                "last_partials": partials[-5:].tolist(),
                "euler_disagreement": disagree,
                "tolerance": 1000.0 * abs_tol,
            },
        )
    return accel_now


def _law_scale(law: RateLaw) -> float:
    """Frequency extent of the transform's head structure along the line."""
    return law.mean() + 6.0 * math.sqrt(max(law.variance(), 0.0))


@dataclass(frozen=True)
class _PricingPieces:
    p0t: float
    p0T: float
    c_tt: float
    a_tt: float
    law: RateLaw


def _prepare(params: ExtendedCirParams, spec: OptionSpec) -> _PricingPieces:
    if spec.bond_maturity > params.horizon:
        raise ValueError("bond maturity beyond the model horizon")
    sol_T = solve_riccati(params, spec.bond_maturity)
    sol_t = solve_riccati(params, spec.expiry)
    p0t = float(sol_t.price(0.0, params.r0))
    p0T = float(sol_T.price(0.0, params.r0))
    c_tt = float(sol_T.c(spec.expiry))
    a_tt = float(sol_T.a(spec.expiry))
    fwd = forward_drift(params, spec, sol_t)
    law = RateLaw(params, spec.expiry, drift_override=fwd)
    return _PricingPieces(p0t=p0t, p0T=p0T, c_tt=c_tt, a_tt=a_tt, law=law)


def _clamp_price(price: float, method: str) -> float:
    if price < -1e-8:
        raise InversionError(
            f"{method} price {price:.3e} below the negative-noise floor",
            diagnostics={"price": price},
        )
    if price < 0.0:
        warnings.warn(f"{method} price {price:.3e} clamped to 0", stacklevel=3)
        return 0.0
    return price


def price_call_laplace(
    params: ExtendedCirParams, spec: OptionSpec, cfg: InversionConfig | None = None
) -> float:
    """Bond-call price by pairing the two transforms on a vertical line.

    price = P(0,t) / (2 pi i) * int_{a-i inf}^{a+i inf}
                payoff_transform(-p) F(p) dp

    with F the forward-measure transform of the rate at expiry. The payoff
    transform splits into a rational part, whose paired integral closes by
    residues to e^A F(C) (i.e. the forward bond price), and an oscillatory
    remainder at frequency r* handled by block quadrature with Euler
    acceleration:

        price = P(0,T) - P(0,t) K e^{a r*} / pi
                * int_0^inf Re[ e^{i u r*} (1/(C-p) + 1/p) F(p) ] du.

    The line must sit left of the payoff pole: 0 < a < C(t,T).
    """
    cfg = cfg or InversionConfig()
    pieces = _prepare(params, spec)
    if spec.strike >= math.exp(pieces.a_tt):
        return 0.0
    c_tt = pieces.c_tt
    r_star = (pieces.a_tt - math.log(spec.strike)) / c_tt

    a = cfg.abscissa
    if a == 0.0:
        a = min(0.5 / pieces.law.mean(), 0.5 * c_tt)
    if not 0.0 < a < c_tt:
        raise ValueError(f"abscissa must lie in (0, C(t,T)) = (0, {c_tt:.6g})")

    law = pieces.law
    forward_bond = math.exp(pieces.a_tt) * float(law.laplace(c_tt).real)
    prefactor = pieces.p0t * math.exp(pieces.a_tt - (c_tt - a) * r_star) / math.pi
    if prefactor < 1e-18:
        # Payoff-side oscillation exponentially suppressed: the rational
        # part alone carries the price (strike effectively zero).
        return _clamp_price(pieces.p0t * forward_bond, "laplace")

    def integrand(u: np.ndarray) -> np.ndarray:
        p = a + 1j * u
        kernel = 1.0 / (c_tt - p) + 1.0 / p
        return (np.exp(1j * u * r_star) * kernel * law.laplace(p)).real

    abs_tol = 1e-10 * max(pieces.p0T, spec.strike) / max(prefactor, 1e-18)
    correction = _oscillatory_halfline(integrand, r_star, _law_scale(law), cfg, abs_tol)
    price = pieces.p0t * forward_bond - prefactor * correction
    return _clamp_price(price, "laplace")


def price_call_fourier(
    params: ExtendedCirParams, spec: OptionSpec, cfg: InversionConfig | None = None
) -> float:
    """Independent pricer through two exercise probabilities.

    The option exercises when r(t) < r*; under the expiry-forward measure

        price = P(0,t) ( e^A E[e^{-C r} 1{r<r*}] - K Q(r < r*) ),

    with both terms recovered from the transform: the probability by the
    half-line inversion formula, the tilted term by the same formula under
    the e^{-C r} change of weight.
    """
    cfg = cfg or InversionConfig()
    pieces = _prepare(params, spec)
    if spec.strike >= math.exp(pieces.a_tt):
        return 0.0
    r_star = (pieces.a_tt - math.log(spec.strike)) / pieces.c_tt
    law = pieces.law
    c_tt = pieces.c_tt
    f_at_c = float(law.laplace(c_tt).real)
    scale = _law_scale(law)

    def prob_below(tilt: float, norm: float) -> float:
        def integrand(w: np.ndarray) -> np.ndarray:
            cf = law.laplace(tilt - 1j * w) / norm
            return (np.exp(-1j * w * r_star) * cf).imag / w

        val = _oscillatory_halfline(integrand, r_star, scale, cfg, abs_tol=1e-10)
        return 0.5 - val / math.pi

    q_tilted = prob_below(c_tt, f_at_c)
    q_plain = prob_below(0.0, 1.0)
    price = pieces.p0t * (
        math.exp(pieces.a_tt) * f_at_c * q_tilted - spec.strike * q_plain
    )
    return _clamp_price(price, "fourier")


def price_call_constant_analytic(
    b: float, sigma: float, theta: float, r0: float, t: float, T: float, K: float
) -> float:
    """Classic constant-parameter bond-call formula.

    Two scaled noncentral chi-squared CDF evaluations: the exercise
    probability under the expiry-forward measure and its discount-tilted
    companion. Serves as the oracle for the transform pricers.
    """
    if not 0.0 < t < T:
        raise ValueError(f"need 0 < t < T, got t={t}, T={T}")
    from .bondpricing import bond_price_constant_analytic, constant_c_a

    c_tt, a_tt = constant_c_a(b, sigma, theta, T - t)
    if K >= math.exp(a_tt):
        return 0.0
    r_star = (a_tt - math.log(K)) / c_tt

    gamma = math.sqrt(b * b + 2.0 * sigma * sigma)
    phi = 2.0 * gamma / (sigma**2 * math.expm1(gamma * t))
    psi = (b + gamma) / sigma**2
    df = 4.0 * theta / sigma**2
    nc_fwd = 2.0 * phi**2 * r0 * math.exp(gamma * t) / (phi + psi)
    # Forward-measure law of r(t): scale 1/(2(phi+psi)); the e^{-C r} tilt
    # shifts both scale and noncentrality by 1 + 2 c^2 C.
    fwd = SncChi2(df, nc_fwd, math.sqrt(0.5 / (phi + psi)))
    shift = 1.0 + 2.0 * fwd.c**2 * c_tt
    tilted = SncChi2(df, nc_fwd / shift, fwd.c / math.sqrt(shift))

    p0T = bond_price_constant_analytic(b, sigma, theta, r0, T)
    p0t = bond_price_constant_analytic(b, sigma, theta, r0, t)
    return p0T * float(tilted.cdf(r_star)) - K * p0t * float(fwd.cdf(r_star))
