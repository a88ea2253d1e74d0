"""Scaled noncentral chi-squared distribution with real degrees of freedom.

The law of c^2 * Y where Y is noncentral chi-squared with (possibly
non-integer) degrees of freedom lambda1 and noncentrality lambda2. Its
characteristic function

    exp(i lambda2 u / (1 - 2iu)) / (1 - 2iu)^(lambda1/2),   u = c^2 omega,

is an n-th power of the same family member with (lambda1/n, lambda2/n, c),
i.e. the family is infinitely divisible; ``divide`` exposes that split.
The short rate of the constant-parameter model is exactly of this form,
which is what the transform modules test against.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import special, stats

__all__ = ["SncChi2"]

# Series terms are added until the Poisson mixing weights' tail mass drops
# below this, with a hard cap on the term count.
_TAIL_MASS = 1e-14
_MAX_TERMS = 10_000


def _n_terms(half_nc: float) -> int:
    if half_nc == 0.0:
        return 1
    n = int(stats.poisson.isf(_TAIL_MASS, half_nc)) + 1
    return min(max(n, 1), _MAX_TERMS)


def _central_logpdf(lam: np.ndarray, y: np.ndarray) -> np.ndarray:
    """log f_lam(y) of the central chi-squared density, elementwise."""
    half = 0.5 * lam
    return special.xlogy(half - 1.0, y) - 0.5 * y - half * np.log(2.0) - special.gammaln(half)


@dataclass(frozen=True)
class SncChi2:
    """Scaled noncentral chi-squared law.

    Parameters
    ----------
    lambda1 : float
        Degrees of freedom, > 0 (need not be integer).
    lambda2 : float
        Noncentrality, >= 0.
    c : float
        Scale, > 0; the variable is c^2 times a unit-scale draw.
    """

    lambda1: float
    lambda2: float
    c: float = 1.0

    def __post_init__(self):
        if self.lambda1 <= 0:
            raise ValueError(f"lambda1 must be > 0, got {self.lambda1}")
        if self.lambda2 < 0:
            raise ValueError(f"lambda2 must be >= 0, got {self.lambda2}")
        if self.c <= 0:
            raise ValueError(f"c must be > 0, got {self.c}")

    @property
    def mean(self) -> float:
        return self.c**2 * (self.lambda1 + self.lambda2)

    @property
    def variance(self) -> float:
        return self.c**4 * (2.0 * self.lambda1 + 4.0 * self.lambda2)

    def density(self, x) -> np.ndarray | float:
        """Poisson mixture of central chi-squared densities; 0 for x < 0."""
        x_arr = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros_like(x_arr)
        y = x_arr / self.c**2
        pos = y > 0.0
        if np.any(pos):
            half_nc = 0.5 * self.lambda2
            n = _n_terms(half_nc)
            ks = np.arange(n)
            if half_nc > 0.0:
                log_w = -half_nc + special.xlogy(ks, half_nc) - special.gammaln(ks + 1.0)
            else:
                log_w = np.array([0.0])
            lam = self.lambda1 + 2.0 * ks
            logpdf = _central_logpdf(lam[:, None], y[None, pos])
            out[pos] = np.exp(special.logsumexp(log_w[:, None] + logpdf, axis=0)) / self.c**2
        # x == 0: only the leading mixture term can contribute.
        at_zero = y == 0.0
        if np.any(at_zero):
            if self.lambda1 == 2.0:
                out[at_zero] = 0.5 * np.exp(-0.5 * self.lambda2) / self.c**2
            elif self.lambda1 < 2.0:
                out[at_zero] = np.inf
        return out if np.ndim(x) else float(out[0])

    def cdf(self, x) -> np.ndarray | float:
        """Poisson-weighted regularized lower incomplete gamma functions."""
        x_arr = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.maximum(x_arr, 0.0) / (2.0 * self.c**2)
        half_nc = 0.5 * self.lambda2
        n = _n_terms(half_nc)
        ks = np.arange(n)
        if half_nc > 0.0:
            w = np.exp(-half_nc + special.xlogy(ks, half_nc) - special.gammaln(ks + 1.0))
        else:
            w = np.array([1.0])
        terms = special.gammainc(0.5 * self.lambda1 + ks[:, None], y[None, :])
        out = w @ terms
        out[x_arr < 0.0] = 0.0
        out = np.clip(out, 0.0, 1.0)
        return out if np.ndim(x) else float(out[0])

    def charfn(self, omega) -> np.ndarray | complex:
        """E[exp(i omega X)], principal branch.

        1 - 2i c^2 omega stays in the right half-plane for real omega, so
        the principal power is the continuous one.
        """
        u = self.c**2 * np.asarray(omega, dtype=float)
        base = 1.0 - 2.0j * u
        val = np.exp(1j * self.lambda2 * u / base) * base ** (-0.5 * self.lambda1)
        return val if np.ndim(omega) else complex(val)

    def laplace(self, p) -> np.ndarray | complex:
        """E[exp(-p X)] for Re(p) >= 0."""
        q = self.c**2 * np.asarray(p)
        base = 1.0 + 2.0 * q
        val = np.exp(-self.lambda2 * q / base) * base ** (-0.5 * self.lambda1)
        return val if np.ndim(p) else complex(val) if np.iscomplexobj(val) else float(val)

    def divide(self, n: int) -> "SncChi2":
        """The law whose n-fold convolution is this one."""
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise ValueError(f"n must be a positive integer, got {n}")
        if n == 1:
            return self
        return replace(self, lambda1=self.lambda1 / n, lambda2=self.lambda2 / n)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """I.i.d. draws via the Gamma-Poisson mixture.

        N ~ Poisson(lambda2/2), X = c^2 * Gamma(lambda1/2 + N, scale 2);
        deterministic for a given generator state.
        """
        if count < 1:
            raise ValueError(f"count must be >= 1, got {count}")
        n_mix = rng.poisson(0.5 * self.lambda2, size=count)
        return self.c**2 * rng.gamma(shape=0.5 * self.lambda1 + n_mix, scale=2.0)
