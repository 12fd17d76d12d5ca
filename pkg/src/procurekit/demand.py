"""Truncated normal demand model.

Demand is a normal variable restricted to a closed interval [lower, upper].
All quantities used elsewhere in the package (moments, quantiles, partial
expectations) have closed forms in terms of the standard normal pdf/cdf, so
nothing here is estimated by simulation. Sampling uses the inverse CDF, which
consumes exactly one uniform draw per sample and therefore keeps parallel
streams reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import InvalidDistributionError, ValidationError

__all__ = ["TruncatedNormal"]

_SQRT_2PI = math.sqrt(2.0 * math.pi)

# Below this much untruncated mass the normalized pdf is numerically garbage.
_MIN_MASS = 1e-12


def _norm_pdf(z):
    return np.exp(-0.5 * np.square(z)) / _SQRT_2PI


def _norm_cdf(z):
    # Complementary error function keeps the lower tail accurate.
    return 0.5 * special.erfc(-z / math.sqrt(2.0))


def _norm_quantile(p):
    return special.ndtri(p)


@dataclass(frozen=True)
class TruncatedNormal:
    """Normal distribution conditioned on lying within [lower, upper].

    Parameters
    ----------
    mu : float
        Location of the parent normal.
    sigma : float
        Scale of the parent normal, strictly positive.
    lower, upper : float
        Truncation bounds, finite with lower < upper.

    Raises
    ------
    InvalidDistributionError
        If sigma <= 0, the bounds are not ordered, or the parent normal
        places less than 1e-12 probability mass inside the bounds.
    """

    mu: float
    sigma: float
    lower: float
    upper: float

    def __post_init__(self) -> None:
        for name in ("mu", "sigma", "lower", "upper"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidDistributionError(f"{name} must be finite, got {value!r}")
        if self.sigma <= 0.0:
            raise InvalidDistributionError(f"sigma must be positive, got {self.sigma}")
        if not self.lower < self.upper:
            raise InvalidDistributionError(
                f"bounds must satisfy lower < upper, got [{self.lower}, {self.upper}]"
            )
        a = (self.lower - self.mu) / self.sigma
        b = (self.upper - self.mu) / self.sigma
        mass = float(_norm_cdf(b) - _norm_cdf(a))
        if mass < _MIN_MASS:
            raise InvalidDistributionError(
                f"truncation interval [{self.lower}, {self.upper}] captures "
                f"{mass:.3e} of the parent normal; refusing to normalize"
            )
        object.__setattr__(self, "_a", a)
        object.__setattr__(self, "_b", b)
        object.__setattr__(self, "_mass", mass)
        object.__setattr__(self, "_cdf_lower", float(_norm_cdf(a)))

    # -- densities -----------------------------------------------------------

    def pdf(self, x):
        """Density at x (scalar or array). Zero outside the bounds."""
        x = np.asarray(x, dtype=float)
        z = (x - self.mu) / self.sigma
        inside = (x >= self.lower) & (x <= self.upper)
        out = np.where(inside, _norm_pdf(z) / (self.sigma * self._mass), 0.0)
        return float(out) if out.ndim == 0 else out

    def cdf(self, x):
        """P(D <= x) for scalar or array x."""
        x = np.asarray(x, dtype=float)
        z = (x - self.mu) / self.sigma
        raw = (_norm_cdf(z) - self._cdf_lower) / self._mass
        out = np.where(x <= self.lower, 0.0, np.where(x >= self.upper, 1.0, np.clip(raw, 0.0, 1.0)))
        return float(out) if out.ndim == 0 else out

    def quantile(self, u):
        """Inverse CDF at u in [0, 1] (scalar or array).

        Raises ValidationError if any u falls outside [0, 1].
        """
        u = np.asarray(u, dtype=float)
        if np.any((u < 0.0) | (u > 1.0) | ~np.isfinite(u)):
            raise ValidationError("quantile argument must lie in [0, 1]")
        p = self._cdf_lower + u * self._mass
        x = self.mu + self.sigma * _norm_quantile(np.clip(p, 1e-300, 1.0 - 1e-16))
        out = np.clip(x, self.lower, self.upper)
        out = np.where(u == 0.0, self.lower, np.where(u == 1.0, self.upper, out))
        return float(out) if out.ndim == 0 else out

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw n samples by inverse-CDF transform of rng.random(n)."""
        if n < 0:
            raise ValidationError(f"sample size must be nonnegative, got {n}")
        return self.quantile(rng.random(n)) if n else np.empty(0)

    # -- moments and partial expectations -------------------------------------

    @property
    def mean(self) -> float:
        a, b, z = self._a, self._b, self._mass
        return self.mu + self.sigma * float(_norm_pdf(a) - _norm_pdf(b)) / z

    @property
    def variance(self) -> float:
        a, b, z = self._a, self._b, self._mass
        pa, pb = float(_norm_pdf(a)), float(_norm_pdf(b))
        tilt = (a * pa - b * pb) / z
        shift = (pa - pb) / z
        return self.sigma**2 * (1.0 + tilt - shift**2)

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    def expected_excess(self, q: float) -> float:
        """E[(D - q)^+], the expected demand above a supply level q."""
        if q >= self.upper:
            return 0.0
        if q <= self.lower:
            return self.mean - q
        t = (q - self.mu) / self.sigma
        tail = float(_norm_cdf(self._b) - _norm_cdf(t))
        return ((self.mu - q) * tail + self.sigma * float(_norm_pdf(t) - _norm_pdf(self._b))) / self._mass

    def expected_min(self, q: float) -> float:
        """E[min(q, D)], the expected quantity served when q units are on hand."""
        return self.mean - self.expected_excess(q)
