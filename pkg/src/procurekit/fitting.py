"""Maximum-likelihood fitting of candidate demand families.

Three families are supported. ``truncated-normal`` is a normal core
restricted to a known interval; the interval is treated as part of the model,
not as an estimated quantity. ``pareto`` anchors a heavy right tail at a
scale equal to the sample minimum. ``negative-binomial`` models
overdispersed counts and rounds real-valued observations to the nearest
integer before fitting.

Every fit reports the log-likelihood, AIC, BIC, a histogram-density RMSE,
and the Kolmogorov-Smirnov statistic against the fitted distribution, so
families with different supports can be ranked on a common footing.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.special import betainc, gammaln, log_ndtr, ndtr

from .errors import (
    DegenerateDataError,
    FitConvergenceError,
    ProcureKitError,
    ValidationError,
)

FAMILIES = ("truncated-normal", "pareto", "negative-binomial")

_HISTOGRAM_BINS = 40
_FREE_PARAMS = 2  # every family estimates exactly two free parameters


@dataclass(frozen=True)
class FitReport:
    """One fitted family with its model-selection metrics.

    Attributes
    ----------
    family : str
        One of ``FAMILIES``.
    params : tuple of float
        Fitted parameter vector; see ``param_names`` for the layout.
    param_names : tuple of str
        Name of each entry in ``params``.
    n_free_params : int
        Number of estimated parameters (fixed support bounds do not count).
    log_likelihood : float
        Log-likelihood of the data at the fitted parameters.
    aic, bic : float
        Information criteria; smaller is better.
    rmse : float
        Root-mean-square gap between the fitted density and a 40-bin
        normalized histogram of the data, evaluated at bin centers.
    ks_statistic : float
        Largest absolute gap between the empirical and fitted CDFs.
    sample_size : int
        Number of observations the fit used.
    notes : tuple of str
        Caveats about how the fit was performed.
    """

    family: str
    params: tuple[float, ...]
    param_names: tuple[str, ...]
    n_free_params: int
    log_likelihood: float
    aic: float
    bic: float
    rmse: float
    ks_statistic: float
    sample_size: int
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class Comparison:
    """Ranked fits plus a record of any families that failed."""

    reports: tuple[FitReport, ...]
    warnings: tuple[str, ...]

    @property
    def best(self) -> FitReport:
        if not self.reports:
            raise FitConvergenceError("no family produced a usable fit")
        return self.reports[0]


def fit(
    family: str,
    data: Iterable[float],
    fixed_bounds: tuple[float, float] | None = None,
) -> FitReport:
    """Fit one family to a demand series by maximum likelihood.

    Parameters
    ----------
    family : str
        One of ``FAMILIES``.
    data : iterable of float
        Observed demand values; must be nonempty and finite.
    fixed_bounds : (float, float), optional
        Known support interval for the truncated-normal family. When
        omitted, the observed data range is used and a note is recorded.
        Not accepted for the other families.

    Returns
    -------
    FitReport

    Raises
    ------
    ValidationError
        Empty or non-finite data, data outside the declared support, or
        ``fixed_bounds`` passed to a family that has no bounds.
    DegenerateDataError
        The sample cannot identify the family's parameters (for example a
        constant series).
    FitConvergenceError
        The likelihood maximization failed to settle on an interior optimum.
    """
    if family not in FAMILIES:
        raise ValidationError(f"unknown family {family!r}; expected one of {FAMILIES}")
    x = np.asarray(data, dtype=float).ravel()
    if x.size == 0:
        raise ValidationError("data must be nonempty")
    if not np.all(np.isfinite(x)):
        raise ValidationError("data must be finite")
    # sorting makes every downstream sum and scan order-independent
    x = np.sort(x)
    if family == "truncated-normal":
        return _fit_truncated_normal(x, fixed_bounds)
    if fixed_bounds is not None:
        raise ValidationError("fixed_bounds applies only to the truncated-normal family")
    if family == "pareto":
        return _fit_pareto(x)
    return _fit_negative_binomial(x)


def compare(
    data: Iterable[float],
    families: Sequence[str] = FAMILIES,
    fixed_bounds: tuple[float, float] | None = None,
) -> Comparison:
    """Fit several families and rank them by information criteria.

    Reports are sorted ascending by AIC, with ties broken by BIC and then by
    family name. Families whose fit raises are excluded from the ranking and
    recorded in ``warnings`` instead.
    """
    fams = tuple(families)
    if not fams:
        raise ValidationError("at least one family is required")
    for fam in fams:
        if fam not in FAMILIES:
            raise ValidationError(f"unknown family {fam!r}; expected one of {FAMILIES}")
    if len(set(fams)) != len(fams):
        raise ValidationError("families must be distinct")

    reports: list[FitReport] = []
    warnings: list[str] = []
    for fam in fams:
        bounds = fixed_bounds if fam == "truncated-normal" else None
        try:
            reports.append(fit(fam, data, fixed_bounds=bounds))
        except ProcureKitError as exc:
            warnings.append(f"{fam}: {exc}")
    reports.sort(key=lambda r: (r.aic, r.bic, r.family))
    return Comparison(reports=tuple(reports), warnings=tuple(warnings))


def read_demand_series(path: str) -> np.ndarray:
    """Read a demand series from a single-column CSV with header ``demand``."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or [cell.strip() for cell in rows[0]] != ["demand"]:
        raise ValidationError(f"{path}: expected a single-column CSV with header 'demand'")
    values: list[float] = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or (len(row) == 1 and row[0].strip() == ""):
            continue
        if len(row) != 1:
            raise ValidationError(f"{path}:{lineno}: expected one value per row")
        try:
            values.append(float(row[0]))
        except ValueError as exc:
            raise ValidationError(f"{path}:{lineno}: not a number: {row[0]!r}") from exc
    if not values:
        raise ValidationError(f"{path}: no demand values found")
    return np.asarray(values, dtype=float)


def _information_criteria(log_likelihood: float, n: int) -> tuple[float, float]:
    aic = 2.0 * _FREE_PARAMS - 2.0 * log_likelihood
    bic = _FREE_PARAMS * math.log(n) - 2.0 * log_likelihood
    return aic, bic


def _ks_continuous(sorted_x: np.ndarray, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    # classic two-sided statistic: sup over jump points of the empirical CDF
    n = sorted_x.size
    f = np.asarray(cdf(sorted_x), dtype=float)
    upper_gap = np.max(np.arange(1, n + 1) / n - f)
    lower_gap = np.max(f - np.arange(0, n) / n)
    return float(max(upper_gap, lower_gap, 0.0))


def _ks_discrete(sorted_k: np.ndarray, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    # both CDFs are step functions; the sup is attained at a support point
    support = np.unique(sorted_k)
    empirical = np.searchsorted(sorted_k, support, side="right") / sorted_k.size
    return float(np.max(np.abs(empirical - np.asarray(cdf(support), dtype=float))))


def _histogram_rmse(x: np.ndarray, density: Callable[[np.ndarray], np.ndarray]) -> float:
    heights, edges = np.histogram(x, bins=_HISTOGRAM_BINS, density=True)
    centers = 0.5 * (edges[:-1] + edges[1:])
    gaps = heights - np.asarray(density(centers), dtype=float)
    return float(np.sqrt(np.mean(gaps**2)))


def _log_interval_mass(a_std: float, b_std: float) -> float:
    """Log of Phi(b_std) - Phi(a_std), stable when both lie in one far tail."""
    if a_std > 0.0:
        log_hi, log_lo = log_ndtr(-a_std), log_ndtr(-b_std)
    elif b_std < 0.0:
        log_hi, log_lo = log_ndtr(b_std), log_ndtr(a_std)
    else:
        return math.log(max(float(ndtr(b_std) - ndtr(a_std)), 5e-324))
    # cap the exponent just below zero so a fully cancelled difference stays finite
    return log_hi + math.log1p(-math.exp(min(log_lo - log_hi, -1e-18)))


def _fit_truncated_normal(
    x: np.ndarray, fixed_bounds: tuple[float, float] | None
) -> FitReport:
    notes: list[str] = []
    if fixed_bounds is None:
        lower, upper = float(x[0]), float(x[-1])
        notes.append("support bounds defaulted to the observed data range")
    else:
        lower, upper = (float(v) for v in fixed_bounds)
        if not (math.isfinite(lower) and math.isfinite(upper)) or lower >= upper:
            raise ValidationError("fixed_bounds must be finite with lower < upper")
        if x[0] < lower or x[-1] > upper:
            raise ValidationError("data fall outside the fixed support bounds")
    if x[0] == x[-1]:
        raise DegenerateDataError("constant data drive the scale estimate to zero")

    n = x.size
    mean = float(np.mean(x))
    half_log_two_pi = 0.5 * math.log(2.0 * math.pi)
    # compact search box: beyond ten support widths the shape over [lower,
    # upper] is indistinguishable from its limit, so the constrained MLE
    # always exists even for data no normal core can match
    width = upper - lower
    mu_lo, mu_hi = lower - 10.0 * width, upper + 10.0 * width
    log_sigma_lo, log_sigma_hi = math.log(1e-6 * width), math.log(10.0 * width)

    def fitted_mean(mu: float, sigma: float) -> float:
        a_std = (lower - mu) / sigma
        b_std = (upper - mu) / sigma
        log_mass = _log_interval_mass(a_std, b_std)
        edge_a = math.exp(-0.5 * a_std * a_std - half_log_two_pi - log_mass)
        edge_b = math.exp(-0.5 * b_std * b_std - half_log_two_pi - log_mass)
        return mu + sigma * (edge_a - edge_b)

    def best_mu(sigma: float) -> float:
        # for fixed sigma the likelihood is concave in mu and stationary
        # exactly where the fitted mean matches the sample mean
        def gap(mu: float) -> float:
            return fitted_mean(mu, sigma) - mean

        if gap(mu_lo) >= 0.0:
            return mu_lo
        if gap(mu_hi) <= 0.0:
            return mu_hi
        return float(brentq(gap, mu_lo, mu_hi, xtol=1e-10 * width, maxiter=200))

    def profile_nll(log_sigma: float) -> float:
        sigma = math.exp(log_sigma)
        mu = best_mu(sigma)
        a_std = (lower - mu) / sigma
        b_std = (upper - mu) / sigma
        log_mass = _log_interval_mass(a_std, b_std)
        quad = float(np.sum((x - mu) ** 2)) / (2.0 * sigma * sigma)
        return n * (log_sigma + log_mass + half_log_two_pi) + quad

    result = minimize_scalar(
        profile_nll,
        bounds=(log_sigma_lo, log_sigma_hi),
        method="bounded",
        options={"xatol": 1e-11},
    )
    if not result.success:
        raise FitConvergenceError("truncated-normal likelihood maximization did not converge")
    sigma_hat = math.exp(float(result.x))
    mu_hat = best_mu(sigma_hat)
    if float(result.x) >= log_sigma_hi - 1e-6:
        notes.append(
            "scale estimate capped at ten support widths; no normal core "
            "matches the sample dispersion"
        )
    if mu_hat <= mu_lo + 1e-6 * width or mu_hat >= mu_hi - 1e-6 * width:
        notes.append("location estimate hit the edge of the search box")

    # evaluate the fitted density and CDF in log space: extreme fits place
    # the core so far out that the raw interval mass underflows a double even
    # though the conditional distribution on [lower, upper] is well defined
    a_hat = (lower - mu_hat) / sigma_hat
    b_hat = (upper - mu_hat) / sigma_hat
    log_mass_hat = _log_interval_mass(a_hat, b_hat)

    def density(v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        z = (v - mu_hat) / sigma_hat
        body = np.exp(-0.5 * z * z - half_log_two_pi - log_mass_hat) / sigma_hat
        return np.where((v >= lower) & (v <= upper), body, 0.0)

    def cdf(v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        z = np.clip((v - mu_hat) / sigma_hat, a_hat, b_hat)
        parts = [
            0.0
            if point <= a_hat
            else math.exp(_log_interval_mass(a_hat, float(point)) - log_mass_hat)
            for point in np.ravel(z)
        ]
        return np.minimum(np.reshape(np.asarray(parts), z.shape), 1.0)

    log_likelihood = -float(result.fun)
    aic, bic = _information_criteria(log_likelihood, n)
    return FitReport(
        family="truncated-normal",
        params=(mu_hat, sigma_hat, lower, upper),
        param_names=("mu", "sigma", "lower", "upper"),
        n_free_params=_FREE_PARAMS,
        log_likelihood=log_likelihood,
        aic=aic,
        bic=bic,
        rmse=_histogram_rmse(x, density),
        ks_statistic=_ks_continuous(x, cdf),
        sample_size=n,
        notes=tuple(notes),
    )


def _fit_pareto(x: np.ndarray) -> FitReport:
    if x[0] <= 0.0:
        raise ValidationError("pareto requires strictly positive data")
    scale = float(x[0])
    log_ratio_sum = float(np.sum(np.log(x / scale)))
    if log_ratio_sum == 0.0:
        raise DegenerateDataError("constant data drive the tail index to infinity")
    n = x.size
    # closed-form MLE: scale at the sample minimum, shape from the log ratios
    shape = n / log_ratio_sum
    log_likelihood = (
        n * math.log(shape)
        + n * shape * math.log(scale)
        - (shape + 1.0) * float(np.sum(np.log(x)))
    )

    def cdf(v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        tail = np.where(v >= scale, (scale / np.maximum(v, scale)) ** shape, 1.0)
        return 1.0 - tail

    def density(v: np.ndarray) -> np.ndarray:
        # log space: scale**shape overflows for tightly clustered data
        v = np.asarray(v, dtype=float)
        log_body = (
            math.log(shape)
            + shape * math.log(scale)
            - (shape + 1.0) * np.log(np.maximum(v, scale))
        )
        return np.where(v >= scale, np.exp(log_body), 0.0)

    aic, bic = _information_criteria(log_likelihood, n)
    return FitReport(
        family="pareto",
        params=(shape, scale),
        param_names=("shape", "scale"),
        n_free_params=_FREE_PARAMS,
        log_likelihood=log_likelihood,
        aic=aic,
        bic=bic,
        rmse=_histogram_rmse(x, density),
        ks_statistic=_ks_continuous(x, cdf),
        sample_size=n,
    )


def _fit_negative_binomial(x: np.ndarray) -> FitReport:
    counts = np.rint(x).astype(np.int64)
    if counts[0] < 0:
        raise ValidationError("negative-binomial requires nonnegative counts after rounding")
    if counts[0] == counts[-1]:
        raise DegenerateDataError("constant counts leave the dispersion unidentified")
    n = counts.size
    mean = float(np.mean(counts))
    variance = float(np.var(counts))
    # the likelihood equation has an interior root only for overdispersed
    # counts; otherwise the supremum is the Poisson limit at infinite r
    if variance <= mean:
        raise FitConvergenceError(
            "negative-binomial dispersion has no interior maximizer: sample "
            f"variance ({variance:.6g}) does not exceed the mean ({mean:.6g})"
        )
    count_sum = float(np.sum(counts))
    log_factorials = float(np.sum(gammaln(counts + 1.0)))

    def negative_log_likelihood(log_r: float) -> float:
        r = math.exp(log_r)
        # for fixed r the success probability is profiled out analytically
        p = r / (r + mean)
        ll = float(np.sum(gammaln(counts + r))) - n * float(gammaln(r)) - log_factorials
        ll += n * r * math.log(p) + count_sum * math.log1p(-p)
        return -ll

    lo, hi = math.log(1e-6), math.log(1e9)
    result = minimize_scalar(
        negative_log_likelihood, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12}
    )
    if not result.success:
        raise FitConvergenceError("negative-binomial likelihood maximization did not converge")
    if result.x <= lo + 1e-6 or result.x >= hi - 1e-6:
        raise FitConvergenceError(
            "negative-binomial dispersion ran to a search bound instead of an "
            "interior maximum (sample variance must exceed the mean)"
        )
    r_hat = math.exp(float(result.x))
    p_hat = r_hat / (r_hat + mean)
    log_likelihood = -float(result.fun)

    def pmf(j: np.ndarray) -> np.ndarray:
        j = np.maximum(np.rint(np.asarray(j, dtype=float)), 0.0)
        log_pmf = (
            gammaln(j + r_hat)
            - gammaln(r_hat)
            - gammaln(j + 1.0)
            + r_hat * math.log(p_hat)
            + j * math.log1p(-p_hat)
        )
        return np.exp(log_pmf)

    def cdf(v: np.ndarray) -> np.ndarray:
        v = np.floor(np.asarray(v, dtype=float))
        inside = betainc(r_hat, np.maximum(v, 0.0) + 1.0, p_hat)
        return np.where(v < 0.0, 0.0, inside)

    aic, bic = _information_criteria(log_likelihood, n)
    floats = counts.astype(float)
    return FitReport(
        family="negative-binomial",
        params=(r_hat, p_hat),
        param_names=("r", "p"),
        n_free_params=_FREE_PARAMS,
        log_likelihood=log_likelihood,
        aic=aic,
        bic=bic,
        rmse=_histogram_rmse(floats, pmf),
        ks_statistic=_ks_discrete(counts, cdf),
        sample_size=n,
        notes=(
            "observations rounded to the nearest integer before fitting",
            "KS uses the discrete convention: supremum over observed support points",
        ),
    )
