"""Expected-profit evaluation for a joint (alpha, order vector) decision.

Two interchangeable routes are provided. The closed form uses the demand
model's partial expectations and is exact up to quadrature on the fill-rate
integrals; it is what the optimizer climbs. The Monte Carlo route estimates
the same breakdown from simulated demand and also reports a standard error,
which is what scenario experiments record. Evaluating several decisions
against generators seeded identically yields common random numbers, so
decision differences are estimated without cross-decision noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .demand import TruncatedNormal
from .economics import MarketEconomics, SupplierProfile
from .errors import ValidationError

__all__ = [
    "Decision",
    "ProfitBreakdown",
    "FillRateSummary",
    "expected_profit_closed_form",
    "expected_profit_value",
    "expected_profit_monte_carlo",
    "breakdown_from_draws",
    "fill_rate_distribution",
]

# Gauss-Legendre nodes for the smooth 1/x fill integrals; 200 points is far
# beyond the accuracy anything downstream consumes.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(200)


@dataclass(frozen=True)
class Decision:
    """Contract-automation intensity plus per-supplier order quantities."""

    alpha: float
    quantities: tuple[float, ...]

    def __post_init__(self) -> None:
        if not (math.isfinite(self.alpha) and 0.0 <= self.alpha <= 1.0):
            raise ValidationError(f"alpha must lie in [0, 1], got {self.alpha!r}")
        if not self.quantities:
            raise ValidationError("decision needs at least one order quantity")
        for i, q in enumerate(self.quantities):
            if not (math.isfinite(q) and q >= 0.0):
                raise ValidationError(f"quantities[{i}] must be nonnegative, got {q!r}")

    @property
    def total(self) -> float:
        return float(sum(self.quantities))


@dataclass(frozen=True)
class ProfitBreakdown:
    """Expected profit and its components, all in USD per cycle.

    expected_profit always equals expected_revenue + expected_salvage
    - expected_penalty - procurement_cost - adoption_cost, exactly as floats.
    std_error is zero for closed-form evaluations. Fill metrics are NaN when
    the demand support touches zero (fill = served/demand is undefined there).
    """

    expected_revenue: float
    expected_salvage: float
    expected_penalty: float
    procurement_cost: float
    adoption_cost: float
    expected_profit: float
    fill_rate_mean: float
    penalty_rate: float
    fill_rate_cvar10: float
    std_error: float


@dataclass(frozen=True)
class FillRateSummary:
    """Distributional summary of per-cycle fill rate min(Q, D) / D."""

    mean: float
    std: float
    cv: float
    p10: float
    p25: float
    p50: float
    p75: float
    p90: float
    prob_fill_ge_090: float
    cvar10: float


def _check_decision(suppliers: Sequence[SupplierProfile], decision: Decision) -> None:
    if len(decision.quantities) != len(suppliers):
        raise ValidationError(
            f"decision carries {len(decision.quantities)} quantities for "
            f"{len(suppliers)} suppliers"
        )


def _procurement_cost(
    market: MarketEconomics, suppliers: Sequence[SupplierProfile], decision: Decision
) -> float:
    return float(
        sum(
            market.unit_cost(sup, decision.alpha) * q
            for sup, q in zip(suppliers, decision.quantities)
            if q > 0.0
        )
    )


def _mean_inverse(demand: TruncatedNormal, lo: float, hi: float) -> float:
    """integral of f(x)/x over [lo, hi]; requires lo > 0."""
    if hi <= lo:
        return 0.0
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = mid + half * _GL_NODES
    return float(half * np.sum(_GL_WEIGHTS * demand.pdf(x) / x))


def _closed_form_fill_mean(demand: TruncatedNormal, q: float) -> float:
    if q >= demand.upper:
        return 1.0
    start = max(q, demand.lower)
    return demand.cdf(q) + q * _mean_inverse(demand, start, demand.upper)


def _closed_form_cvar10(demand: TruncatedNormal, q: float) -> float:
    # Fill is nonincreasing in demand, so the worst decile of fills is exactly
    # the top decile of demand.
    if q >= demand.upper:
        return 1.0
    q90 = demand.quantile(0.9)
    if q <= q90:
        return 10.0 * q * _mean_inverse(demand, q90, demand.upper)
    full = demand.cdf(q) - 0.9
    return 10.0 * (full + q * _mean_inverse(demand, q, demand.upper))


def _closed_form_components(
    market: MarketEconomics,
    suppliers: Sequence[SupplierProfile],
    demand: TruncatedNormal,
    decision: Decision,
) -> tuple[float, float, float, float, float, float]:
    q_total = decision.total
    excess = demand.expected_excess(q_total)
    served = demand.mean - excess
    revenue = market.price * served
    salvage = market.salvage * (q_total - served)
    penalty = market.penalty * excess
    procurement = _procurement_cost(market, suppliers, decision)
    adoption = market.adoption_cost(decision.alpha)
    return revenue, salvage, penalty, procurement, adoption, excess


def expected_profit_value(
    market: MarketEconomics,
    suppliers: Sequence[SupplierProfile],
    demand: TruncatedNormal,
    decision: Decision,
) -> float:
    """Closed-form expected profit alone, skipping the fill-rate quadrature.

    Same number as expected_profit_closed_form(...).expected_profit; this is
    the cheap path the optimizer evaluates a few hundred times per solve.
    """
    _check_decision(suppliers, decision)
    revenue, salvage, penalty, procurement, adoption, _ = _closed_form_components(
        market, suppliers, demand, decision
    )
    return revenue + salvage - penalty - procurement - adoption


def expected_profit_closed_form(
    market: MarketEconomics,
    suppliers: Sequence[SupplierProfile],
    demand: TruncatedNormal,
    decision: Decision,
) -> ProfitBreakdown:
    """Exact expected-profit breakdown via partial expectations."""
    _check_decision(suppliers, decision)
    q_total = decision.total
    revenue, salvage, penalty, procurement, adoption, excess = _closed_form_components(
        market, suppliers, demand, decision
    )
    profit = revenue + salvage - penalty - procurement - adoption

    if demand.lower > 0.0:
        fill_mean = _closed_form_fill_mean(demand, q_total)
        cvar10 = _closed_form_cvar10(demand, q_total)
    else:
        fill_mean = math.nan
        cvar10 = math.nan

    return ProfitBreakdown(
        expected_revenue=revenue,
        expected_salvage=salvage,
        expected_penalty=penalty,
        procurement_cost=procurement,
        adoption_cost=adoption,
        expected_profit=profit,
        fill_rate_mean=fill_mean,
        penalty_rate=excess / demand.mean,
        fill_rate_cvar10=cvar10,
        std_error=0.0,
    )


def breakdown_from_draws(
    market: MarketEconomics,
    suppliers: Sequence[SupplierProfile],
    demand: TruncatedNormal,
    decision: Decision,
    draws: np.ndarray,
) -> ProfitBreakdown:
    """Monte Carlo breakdown from an existing demand draw vector.

    Passing the same draws to several decisions gives common random numbers:
    the sampling noise cancels out of decision-to-decision differences.
    """
    _check_decision(suppliers, decision)
    draws = np.asarray(draws, dtype=float)
    n = draws.size
    if n < 2:
        raise ValidationError(f"need at least 2 draws for a Monte Carlo estimate, got {n}")

    q_total = decision.total
    served = np.minimum(q_total, draws)
    leftover = q_total - served
    shortfall = draws - served

    procurement = _procurement_cost(market, suppliers, decision)
    adoption = market.adoption_cost(decision.alpha)

    revenue = market.price * float(served.mean())
    salvage = market.salvage * float(leftover.mean())
    penalty = market.penalty * float(shortfall.mean())
    profit = revenue + salvage - penalty - procurement - adoption

    per_rep = (
        market.price * served
        + market.salvage * leftover
        - market.penalty * shortfall
        - (procurement + adoption)
    )
    std_error = float(per_rep.std(ddof=1)) / math.sqrt(n)

    if demand.lower > 0.0:
        fills = served / draws
        k = max(1, n // 10)
        worst = np.partition(fills, k - 1)[:k]
        fill_mean = float(fills.mean())
        cvar10 = float(worst.mean())
    else:
        fill_mean = math.nan
        cvar10 = math.nan

    return ProfitBreakdown(
        expected_revenue=revenue,
        expected_salvage=salvage,
        expected_penalty=penalty,
        procurement_cost=procurement,
        adoption_cost=adoption,
        expected_profit=profit,
        fill_rate_mean=fill_mean,
        penalty_rate=float(shortfall.mean()) / float(draws.mean()),
        fill_rate_cvar10=cvar10,
        std_error=std_error,
    )


def expected_profit_monte_carlo(
    market: MarketEconomics,
    suppliers: Sequence[SupplierProfile],
    demand: TruncatedNormal,
    decision: Decision,
    n: int,
    rng: np.random.Generator,
) -> ProfitBreakdown:
    """Monte Carlo breakdown from n fresh inverse-CDF draws."""
    return breakdown_from_draws(market, suppliers, demand, decision, demand.sample(rng, n))


def fill_rate_distribution(
    demand: TruncatedNormal, q: float, n: int, rng: np.random.Generator
) -> FillRateSummary:
    """Simulated distribution of the fill rate at supply level q.

    Requires a strictly positive demand support. Percentiles use linear
    interpolation; cvar10 is the mean of the lowest floor(n/10) fills.
    """
    if demand.lower <= 0.0:
        raise ValidationError("fill rate needs strictly positive demand support")
    if q < 0.0:
        raise ValidationError(f"supply level must be nonnegative, got {q!r}")
    if n < 10:
        raise ValidationError(f"need at least 10 draws to summarize fills, got {n}")

    draws = demand.sample(rng, n)
    fills = np.minimum(q, draws) / draws
    k = max(1, n // 10)
    worst = np.partition(fills, k - 1)[:k]
    mean = float(fills.mean())
    std = float(fills.std(ddof=1))
    p10, p25, p50, p75, p90 = (float(v) for v in np.percentile(fills, [10, 25, 50, 75, 90]))
    return FillRateSummary(
        mean=mean,
        std=std,
        cv=std / mean if mean else math.inf,
        p10=p10,
        p25=p25,
        p50=p50,
        p75=p75,
        p90=p90,
        prob_fill_ge_090=float((fills >= 0.9).mean()),
        cvar10=float(worst.mean()),
    )
