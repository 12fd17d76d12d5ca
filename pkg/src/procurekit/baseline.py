"""Canonical baseline parameterization shared by scenario presets and the CLI.

Price and salvage have no authoritative source values, so the defaults below
are documented choices: a 150 USD selling price and a 20 USD salvage value
around the roughly 92 to 98 USD effective unit costs of the supplier pool,
giving an interior critical fractile.
"""

from __future__ import annotations

from .demand import TruncatedNormal
from .economics import MarketEconomics, SupplierProfile

BASELINE_MARKET = MarketEconomics(
    price=150.0,
    salvage=20.0,
    penalty=40.0,
    a1=5.0,
    a2=8.0,
    a3=2000.0,
    nu=1.5,
)

BASELINE_SUPPLIERS = (
    SupplierProfile(id=1, base_cost=100.0, beta=0.20),
    SupplierProfile(id=2, base_cost=102.0, beta=0.50),
    SupplierProfile(id=3, base_cost=98.0, beta=0.70),
)

BASELINE_DEMAND = TruncatedNormal(mu=50.0, sigma=8.0, lower=30.0, upper=70.0)

DEFAULT_REPLICATIONS = 5_000
DEFAULT_SEED = 42
