"""Procurement planning toolkit: bounded-demand newsvendor economics with
digital-contract adoption, scenario experiments, and demand model fitting."""

from .baseline import (
    BASELINE_DEMAND,
    BASELINE_MARKET,
    BASELINE_SUPPLIERS,
    DEFAULT_REPLICATIONS,
    DEFAULT_SEED,
)
from .config import RunConfig, apply_overrides, baseline_config, load_config, parse_config
from .demand import TruncatedNormal
from .economics import (
    MarketEconomics,
    ReadinessComponents,
    SupplierProfile,
    adoption_cost,
    adoption_cost_slope,
    cheapest_supplier,
    composite_beta,
    unit_cost,
)
from .errors import (
    DegenerateDataError,
    DegenerateEconomicsError,
    FitConvergenceError,
    InvalidDistributionError,
    NegativeUnitCostError,
    ProcureKitError,
    RankDeficientDesignError,
    ThresholdNotFoundError,
    ValidationError,
)
from .fitting import FAMILIES, Comparison, FitReport, compare, fit, read_demand_series
from .optimizer import (
    KKTReport,
    Optimum,
    adoption_threshold,
    critical_fractile,
    kkt_residuals,
    optimal_quantity_given_alpha,
    optimize,
)
from .profit import (
    Decision,
    FillRateSummary,
    ProfitBreakdown,
    breakdown_from_draws,
    expected_profit_closed_form,
    expected_profit_monte_carlo,
    expected_profit_value,
    fill_rate_distribution,
)
from .scenarios import (
    PRESET_IDS,
    DynamicSpec,
    ScenarioResult,
    ScenarioSpec,
    adaptive_alpha_update,
    latin_hypercube,
    preset,
    run,
    run_dynamic,
    variance_decomposition,
)

__version__ = "0.1.0"

__all__ = [
    "BASELINE_DEMAND",
    "BASELINE_MARKET",
    "BASELINE_SUPPLIERS",
    "Comparison",
    "DEFAULT_REPLICATIONS",
    "DEFAULT_SEED",
    "Decision",
    "DegenerateDataError",
    "DegenerateEconomicsError",
    "DynamicSpec",
    "FAMILIES",
    "FillRateSummary",
    "FitConvergenceError",
    "FitReport",
    "InvalidDistributionError",
    "KKTReport",
    "MarketEconomics",
    "NegativeUnitCostError",
    "Optimum",
    "PRESET_IDS",
    "ProcureKitError",
    "ProfitBreakdown",
    "RankDeficientDesignError",
    "ReadinessComponents",
    "RunConfig",
    "ScenarioResult",
    "ScenarioSpec",
    "SupplierProfile",
    "ThresholdNotFoundError",
    "TruncatedNormal",
    "ValidationError",
    "adaptive_alpha_update",
    "adoption_cost",
    "adoption_cost_slope",
    "adoption_threshold",
    "apply_overrides",
    "baseline_config",
    "breakdown_from_draws",
    "cheapest_supplier",
    "compare",
    "composite_beta",
    "critical_fractile",
    "expected_profit_closed_form",
    "expected_profit_monte_carlo",
    "expected_profit_value",
    "fill_rate_distribution",
    "fit",
    "kkt_residuals",
    "latin_hypercube",
    "load_config",
    "optimal_quantity_given_alpha",
    "optimize",
    "parse_config",
    "preset",
    "read_demand_series",
    "run",
    "run_dynamic",
    "unit_cost",
    "variance_decomposition",
    "__version__",
]
