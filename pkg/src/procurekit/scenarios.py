"""Declarative scenario engine for parameter studies on the procurement model.

A ScenarioSpec names a base model plus either a Cartesian grid over parameter
paths, a Latin hypercube design over parameter ranges, or a multi-cycle
adaptive simulation. Each cell re-optimizes the model and evaluates the
optimum by Monte Carlo. Results are plain rows, deterministic for a given
(spec, seed) no matter how many worker processes run the cells.

Seeding: every random stream is derived from the scenario seed and a fixed
namespace, never from execution order, so parallel runs reproduce serial
runs bit for bit.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .baseline import (
    BASELINE_DEMAND,
    BASELINE_MARKET,
    BASELINE_SUPPLIERS,
    DEFAULT_REPLICATIONS,
    DEFAULT_SEED,
)
from .demand import TruncatedNormal
from .economics import MarketEconomics, SupplierProfile
from .errors import (
    ProcureKitError,
    RankDeficientDesignError,
    ValidationError,
)
from .optimizer import optimal_quantity_given_alpha, optimize
from .profit import breakdown_from_draws, expected_profit_monte_carlo

SAMPLERS = ("grid", "latin-hypercube")

# SeedSequence spawn-key namespaces; cell streams never depend on run order
_NS_CELL_MC = 0
_NS_DESIGN = 1
_NS_DYNAMIC = 2
_NS_BUILD = 3


@dataclass(frozen=True)
class DynamicSpec:
    """Adaptive multi-cycle settings: declining adoption cost, penalty feedback.

    Cycle t uses adoption cost scale a3_initial - a3_decline * (t - 1). After
    each cycle the adoption level moves by learning_rate times the relative
    gap between the observed penalty rate and target_penalty, clamped to
    [0, 1].
    """

    cycles: int
    a3_initial: float
    a3_decline: float
    learning_rate: float
    target_penalty: float
    alpha_initial: float

    def __post_init__(self) -> None:
        if not isinstance(self.cycles, int) or self.cycles < 1:
            raise ValidationError(f"cycles must be a positive integer, got {self.cycles!r}")
        final_a3 = self.a3_initial - self.a3_decline * (self.cycles - 1)
        if self.a3_initial <= 0.0 or final_a3 <= 0.0:
            raise ValidationError(
                "adoption cost scale must stay positive over the horizon; "
                f"cycle {self.cycles} would reach {final_a3}"
            )
        if self.learning_rate <= 0.0:
            raise ValidationError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.target_penalty <= 0.0:
            raise ValidationError(
                f"target_penalty must be positive, got {self.target_penalty}"
            )
        if not 0.0 <= self.alpha_initial <= 1.0:
            raise ValidationError(
                f"alpha_initial must lie in [0, 1], got {self.alpha_initial}"
            )

    def a3_at(self, cycle: int) -> float:
        """Adoption cost scale in the given 1-indexed cycle."""
        return self.a3_initial - self.a3_decline * (cycle - 1)


@dataclass(frozen=True)
class ScenarioSpec:
    """One declarative experiment: base model, axes, sampling, and seeding.

    Axes are (parameter path, values) pairs. Grid specs enumerate the
    Cartesian product of the values; Latin hypercube specs read each values
    tuple as a (low, high) range. Supported paths are ``market.<field>``,
    ``demand.<field>``, and ``suppliers.beta_range`` (readiness scores
    redrawn uniformly from the given range, one per supplier).
    """

    id: str
    market: MarketEconomics
    suppliers: tuple[SupplierProfile, ...]
    demand: TruncatedNormal
    axes: tuple[tuple[str, tuple], ...] = ()
    sampler: str = "grid"
    lhs_samples: int = 0
    replications: int = DEFAULT_REPLICATIONS
    seed: int = DEFAULT_SEED
    dynamic: DynamicSpec | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValidationError("scenario id must be nonempty")
        if self.sampler not in SAMPLERS:
            raise ValidationError(f"sampler must be one of {SAMPLERS}, got {self.sampler!r}")
        if self.replications < 2:
            raise ValidationError(f"replications must be at least 2, got {self.replications}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ValidationError(f"seed must be a nonnegative integer, got {self.seed!r}")
        for axis in self.axes:
            if len(axis) != 2 or not isinstance(axis[0], str):
                raise ValidationError(f"axes entries must be (path, values) pairs, got {axis!r}")
            _validate_path(axis[0])
            if len(axis[1]) == 0:
                raise ValidationError(f"axis {axis[0]!r} has no values")
        if self.dynamic is not None:
            if self.axes or self.sampler != "grid":
                raise ValidationError("dynamic scenarios take no axes or sampler settings")
            return
        if self.sampler == "grid" and not self.axes:
            raise ValidationError("grid sampler requires at least one axis")
        if self.sampler == "latin-hypercube":
            if self.lhs_samples < 2:
                raise ValidationError(
                    f"latin-hypercube sampler requires lhs_samples >= 2, got {self.lhs_samples}"
                )
            for path, values in self.axes:
                if len(values) != 2 or not values[0] < values[1]:
                    raise ValidationError(
                        f"latin-hypercube axis {path!r} needs a (low, high) range, got {values!r}"
                    )


@dataclass(frozen=True)
class ScenarioResult:
    """One evaluated cell or cycle.

    ``coordinates`` holds the (parameter path, value) pairs that define the
    cell. Failed cells carry the failure text in ``status`` and NaN metrics;
    the run continues past them.
    """

    scenario_id: str
    cell_index: int
    coordinates: tuple[tuple[str, object], ...]
    alpha_star: float
    q_star: float
    expected_profit: float
    fill_rate: float
    penalty_rate: float
    kkt_max_residual: float
    std_error: float
    status: str = "ok"


@dataclass(frozen=True)
class _CellTask:
    scenario_id: str
    cell_index: int
    market: MarketEconomics
    suppliers: tuple[SupplierProfile, ...]
    demand: TruncatedNormal
    coordinates: tuple[tuple[str, object], ...]
    replications: int
    seed: int


_MARKET_FIELDS = frozenset(f.name for f in dataclasses.fields(MarketEconomics))
_DEMAND_FIELDS = frozenset(f.name for f in dataclasses.fields(TruncatedNormal))


def _validate_path(path: str) -> None:
    scope, _, field = path.partition(".")
    if scope == "market" and field in _MARKET_FIELDS:
        return
    if scope == "demand" and field in _DEMAND_FIELDS:
        return
    if scope == "suppliers" and field == "beta_range":
        return
    raise ValidationError(f"unsupported parameter path {path!r}")


def _apply_coordinate(
    market: MarketEconomics,
    suppliers: tuple[SupplierProfile, ...],
    demand: TruncatedNormal,
    path: str,
    value: object,
    build_rng: np.random.Generator,
) -> tuple[MarketEconomics, tuple[SupplierProfile, ...], TruncatedNormal]:
    scope, _, field = path.partition(".")
    try:
        if scope == "market":
            return dataclasses.replace(market, **{field: float(value)}), suppliers, demand
        if scope == "demand":
            return market, suppliers, dataclasses.replace(demand, **{field: float(value)})
    except TypeError as exc:
        raise ValidationError(f"unsupported parameter path {path!r}") from exc
    if scope == "suppliers" and field == "beta_range":
        lo, hi = (float(v) for v in value)
        if not 0.0 <= lo <= hi <= 1.0:
            raise ValidationError(f"beta_range must satisfy 0 <= low <= high <= 1, got {value!r}")
        redrawn = tuple(
            dataclasses.replace(s, beta=float(build_rng.uniform(lo, hi))) for s in suppliers
        )
        return market, redrawn, demand
    raise ValidationError(f"unsupported parameter path {path!r}")


def _evaluate_cell(task: _CellTask) -> ScenarioResult:
    try:
        market, suppliers, demand = task.market, task.suppliers, task.demand
        build_rng = np.random.default_rng(
            np.random.SeedSequence(task.seed, spawn_key=(_NS_BUILD, task.cell_index))
        )
        for path, value in task.coordinates:
            market, suppliers, demand = _apply_coordinate(
                market, suppliers, demand, path, value, build_rng
            )
        optimum = optimize(market, suppliers, demand)
        mc_rng = np.random.default_rng(
            np.random.SeedSequence(task.seed, spawn_key=(_NS_CELL_MC, task.cell_index))
        )
        breakdown = expected_profit_monte_carlo(
            market, suppliers, demand, optimum.decision, task.replications, mc_rng
        )
        return ScenarioResult(
            scenario_id=task.scenario_id,
            cell_index=task.cell_index,
            coordinates=task.coordinates,
            alpha_star=optimum.alpha_star,
            q_star=optimum.q_star,
            expected_profit=breakdown.expected_profit,
            fill_rate=breakdown.fill_rate_mean,
            penalty_rate=breakdown.penalty_rate,
            kkt_max_residual=optimum.kkt.max_residual,
            std_error=breakdown.std_error,
        )
    except ProcureKitError as exc:
        return ScenarioResult(
            scenario_id=task.scenario_id,
            cell_index=task.cell_index,
            coordinates=task.coordinates,
            alpha_star=math.nan,
            q_star=math.nan,
            expected_profit=math.nan,
            fill_rate=math.nan,
            penalty_rate=math.nan,
            kkt_max_residual=math.nan,
            std_error=math.nan,
            status=f"{type(exc).__name__}: {exc}",
        )


def _cell_coordinates(spec: ScenarioSpec) -> list[tuple[tuple[str, object], ...]]:
    if spec.sampler == "latin-hypercube":
        ranges = [(float(values[0]), float(values[1])) for _, values in spec.axes]
        design_rng = np.random.default_rng(
            np.random.SeedSequence(spec.seed, spawn_key=(_NS_DESIGN, 0))
        )
        design = latin_hypercube(ranges, spec.lhs_samples, design_rng)
        paths = [path for path, _ in spec.axes]
        return [
            tuple((path, float(point)) for path, point in zip(paths, row)) for row in design
        ]
    paths = [path for path, _ in spec.axes]
    value_lists = [values for _, values in spec.axes]
    return [
        tuple(zip(paths, combo)) for combo in itertools.product(*value_lists)
    ]


def run(spec: ScenarioSpec, jobs: int = 1) -> list[ScenarioResult]:
    """Evaluate every cell of a scenario, in deterministic cell order.

    Dynamic specs delegate to ``run_dynamic``. With ``jobs`` greater than
    one, cells are evaluated in a process pool; results are identical to a
    serial run because every random stream is keyed by cell index.
    """
    if spec.dynamic is not None:
        return run_dynamic(spec)
    if jobs < 1:
        raise ValidationError(f"jobs must be at least 1, got {jobs}")
    tasks = [
        _CellTask(
            scenario_id=spec.id,
            cell_index=index,
            market=spec.market,
            suppliers=spec.suppliers,
            demand=spec.demand,
            coordinates=coords,
            replications=spec.replications,
            seed=spec.seed,
        )
        for index, coords in enumerate(_cell_coordinates(spec))
    ]
    if jobs == 1 or len(tasks) == 1:
        return [_evaluate_cell(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_evaluate_cell, tasks))


def adaptive_alpha_update(
    alpha: float, observed_penalty: float, learning_rate: float, target_penalty: float
) -> float:
    """Penalty-feedback rule: step by the relative target gap, clamp to [0, 1]."""
    step = learning_rate * (observed_penalty - target_penalty) / target_penalty
    return min(1.0, max(0.0, alpha + step))


def run_dynamic(spec: ScenarioSpec) -> list[ScenarioResult]:
    """Simulate the adaptive cycle loop, one result row per cycle.

    Each cycle re-optimizes the order quantity at the current adoption level
    under that cycle's adoption cost scale, measures the penalty rate on a
    demand draw set shared across cycles (so trajectory differences reflect
    decisions, not resampling noise), then updates the adoption level.
    """
    dyn = spec.dynamic
    if dyn is None:
        raise ValidationError("run_dynamic requires a spec with dynamic settings")
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(_NS_DYNAMIC, 0)))
    draws = spec.demand.sample(rng, spec.replications)

    alpha = dyn.alpha_initial
    rows: list[ScenarioResult] = []
    for cycle in range(1, dyn.cycles + 1):
        market_t = dataclasses.replace(spec.market, a3=dyn.a3_at(cycle))
        decision = optimal_quantity_given_alpha(market_t, spec.suppliers, spec.demand, alpha)
        breakdown = breakdown_from_draws(market_t, spec.suppliers, spec.demand, decision, draws)
        rows.append(
            ScenarioResult(
                scenario_id=spec.id,
                cell_index=cycle - 1,
                coordinates=(("cycle", cycle), ("market.a3", dyn.a3_at(cycle))),
                alpha_star=alpha,
                q_star=decision.total,
                expected_profit=breakdown.expected_profit,
                fill_rate=breakdown.fill_rate_mean,
                penalty_rate=breakdown.penalty_rate,
                kkt_max_residual=math.nan,
                std_error=breakdown.std_error,
            )
        )
        alpha = adaptive_alpha_update(
            alpha, breakdown.penalty_rate, dyn.learning_rate, dyn.target_penalty
        )
    return rows


def latin_hypercube(
    ranges: list[tuple[float, float]], n: int, rng: np.random.Generator
) -> np.ndarray:
    """Stratified design: one sample per equal-width stratum per dimension.

    Returns an (n, len(ranges)) array. Strata are permuted independently per
    dimension, with a uniform draw inside each stratum.
    """
    if n < 2:
        raise ValidationError(f"latin hypercube needs n >= 2, got {n}")
    if not ranges:
        raise ValidationError("latin hypercube needs at least one dimension")
    design = np.empty((n, len(ranges)))
    for j, (lo, hi) in enumerate(ranges):
        lo, hi = float(lo), float(hi)
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ValidationError(f"dimension {j} needs finite low < high, got ({lo}, {hi})")
        strata = rng.permutation(n)
        offsets = rng.random(n)
        design[:, j] = lo + (strata + offsets) / n * (hi - lo)
    return design


def variance_decomposition(samples: np.ndarray, responses: np.ndarray) -> np.ndarray:
    """Percentage of response variance attributed to each parameter.

    Fits ordinary least squares on standardized parameters; the contribution
    of parameter j is its squared standardized coefficient, normalized to
    sum to 100 percent.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(responses, dtype=float).ravel()
    n, k = x.shape
    if n < 10:
        raise ValidationError(f"variance decomposition needs at least 10 samples, got {n}")
    if y.size != n:
        raise ValidationError(f"got {n} samples but {y.size} responses")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValidationError("samples and responses must be finite")
    if y.std() == 0.0:
        raise ValidationError("responses do not vary with the parameters")
    stds = x.std(axis=0)
    if np.any(stds == 0.0):
        constant = int(np.argmax(stds == 0.0))
        raise RankDeficientDesignError(f"parameter column {constant} is constant")
    standardized = (x - x.mean(axis=0)) / stds
    design = np.column_stack([np.ones(n), standardized])
    coefs, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < k + 1:
        raise RankDeficientDesignError(
            f"design has rank {rank}, need {k + 1}; parameters are collinear"
        )
    weights = coefs[1:] ** 2
    total = float(weights.sum())
    if total == 0.0:
        raise ValidationError("responses do not vary with the parameters")
    return 100.0 * weights / total


PRESET_IDS = ("s1", "s2", "s3", "s4", "s5", "s6", "s7", "s8", "s9", "s10", "s11")


def preset(
    preset_id: str,
    seed: int = DEFAULT_SEED,
    replications: int = DEFAULT_REPLICATIONS,
) -> ScenarioSpec:
    """Build one of the shipped scenario presets s1 through s11."""
    base = dict(
        id=preset_id,
        market=BASELINE_MARKET,
        suppliers=BASELINE_SUPPLIERS,
        demand=BASELINE_DEMAND,
        seed=seed,
        replications=replications,
    )
    if preset_id == "s1":
        return ScenarioSpec(axes=(("demand.sigma", (5.0, 8.0, 12.0, 15.0)),), **base)
    if preset_id == "s2":
        return ScenarioSpec(axes=(("demand.upper", (65.0, 70.0, 75.0, 80.0)),), **base)
    if preset_id == "s3":
        return ScenarioSpec(
            axes=(
                ("demand.sigma", (5.0, 8.0, 12.0, 15.0)),
                ("demand.upper", (65.0, 70.0, 75.0, 80.0)),
            ),
            **base,
        )
    if preset_id == "s4":
        return ScenarioSpec(
            axes=(("suppliers.beta_range", ((0.4, 0.6), (0.3, 0.7), (0.1, 0.9))),), **base
        )
    if preset_id == "s5":
        return ScenarioSpec(
            axes=(("market.a3", (500.0, 1000.0, 2000.0, 3000.0, 4000.0)),), **base
        )
    if preset_id == "s6":
        return ScenarioSpec(
            axes=(("market.a1", (2.0, 3.5, 5.0)), ("market.a3", (500.0, 2000.0, 4000.0))),
            **base,
        )
    if preset_id == "s7":
        return ScenarioSpec(
            axes=(("demand.sigma", (5.0, 8.0, 12.0)), ("market.a3", (500.0, 2000.0, 4000.0))),
            **base,
        )
    if preset_id == "s8":
        return ScenarioSpec(
            axes=(("market.a3", (10_000.0, 20_000.0, 40_000.0, 60_000.0, 80_000.0)),), **base
        )
    if preset_id == "s9":
        return ScenarioSpec(
            axes=(
                ("demand.sigma", (5.0, 15.0)),
                ("demand.upper", (65.0, 80.0)),
                ("market.a3", (500.0, 4000.0)),
            ),
            sampler="latin-hypercube",
            lhs_samples=100,
            **base,
        )
    if preset_id == "s10":
        return ScenarioSpec(
            axes=(
                ("demand.sigma", (5.0, 7.5, 10.0, 12.5, 15.0)),
                ("market.a3", (500.0, 1375.0, 2250.0, 3125.0, 4000.0)),
            ),
            **base,
        )
    if preset_id == "s11":
        base["demand"] = dataclasses.replace(BASELINE_DEMAND, sigma=12.0)
        return ScenarioSpec(
            dynamic=DynamicSpec(
                cycles=10,
                a3_initial=3000.0,
                a3_decline=200.0,
                learning_rate=0.05,
                target_penalty=0.05,
                alpha_initial=0.2,
            ),
            **base,
        )
    raise ValidationError(f"unknown preset {preset_id!r}; expected one of {PRESET_IDS}")
