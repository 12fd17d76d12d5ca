"""YAML run configuration: model parameters, seeding, and scenario selection.

A config file is one YAML document with sections mirroring the model types:
``market``, ``suppliers``, ``demand``, plus ``seed``, ``replications``, and
an optional ``scenario`` section for a custom parameter study. Every section
is optional; omitted sections fall back to the shipped baseline. Validation
errors carry the source file and the line of the nearest enclosing mapping.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

import yaml

from .baseline import (
    BASELINE_DEMAND,
    BASELINE_MARKET,
    BASELINE_SUPPLIERS,
    DEFAULT_REPLICATIONS,
    DEFAULT_SEED,
)
from .demand import TruncatedNormal
from .economics import MarketEconomics, SupplierProfile
from .errors import ValidationError
from .scenarios import DynamicSpec, ScenarioSpec

_LINE_KEY = "__line__"


class _TrackedLoader(yaml.SafeLoader):
    """SafeLoader that stamps each mapping with its 1-based source line."""


def _construct_tracked_mapping(loader: _TrackedLoader, node: yaml.MappingNode) -> dict:
    mapping = loader.construct_mapping(node, deep=True)
    mapping[_LINE_KEY] = node.start_mark.line + 1
    return mapping


_TrackedLoader.add_constructor(
    yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_tracked_mapping
)


@dataclass(frozen=True)
class RunConfig:
    """Fully validated run settings: model, seeding, optional scenario."""

    market: MarketEconomics
    suppliers: tuple[SupplierProfile, ...]
    demand: TruncatedNormal
    seed: int = DEFAULT_SEED
    replications: int = DEFAULT_REPLICATIONS
    scenario: ScenarioSpec | None = None


def baseline_config() -> RunConfig:
    """The shipped baseline parameterization with default seeding."""
    return RunConfig(
        market=BASELINE_MARKET,
        suppliers=BASELINE_SUPPLIERS,
        demand=BASELINE_DEMAND,
    )


def load_config(path: str | Path) -> RunConfig:
    """Read and validate a YAML config file."""
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), source=str(path))


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Validate YAML config text; ``source`` labels error messages."""
    try:
        raw = yaml.load(text, Loader=_TrackedLoader)
    except yaml.MarkedYAMLError as exc:
        line = exc.problem_mark.line + 1 if exc.problem_mark else 0
        raise ValidationError(f"{source}:{line}: invalid YAML: {exc.problem}") from exc
    except yaml.YAMLError as exc:
        raise ValidationError(f"{source}: invalid YAML: {exc}") from exc
    if raw is None:
        raw = {}
    root = _Section("config", raw, source, line=1)

    market = _parse_market(root)
    suppliers = _parse_suppliers(root)
    demand = _parse_demand(root)
    seed = root.get_int("seed", DEFAULT_SEED, minimum=0)
    replications = root.get_int("replications", DEFAULT_REPLICATIONS, minimum=2)
    scenario = _parse_scenario(root, market, suppliers, demand, seed, replications)
    root.reject_unknown_keys(
        ("market", "suppliers", "demand", "seed", "replications", "scenario")
    )
    return RunConfig(
        market=market,
        suppliers=suppliers,
        demand=demand,
        seed=seed,
        replications=replications,
        scenario=scenario,
    )


def apply_overrides(
    config: RunConfig, seed: int | None = None, replications: int | None = None
) -> RunConfig:
    """Return a copy with command-line seed/replications applied throughout."""
    if seed is None and replications is None:
        return config
    updates: dict = {}
    if seed is not None:
        if seed < 0:
            raise ValidationError(f"seed must be a nonnegative integer, got {seed}")
        updates["seed"] = seed
    if replications is not None:
        if replications < 2:
            raise ValidationError(f"replications must be at least 2, got {replications}")
        updates["replications"] = replications
    if config.scenario is not None:
        updates["scenario"] = dataclasses.replace(config.scenario, **updates)
    return dataclasses.replace(config, **updates)


@dataclass
class _Section:
    """One YAML mapping plus the context needed for precise error messages."""

    name: str
    data: dict
    source: str
    line: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.data, dict):
            raise ValidationError(
                f"{self.source}:{self.line}: {self.name} must be a mapping, "
                f"got {type(self.data).__name__}"
            )
        self.line = self.data.get(_LINE_KEY, self.line)

    def error(self, message: str) -> ValidationError:
        return ValidationError(f"{self.source}:{self.line}: {self.name}: {message}")

    def keys(self) -> list[str]:
        return [k for k in self.data if k != _LINE_KEY]

    def reject_unknown_keys(self, known: tuple[str, ...]) -> None:
        unknown = [k for k in self.keys() if k not in known]
        if unknown:
            raise self.error(f"unknown keys {unknown}; expected a subset of {list(known)}")

    def subsection(self, key: str) -> "_Section | None":
        if key not in self.data:
            return None
        return _Section(f"{self.name}.{key}", self.data[key], self.source, self.line)

    def get_float(self, key: str, default: float | None = None) -> float:
        if key not in self.data:
            if default is None:
                raise self.error(f"missing required key {key!r}")
            return default
        value = self.data[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise self.error(f"{key} must be a number, got {value!r}")
        return float(value)

    def get_int(self, key: str, default: int | None = None, minimum: int | None = None) -> int:
        if key not in self.data:
            if default is None:
                raise self.error(f"missing required key {key!r}")
            return default
        value = self.data[key]
        if isinstance(value, bool) or not isinstance(value, int):
            raise self.error(f"{key} must be an integer, got {value!r}")
        if minimum is not None and value < minimum:
            raise self.error(f"{key} must be at least {minimum}, got {value}")
        return value

    def get_str(self, key: str, default: str | None = None) -> str:
        if key not in self.data:
            if default is None:
                raise self.error(f"missing required key {key!r}")
            return default
        value = self.data[key]
        if not isinstance(value, str):
            raise self.error(f"{key} must be a string, got {value!r}")
        return value

    def build(self, factory, **kwargs):
        """Construct a model type, prefixing its validation errors with context."""
        try:
            return factory(**kwargs)
        except ValidationError as exc:
            raise self.error(str(exc)) from exc


def _parse_market(root: _Section) -> MarketEconomics:
    section = root.subsection("market")
    if section is None:
        return BASELINE_MARKET
    section.reject_unknown_keys(("price", "salvage", "penalty", "a1", "a2", "a3", "nu"))
    return section.build(
        MarketEconomics,
        price=section.get_float("price", BASELINE_MARKET.price),
        salvage=section.get_float("salvage", BASELINE_MARKET.salvage),
        penalty=section.get_float("penalty", BASELINE_MARKET.penalty),
        a1=section.get_float("a1", BASELINE_MARKET.a1),
        a2=section.get_float("a2", BASELINE_MARKET.a2),
        a3=section.get_float("a3", BASELINE_MARKET.a3),
        nu=section.get_float("nu", BASELINE_MARKET.nu),
    )


def _parse_suppliers(root: _Section) -> tuple[SupplierProfile, ...]:
    if "suppliers" not in root.data:
        return BASELINE_SUPPLIERS
    entries = root.data["suppliers"]
    if not isinstance(entries, list) or not entries:
        raise root.error("suppliers must be a nonempty list of mappings")
    suppliers = []
    for position, entry in enumerate(entries):
        section = _Section(f"suppliers[{position}]", entry, root.source, root.line)
        section.reject_unknown_keys(("id", "base_cost", "beta"))
        suppliers.append(
            section.build(
                SupplierProfile,
                id=section.get_int("id"),
                base_cost=section.get_float("base_cost"),
                beta=section.get_float("beta"),
            )
        )
    return tuple(suppliers)


def _parse_demand(root: _Section) -> TruncatedNormal:
    section = root.subsection("demand")
    if section is None:
        return BASELINE_DEMAND
    section.reject_unknown_keys(("mu", "sigma", "lower", "upper"))
    return section.build(
        TruncatedNormal,
        mu=section.get_float("mu", BASELINE_DEMAND.mu),
        sigma=section.get_float("sigma", BASELINE_DEMAND.sigma),
        lower=section.get_float("lower", BASELINE_DEMAND.lower),
        upper=section.get_float("upper", BASELINE_DEMAND.upper),
    )


def _parse_axis_values(section: _Section, path: str, values: object) -> tuple:
    if not isinstance(values, list) or not values:
        raise section.error(f"axis {path!r} needs a nonempty list of values")
    parsed = []
    for value in values:
        if isinstance(value, list):
            parsed.append(tuple(float(v) for v in value))
        elif isinstance(value, bool) or not isinstance(value, (int, float)):
            raise section.error(f"axis {path!r} values must be numbers, got {value!r}")
        else:
            parsed.append(float(value))
    return tuple(parsed)


def _parse_dynamic(scenario: _Section) -> DynamicSpec | None:
    section = scenario.subsection("dynamic")
    if section is None:
        return None
    section.reject_unknown_keys(
        (
            "cycles",
            "a3_initial",
            "a3_decline",
            "learning_rate",
            "target_penalty",
            "alpha_initial",
        )
    )
    return section.build(
        DynamicSpec,
        cycles=section.get_int("cycles"),
        a3_initial=section.get_float("a3_initial"),
        a3_decline=section.get_float("a3_decline"),
        learning_rate=section.get_float("learning_rate"),
        target_penalty=section.get_float("target_penalty"),
        alpha_initial=section.get_float("alpha_initial"),
    )


def _parse_scenario(
    root: _Section,
    market: MarketEconomics,
    suppliers: tuple[SupplierProfile, ...],
    demand: TruncatedNormal,
    seed: int,
    replications: int,
) -> ScenarioSpec | None:
    section = root.subsection("scenario")
    if section is None:
        return None
    section.reject_unknown_keys(
        ("id", "axes", "sampler", "lhs_samples", "dynamic", "seed", "replications")
    )
    axes = []
    raw_axes = section.data.get("axes", [])
    if not isinstance(raw_axes, list):
        raise section.error("axes must be a list of {path, values} mappings")
    for position, entry in enumerate(raw_axes):
        axis = _Section(f"{section.name}.axes[{position}]", entry, root.source, section.line)
        axis.reject_unknown_keys(("path", "values"))
        path = axis.get_str("path")
        axes.append((path, _parse_axis_values(axis, path, axis.data.get("values"))))
    return section.build(
        ScenarioSpec,
        id=section.get_str("id"),
        market=market,
        suppliers=suppliers,
        demand=demand,
        axes=tuple(axes),
        sampler=section.get_str("sampler", "grid"),
        lhs_samples=section.get_int("lhs_samples", 0),
        replications=section.get_int("replications", replications, minimum=2),
        seed=section.get_int("seed", seed, minimum=0),
        dynamic=_parse_dynamic(section),
    )
