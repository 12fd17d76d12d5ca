"""Tests for the scenario engine: specs, sampling, runs, and decomposition."""

import dataclasses
import math

import numpy as np
import pytest

from procurekit.baseline import (
    BASELINE_DEMAND,
    BASELINE_MARKET,
    BASELINE_SUPPLIERS,
    DEFAULT_REPLICATIONS,
    DEFAULT_SEED,
)
from procurekit.errors import RankDeficientDesignError, ValidationError
from procurekit.scenarios import (
    PRESET_IDS,
    DynamicSpec,
    ScenarioSpec,
    adaptive_alpha_update,
    latin_hypercube,
    preset,
    run,
    run_dynamic,
    variance_decomposition,
)

# alpha* of the unmodified baseline problem, frozen in the optimizer tests
BASELINE_ALPHA_STAR = 0.0073617888157626234


def small_spec(**overrides) -> ScenarioSpec:
    settings = dict(
        id="test",
        market=BASELINE_MARKET,
        suppliers=BASELINE_SUPPLIERS,
        demand=BASELINE_DEMAND,
        axes=(("demand.sigma", (8.0, 12.0)),),
        replications=400,
        seed=7,
    )
    settings.update(overrides)
    return ScenarioSpec(**settings)


class TestDynamicSpec:
    def test_a3_schedule(self):
        dyn = DynamicSpec(
            cycles=10,
            a3_initial=3000.0,
            a3_decline=200.0,
            learning_rate=0.05,
            target_penalty=0.05,
            alpha_initial=0.2,
        )
        assert dyn.a3_at(1) == 3000.0
        assert dyn.a3_at(2) == 2800.0
        assert dyn.a3_at(10) == 1200.0

    @pytest.mark.parametrize(
        "field, value",
        [
            ("cycles", 0),
            ("a3_initial", 0.0),
            ("learning_rate", 0.0),
            ("target_penalty", 0.0),
            ("alpha_initial", 1.2),
            ("alpha_initial", -0.1),
        ],
    )
    def test_rejects_bad_settings(self, field, value):
        settings = dict(
            cycles=10,
            a3_initial=3000.0,
            a3_decline=200.0,
            learning_rate=0.05,
            target_penalty=0.05,
            alpha_initial=0.2,
        )
        settings[field] = value
        with pytest.raises(ValidationError):
            DynamicSpec(**settings)

    def test_rejects_schedule_reaching_zero(self):
        # cycle 16 would hit 3000 - 200 * 15 = 0
        with pytest.raises(ValidationError, match="positive"):
            DynamicSpec(
                cycles=16,
                a3_initial=3000.0,
                a3_decline=200.0,
                learning_rate=0.05,
                target_penalty=0.05,
                alpha_initial=0.2,
            )


class TestScenarioSpecValidation:
    def test_rejects_empty_id(self):
        with pytest.raises(ValidationError, match="id"):
            small_spec(id="")

    def test_rejects_unknown_sampler(self):
        with pytest.raises(ValidationError, match="sampler"):
            small_spec(sampler="sobol")

    def test_rejects_single_replication(self):
        with pytest.raises(ValidationError, match="replications"):
            small_spec(replications=1)

    def test_rejects_negative_seed(self):
        with pytest.raises(ValidationError, match="seed"):
            small_spec(seed=-1)

    def test_rejects_grid_without_axes(self):
        with pytest.raises(ValidationError, match="axis"):
            small_spec(axes=())

    def test_rejects_empty_axis_values(self):
        with pytest.raises(ValidationError, match="no values"):
            small_spec(axes=(("demand.sigma", ()),))

    @pytest.mark.parametrize(
        "path",
        ["demand.width", "market.margin", "suppliers.beta", "sigma", "demand.sigma.extra"],
    )
    def test_rejects_unknown_parameter_path(self, path):
        with pytest.raises(ValidationError, match="path"):
            small_spec(axes=((path, (1.0,)),))

    def test_rejects_lhs_with_too_few_samples(self):
        with pytest.raises(ValidationError, match="lhs_samples"):
            small_spec(sampler="latin-hypercube", lhs_samples=1)

    def test_rejects_lhs_axis_without_range(self):
        with pytest.raises(ValidationError, match="range"):
            small_spec(
                sampler="latin-hypercube",
                lhs_samples=10,
                axes=(("demand.sigma", (5.0, 8.0, 12.0)),),
            )

    def test_rejects_lhs_axis_with_inverted_range(self):
        with pytest.raises(ValidationError, match="range"):
            small_spec(
                sampler="latin-hypercube",
                lhs_samples=10,
                axes=(("demand.sigma", (15.0, 5.0)),),
            )

    def test_rejects_dynamic_with_axes(self):
        dyn = DynamicSpec(
            cycles=2,
            a3_initial=3000.0,
            a3_decline=200.0,
            learning_rate=0.05,
            target_penalty=0.05,
            alpha_initial=0.2,
        )
        with pytest.raises(ValidationError, match="dynamic"):
            small_spec(dynamic=dyn)


class TestAdaptiveUpdate:
    def test_exact_step(self):
        # 0.2 + 0.05 * (0.084 - 0.05) / 0.05 = 0.234
        assert adaptive_alpha_update(0.2, 0.084, 0.05, 0.05) == pytest.approx(0.234, abs=5e-13)

    def test_chained_steps(self):
        second = adaptive_alpha_update(0.2, 0.084, 0.05, 0.05)
        third = adaptive_alpha_update(second, 0.081, 0.05, 0.05)
        assert third == pytest.approx(0.265, abs=5e-13)

    def test_on_target_is_fixed_point(self):
        assert adaptive_alpha_update(0.4, 0.05, 0.05, 0.05) == 0.4

    def test_clamps_to_unit_interval(self):
        assert adaptive_alpha_update(0.99, 0.5, 0.5, 0.05) == 1.0
        assert adaptive_alpha_update(0.01, 0.0, 0.5, 0.05) == 0.0


class TestGridRun:
    def test_cells_follow_product_order(self):
        spec = small_spec(
            axes=(("demand.sigma", (8.0, 12.0)), ("market.a3", (1000.0, 2000.0))),
        )
        rows = run(spec)
        coords = [r.coordinates for r in rows]
        assert coords == [
            (("demand.sigma", 8.0), ("market.a3", 1000.0)),
            (("demand.sigma", 8.0), ("market.a3", 2000.0)),
            (("demand.sigma", 12.0), ("market.a3", 1000.0)),
            (("demand.sigma", 12.0), ("market.a3", 2000.0)),
        ]
        assert [r.cell_index for r in rows] == [0, 1, 2, 3]
        assert all(r.scenario_id == "test" for r in rows)

    def test_identity_cell_reproduces_baseline_optimum(self):
        # setting sigma to its baseline value leaves the problem unchanged
        rows = run(small_spec(axes=(("demand.sigma", (8.0,)),)))
        assert rows[0].alpha_star == pytest.approx(BASELINE_ALPHA_STAR, rel=1e-12)
        assert rows[0].status == "ok"
        assert rows[0].kkt_max_residual < 1e-4
        assert rows[0].std_error > 0.0

    def test_failed_cell_reports_status_and_run_continues(self):
        rows = run(small_spec(axes=(("demand.sigma", (8.0, -3.0)),)))
        assert rows[0].status == "ok"
        assert rows[1].status.startswith("InvalidDistributionError")
        assert math.isnan(rows[1].alpha_star)
        assert math.isnan(rows[1].expected_profit)
        assert len(rows) == 2

    def test_beta_range_redraw_is_seeded_per_cell(self):
        spec = small_spec(axes=(("suppliers.beta_range", ((0.3, 0.7), (0.3, 0.7))),))
        rows = run(spec)
        again = run(spec)
        assert rows == again
        # same range in two cells still differs: cell index keys the redraw
        assert rows[0].q_star != rows[1].q_star

    def test_bad_beta_range_becomes_error_row(self):
        rows = run(small_spec(axes=(("suppliers.beta_range", ((0.9, 0.1),)),)))
        assert rows[0].status.startswith("ValidationError")

    def test_rejects_nonpositive_jobs(self):
        with pytest.raises(ValidationError, match="jobs"):
            run(small_spec(), jobs=0)


class TestParallelDeterminism:
    def test_process_pool_matches_serial_run(self):
        spec = small_spec(
            axes=(("demand.sigma", (5.0, 8.0, 12.0)), ("market.a3", (1000.0, 3000.0))),
            replications=300,
        )
        assert run(spec, jobs=1) == run(spec, jobs=2)

    def test_lhs_run_matches_across_job_counts(self):
        spec = small_spec(
            sampler="latin-hypercube",
            lhs_samples=6,
            axes=(("demand.sigma", (5.0, 15.0)), ("market.a3", (500.0, 4000.0))),
            replications=300,
        )
        assert run(spec, jobs=1) == run(spec, jobs=3)


class TestLatinHypercube:
    def test_exact_stratification(self):
        rng = np.random.default_rng(3)
        design = latin_hypercube([(0.0, 1.0), (10.0, 30.0)], 8, rng)
        assert design.shape == (8, 2)
        for j, (lo, hi) in enumerate([(0.0, 1.0), (10.0, 30.0)]):
            strata = np.floor((design[:, j] - lo) / (hi - lo) * 8).astype(int)
            assert sorted(strata) == list(range(8))

    def test_points_stay_inside_ranges(self):
        rng = np.random.default_rng(4)
        design = latin_hypercube([(-2.0, 5.0)], 50, rng)
        assert np.all(design >= -2.0) and np.all(design <= 5.0)

    def test_same_seed_reproduces_design(self):
        a = latin_hypercube([(0.0, 1.0), (0.0, 1.0)], 20, np.random.default_rng(9))
        b = latin_hypercube([(0.0, 1.0), (0.0, 1.0)], 20, np.random.default_rng(9))
        np.testing.assert_array_equal(a, b)

    def test_rejects_single_sample(self):
        with pytest.raises(ValidationError, match="n >= 2"):
            latin_hypercube([(0.0, 1.0)], 1, np.random.default_rng(0))

    def test_rejects_empty_ranges(self):
        with pytest.raises(ValidationError, match="dimension"):
            latin_hypercube([], 10, np.random.default_rng(0))

    def test_rejects_inverted_range(self):
        with pytest.raises(ValidationError, match="low < high"):
            latin_hypercube([(5.0, 5.0)], 10, np.random.default_rng(0))


class TestVarianceDecomposition:
    def test_single_parameter_gets_everything(self):
        rng = np.random.default_rng(5)
        x = rng.random(30)
        shares = variance_decomposition(x, 4.0 * x + 1.0)
        assert shares == pytest.approx([100.0])

    def test_equal_standardized_slopes_split_evenly(self):
        rng = np.random.default_rng(6)
        x = rng.random((200, 2)) * [3.0, 40.0]
        z = (x - x.mean(axis=0)) / x.std(axis=0)
        shares = variance_decomposition(x, z[:, 0] + z[:, 1])
        assert shares == pytest.approx([50.0, 50.0], abs=1e-9)

    def test_known_slope_ratio(self):
        rng = np.random.default_rng(7)
        x = rng.random((300, 2))
        z = (x - x.mean(axis=0)) / x.std(axis=0)
        shares = variance_decomposition(x, 2.0 * z[:, 0] + 1.0 * z[:, 1])
        assert shares == pytest.approx([80.0, 20.0], abs=1e-9)

    def test_shares_sum_to_hundred(self):
        rng = np.random.default_rng(8)
        x = rng.random((60, 3))
        y = x @ [1.0, -2.0, 0.5] + rng.normal(0, 0.1, 60)
        shares = variance_decomposition(x, y)
        assert shares.sum() == pytest.approx(100.0, abs=1e-9)
        assert np.all(shares >= 0.0)

    def test_rejects_collinear_parameters(self):
        rng = np.random.default_rng(9)
        x1 = rng.random(40)
        x = np.column_stack([x1, 2.0 * x1 + 3.0])
        with pytest.raises(RankDeficientDesignError, match="rank|collinear"):
            variance_decomposition(x, x1)

    def test_rejects_constant_parameter_column(self):
        rng = np.random.default_rng(10)
        x = np.column_stack([rng.random(40), np.full(40, 2.5)])
        with pytest.raises(RankDeficientDesignError, match="constant"):
            variance_decomposition(x, x[:, 0])

    def test_rejects_too_few_samples(self):
        x = np.arange(9.0)
        with pytest.raises(ValidationError, match="10 samples"):
            variance_decomposition(x, x)

    def test_rejects_mismatched_lengths(self):
        with pytest.raises(ValidationError, match="responses"):
            variance_decomposition(np.arange(12.0), np.arange(11.0))

    def test_rejects_flat_response(self):
        rng = np.random.default_rng(11)
        with pytest.raises(ValidationError, match="vary"):
            variance_decomposition(rng.random(20), np.full(20, 3.0))

    def test_rejects_nonfinite_input(self):
        x = np.arange(12.0)
        y = x.copy()
        y[3] = np.nan
        with pytest.raises(ValidationError, match="finite"):
            variance_decomposition(x, y)


class TestPresets:
    def test_every_preset_constructs(self):
        for pid in PRESET_IDS:
            spec = preset(pid)
            assert spec.id == pid
            assert spec.seed == DEFAULT_SEED
            assert spec.replications == DEFAULT_REPLICATIONS

    def test_unknown_preset_rejected(self):
        with pytest.raises(ValidationError, match="preset"):
            preset("s99")

    def test_sigma_sweep_values(self):
        spec = preset("s1")
        assert spec.axes == (("demand.sigma", (5.0, 8.0, 12.0, 15.0)),)

    def test_adoption_cost_tail_values(self):
        spec = preset("s8")
        assert spec.axes == (
            ("market.a3", (10_000.0, 20_000.0, 40_000.0, 60_000.0, 80_000.0)),
        )

    def test_lhs_preset_settings(self):
        spec = preset("s9")
        assert spec.sampler == "latin-hypercube"
        assert spec.lhs_samples == 100
        assert [path for path, _ in spec.axes] == [
            "demand.sigma",
            "demand.upper",
            "market.a3",
        ]

    def test_heatmap_preset_is_square_grid(self):
        spec = preset("s10")
        assert len(spec.axes) == 2
        assert len(spec.axes[0][1]) == 5 and len(spec.axes[1][1]) == 5

    def test_dynamic_preset_settings(self):
        spec = preset("s11")
        dyn = spec.dynamic
        assert dyn is not None
        assert dyn.cycles == 10
        assert dyn.a3_initial == 3000.0 and dyn.a3_decline == 200.0
        assert dyn.learning_rate == 0.05 and dyn.target_penalty == 0.05
        assert dyn.alpha_initial == 0.2
        # wider demand spread than baseline keeps the penalty signal active
        assert spec.demand.sigma == 12.0

    def test_seed_and_replications_pass_through(self):
        spec = preset("s1", seed=123, replications=777)
        assert spec.seed == 123 and spec.replications == 777


@pytest.fixture(scope="module")
def trajectory():
    return run(preset("s11", replications=2000))


class TestDynamicRun:
    def test_one_row_per_cycle(self, trajectory):
        assert len(trajectory) == 10
        assert [dict(r.coordinates)["cycle"] for r in trajectory] == list(range(1, 11))

    def test_adoption_cost_declines_to_schedule_end(self, trajectory):
        a3s = [dict(r.coordinates)["market.a3"] for r in trajectory]
        assert a3s == [3000.0 - 200.0 * t for t in range(10)]

    def test_alpha_starts_at_initial_and_never_decreases(self, trajectory):
        alphas = [r.alpha_star for r in trajectory]
        assert alphas[0] == 0.2
        assert all(b >= a for a, b in zip(alphas, alphas[1:]))

    def test_penalty_never_increases(self, trajectory):
        penalties = [r.penalty_rate for r in trajectory]
        assert all(b <= a for a, b in zip(penalties, penalties[1:]))

    def test_kkt_residual_not_reported_for_cycles(self, trajectory):
        assert all(math.isnan(r.kkt_max_residual) for r in trajectory)

    def test_run_dynamic_requires_dynamic_settings(self):
        with pytest.raises(ValidationError, match="dynamic"):
            run_dynamic(small_spec())

    def test_same_seed_reproduces_trajectory(self):
        spec = preset("s11", replications=500)
        assert run_dynamic(spec) == run_dynamic(spec)


class TestTrends:
    def test_quantity_rises_with_demand_spread(self):
        rows = run(preset("s1", replications=300))
        qs = [r.q_star for r in rows]
        assert all(b > a for a, b in zip(qs, qs[1:]))

    def test_adoption_falls_with_adoption_cost(self):
        rows = run(preset("s5", replications=300))
        alphas = [r.alpha_star for r in rows]
        assert all(b <= a for a, b in zip(alphas, alphas[1:]))

    def test_lhs_preset_covers_every_stratum(self):
        spec = dataclasses.replace(preset("s9", replications=300), lhs_samples=20)
        rows = run(spec, jobs=2)
        assert all(r.status == "ok" for r in rows)
        sigmas = np.array([dict(r.coordinates)["demand.sigma"] for r in rows])
        strata = np.floor((sigmas - 5.0) / 10.0 * 20).astype(int)
        assert sorted(strata) == list(range(20))
