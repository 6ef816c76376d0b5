import numpy as np
import pytest

from cgp_reorder.benchmarks import BooleanBenchmark, build_boolean, build_regression
from cgp_reorder.errors import ConfigError
from cgp_reorder.evolution import (
    ESConfig,
    run_es,
    run_rng,
    select_parent,
)
from cgp_reorder.reorder import ReorderStrategy


def constant_zero_bench():
    """Single-input single-output benchmark whose target is always 0."""
    return BooleanBenchmark("const0", 1, 1, [((0,), (0,)), ((1,), (0,))])


def make_config(**overrides):
    base = dict(
        num_computational=20,
        strategy=ReorderStrategy("none"),
        max_iterations=5000,
        convergence_threshold=1.0,
        seed=0,
    )
    base.update(overrides)
    return ESConfig(**base)


class TestSelectParent:
    def test_equal_fitness_prefers_offspring(self):
        assert select_parent(0.5, [0.5, 0.4, 0.3, 0.2], maximize=True) == 0

    def test_all_worse_retains_parent(self):
        assert select_parent(0.9, [0.1, 0.1, 0.1, 0.1], maximize=True) is None

    def test_minimizing_picks_strict_best(self):
        assert select_parent(0.3, [0.3, 0.3, 0.1, 0.5], maximize=False) == 2

    def test_offspring_ties_break_by_lowest_index(self):
        assert select_parent(0.2, [0.7, 0.7, 0.7, 0.7], maximize=True) == 0
        assert select_parent(0.9, [0.1, 0.1, 0.1, 0.1], maximize=False) == 0


class TestRunEs:
    def test_trivial_target_converges(self):
        result = run_es(make_config(), constant_zero_bench())
        assert result.converged
        assert result.iterations >= 1
        fitness = [f for _, f in result.trace.samples]
        assert all(b >= a for a, b in zip(fitness, fitness[1:]))

    def test_deterministic_under_fixed_seed(self):
        bench = build_boolean("parity3")
        cfg = make_config(num_computational=60, seed=11, max_iterations=2000)
        a = run_es(cfg, bench, run_rng(0, 11))
        b = run_es(cfg, bench, run_rng(0, 11))
        assert a == b

    def test_evaluations_equal_four_times_iterations(self):
        bench = build_boolean("parity3")
        for seed in range(5):
            cfg = make_config(num_computational=50, seed=seed, max_iterations=300)
            result = run_es(cfg, bench, run_rng(0, seed))
            assert result.evaluations == 4 * result.iterations

    def test_budget_exhaustion_reports_not_converged(self):
        bench = build_boolean("multiply3")
        cfg = make_config(num_computational=30, max_iterations=25)
        result = run_es(cfg, bench, run_rng(0, 0))
        assert not result.converged
        assert result.iterations == 25
        assert 0.0 <= result.final_train_fitness < 1.0

    def test_reorder_never_changes_parent_fitness(self):
        bench = build_boolean("parity3")
        for kind in ("original", "equidistant", "uniform", "negbias", "leftskew"):
            cfg = make_config(
                num_computational=40,
                strategy=ReorderStrategy(kind),
                max_iterations=150,
                verify_reorder=True,
            )
            run_es(cfg, bench, run_rng(0, 3))  # raises on any fitness drift

    def test_boolean_trace_monotone_nondecreasing(self):
        bench = build_boolean("parity3")
        cfg = make_config(num_computational=80, max_iterations=3000, seed=2)
        result = run_es(cfg, bench, run_rng(0, 2))
        fitness = [f for _, f in result.trace.samples]
        assert all(b >= a for a, b in zip(fitness, fitness[1:]))

    def test_active_bitmap_matches_count(self):
        bench = build_boolean("parity3")
        result = run_es(make_config(num_computational=50), bench, run_rng(0, 1))
        assert len(result.active_bitmap) == 50
        assert result.active_bitmap.count("1") == result.active_count

    def test_converged_implies_threshold_met(self):
        boolean = build_boolean("parity3")
        for seed in range(4):
            cfg = make_config(num_computational=80, seed=seed, max_iterations=5000)
            result = run_es(cfg, boolean, run_rng(0, seed))
            if result.converged:
                assert result.final_train_fitness >= 1.0
        regression = build_regression("keijzer6", np.random.default_rng(1))
        cfg = make_config(
            num_computational=40,
            max_iterations=3000,
            convergence_threshold=0.01,
            seed=2,
        )
        result = run_es(cfg, regression, run_rng(0, 2))
        if result.converged:
            assert result.final_train_fitness < 0.01

    def test_regression_run_reports_test_fitness(self):
        bench = build_regression("keijzer6", np.random.default_rng(1))
        cfg = make_config(
            num_computational=30,
            max_iterations=200,
            convergence_threshold=0.01,
            seed=4,
        )
        result = run_es(cfg, bench, run_rng(0, 4))
        assert result.final_test_fitness is not None
        fitness = [f for _, f in result.trace.samples]
        assert all(b <= a for a, b in zip(fitness, fitness[1:]))

    def test_regression_without_test_split_reports_none(self):
        bench = build_regression("koza3", np.random.default_rng(1))
        cfg = make_config(
            num_computational=20,
            max_iterations=50,
            convergence_threshold=0.01,
        )
        result = run_es(cfg, bench, run_rng(0, 0))
        assert result.final_test_fitness is None

    def test_trace_full_records_every_iteration(self):
        bench = build_boolean("multiply3")
        cfg = make_config(num_computational=30, max_iterations=40, trace_full=True)
        result = run_es(cfg, bench, run_rng(0, 0))
        assert [it for it, _ in result.trace.samples] == list(range(41))


class TestESConfigValidation:
    def test_fixed_mu_lambda(self):
        with pytest.raises(ConfigError):
            make_config(mu=2)
        with pytest.raises(ConfigError):
            make_config(lam=8)

    def test_budget_must_be_positive(self):
        with pytest.raises(ConfigError):
            make_config(max_iterations=0)
