"""(1 + 4) evolutionary strategy with optional genotype reordering.

Each iteration reorders the surviving parent (subject to the strategy's
gate probability), breeds four mutants, scores them, and keeps the best
mutant whenever it is at least as fit as the parent; the equal-fitness
replacement is what lets inactive genes drift.  Reordering never changes
the parent's phenotype, so its fitness carries over without re-evaluation.

Iterations-to-solution is the number of iterations run; a run that exhausts
its budget reports the budget itself as its iteration count.  Exactly four
fitness evaluations are spent per iteration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .benchmarks import (
    BooleanBenchmark,
    RegressionBenchmark,
    boolean_fitness,
    graph_params,
    mae_fitness,
)
from .errors import ConfigError
from .genome import Genotype, decode_active, random_genome
from .mutation import single_mutation
from .reorder import ReorderStrategy, maybe_reorder

OFFSPRING_PER_ITERATION = 4


@dataclass
class ESConfig:
    num_computational: int
    strategy: ReorderStrategy
    max_iterations: int
    convergence_threshold: float
    seed: int
    mu: int = 1
    lam: int = 4
    master_seed: int = 0
    trace_full: bool = False
    verify_reorder: bool = False
    track_union_active: bool = False

    def __post_init__(self) -> None:
        if self.mu != 1 or self.lam != 4:
            raise ConfigError("the strategy is fixed at mu=1, lambda=4")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be >= 1")
        if self.num_computational < 1:
            raise ConfigError("num_computational must be >= 1")


@dataclass
class ConvergenceTrace:
    """Sparse (iteration, best fitness so far) samples; monotone under elitism."""

    samples: list[tuple[int, float]] = field(default_factory=list)

    def record(self, iteration: int, fitness: float) -> None:
        if self.samples and self.samples[-1][0] == iteration:
            self.samples[-1] = (iteration, fitness)
        else:
            self.samples.append((iteration, fitness))


@dataclass
class RunResult:
    seed: int
    converged: bool
    iterations: int
    evaluations: int
    final_train_fitness: float
    final_test_fitness: float | None
    active_count: int
    active_bitmap: str
    trace: ConvergenceTrace
    final_genome: Genotype | None = None
    # positions active at any point during the run (tracked on request only)
    union_active_bitmap: str | None = None


def run_rng(master_seed: int, seed: int) -> np.random.Generator:
    """Independent stream per (master seed, run seed) pair."""
    return np.random.default_rng(np.random.SeedSequence((master_seed, seed)))


def select_parent(
    parent_fitness: float, offspring_fitnesses: list[float], maximize: bool
) -> int | None:
    """Index of the replacing offspring, or None to retain the parent.

    The best offspring wins ties among offspring by lowest index and
    replaces the parent when its fitness is equal or better.
    """
    best = 0
    for i in range(1, len(offspring_fitnesses)):
        if maximize:
            if offspring_fitnesses[i] > offspring_fitnesses[best]:
                best = i
        else:
            if offspring_fitnesses[i] < offspring_fitnesses[best]:
                best = i
    if maximize:
        return best if offspring_fitnesses[best] >= parent_fitness else None
    return best if offspring_fitnesses[best] <= parent_fitness else None


def run_es(config: ESConfig, bench, rng: np.random.Generator | None = None) -> RunResult:
    """Run one seeded (1+4)-ES on a benchmark until convergence or budget."""
    if rng is None:
        rng = run_rng(config.master_seed, config.seed)

    if isinstance(bench, BooleanBenchmark):
        maximize = True
        fitness = lambda g, a: boolean_fitness(g, bench, a)
        is_converged = lambda f: f >= config.convergence_threshold
    elif isinstance(bench, RegressionBenchmark):
        maximize = False
        fitness = lambda g, a: mae_fitness(g, bench.train, a)
        is_converged = lambda f: f < config.convergence_threshold
    else:
        raise ConfigError(f"unsupported benchmark type {type(bench).__name__}")

    params = graph_params(bench, config.num_computational)
    parent = random_genome(params, rng)
    parent_active = decode_active(parent)
    parent_fitness = fitness(parent, parent_active)

    trace = ConvergenceTrace()
    trace.record(0, parent_fitness)
    union_active = list(parent_active.bitmap) if config.track_union_active else None

    converged = False
    iteration = 0
    while iteration < config.max_iterations:
        iteration += 1

        reordered = maybe_reorder(parent, config.strategy, rng)
        if reordered is not parent:
            if config.verify_reorder:
                check = fitness(reordered, None)
                if check != parent_fitness:
                    raise AssertionError(
                        f"reorder changed fitness {parent_fitness} -> {check} "
                        f"at iteration {iteration}"
                    )
            parent = reordered
            parent_active = decode_active(parent)

        offspring = []
        offspring_active = []
        offspring_fitness = []
        for _ in range(OFFSPRING_PER_ITERATION):
            child = single_mutation(parent, parent_active, rng)
            child_active = decode_active(child)
            offspring.append(child)
            offspring_active.append(child_active)
            offspring_fitness.append(fitness(child, child_active))

        choice = select_parent(parent_fitness, offspring_fitness, maximize)
        improved = False
        if choice is not None:
            improved = offspring_fitness[choice] != parent_fitness
            parent = offspring[choice]
            parent_active = offspring_active[choice]
            parent_fitness = offspring_fitness[choice]

        if union_active is not None:
            for i, flag in enumerate(parent_active.bitmap):
                if flag:
                    union_active[i] = True

        if is_converged(parent_fitness):
            converged = True
            trace.record(iteration, parent_fitness)
            break
        if improved or config.trace_full or iteration % 100 == 0:
            trace.record(iteration, parent_fitness)

    trace.record(iteration, parent_fitness)

    test_fitness = None
    if isinstance(bench, RegressionBenchmark) and bench.test is not None:
        test_fitness = mae_fitness(parent, bench.test, parent_active)

    return RunResult(
        seed=config.seed,
        converged=converged,
        iterations=iteration,
        evaluations=OFFSPRING_PER_ITERATION * iteration,
        final_train_fitness=parent_fitness,
        final_test_fitness=test_fitness,
        active_count=parent_active.count,
        active_bitmap="".join("1" if a else "0" for a in parent_active.bitmap),
        trace=trace,
        final_genome=parent,
        union_active_bitmap=(
            "".join("1" if a else "0" for a in union_active)
            if union_active is not None
            else None
        ),
    )
