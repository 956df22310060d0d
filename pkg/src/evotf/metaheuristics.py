"""Population metaheuristics (ABC, PSO, DE) behind one elitist loop.

All engines minimise a cost. A fitness function is any callable mapping a
1-D gene vector to a float; it must not consume randomness. Every run draws
from a single Mersenne-Twister (MT19937) stream, so a run is reproducible
from its seed alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .genotype import GeneBounds

FitnessFn = Callable[[np.ndarray], float]

ENGINES = ("abc", "pso", "de")
DE_VARIANTS = ("randtobest1", "rand1")


@dataclass(frozen=True)
class OptimizerConfig:
    """Run budget and engine parameters; defaults are the reference settings."""

    population: int = 10
    iterations: int = 1000
    trial_limit: int = 100
    c1: float = 2.0
    c2: float = 2.0
    c0_max: float = 1.0
    c0_min: float = 0.0
    cr: float = 0.9
    f: float = 0.7
    de_variant: str = "randtobest1"

    def __post_init__(self):
        if self.population < 4:
            raise ValueError(f"population must be >= 4, got {self.population}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if self.trial_limit < 1:
            raise ValueError(f"trial_limit must be >= 1, got {self.trial_limit}")
        if not 0.0 <= self.cr <= 1.0:
            raise ValueError(f"CR must lie in [0, 1], got {self.cr}")
        if self.f <= 0.0:
            raise ValueError(f"F must be positive, got {self.f}")
        if self.de_variant not in DE_VARIANTS:
            raise ValueError(f"unknown DE variant {self.de_variant!r}")


@dataclass
class Candidate:
    genes: np.ndarray
    cost: float
    trial: int = 0
    velocity: Optional[np.ndarray] = None
    best_genes: Optional[np.ndarray] = None
    best_cost: float = math.inf


@dataclass
class RunResult:
    best_genes: np.ndarray
    best_cost: float
    fitness_trace: np.ndarray  # entry 0 is the initial population, then one per iteration
    rng_seed: object
    evaluations: int = 0
    scouts: int = 0


class CountingFitness:
    """Wraps a fitness function, counting calls and mapping NaN to +inf."""

    def __init__(self, fitness: FitnessFn):
        self.fitness = fitness
        self.calls = 0

    def __call__(self, genes: np.ndarray) -> float:
        self.calls += 1
        cost = float(self.fitness(genes))
        return math.inf if math.isnan(cost) else cost


def make_rng(seed) -> np.random.Generator:
    """MT19937-backed generator from an int, SeedSequence or existing generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.MT19937(seed))


def fittest(population: list[Candidate]) -> Candidate:
    """Lowest-cost candidate; ties go to the lowest index."""
    if not population:
        raise ValueError("fittest() of an empty population")
    return population[_argmin([c.cost for c in population])]


def _argmin(costs) -> int:
    best, idx = math.inf, 0
    for i, c in enumerate(costs):
        if c < best:
            best, idx = c, i
    return idx


def init_population(bounds: GeneBounds, fitness: FitnessFn, size: int, rng) -> list[Candidate]:
    genes = bounds.sample(rng, size)
    return [Candidate(g, fitness(g)) for g in genes]


# -- Artificial Bee Colony ------------------------------------------------------


def abc_neighbour(x_i: np.ndarray, x_k: np.ndarray, j: int, phi: float) -> np.ndarray:
    """Perturb gene ``j`` of ``x_i`` relative to partner ``x_k``, scaled by ``phi``."""
    v = x_i.copy()
    v[j] = x_i[j] + phi * (x_i[j] - x_k[j])
    return v


def abc_quality(cost: float) -> float:
    """Cost-to-quality transform used for onlooker selection."""
    return 1.0 / (1.0 + cost) if cost >= 0 else 1.0 + abs(cost)


def _abc_visit(population, i, fitness, rng):
    n = len(population)
    k = int(rng.integers(n - 1))
    if k >= i:
        k += 1
    x_i = population[i].genes
    j = int(rng.integers(x_i.size))
    phi = rng.uniform(-1.0, 1.0)
    v = abc_neighbour(x_i, population[k].genes, j, phi)
    cost = fitness(v)
    cand = population[i]
    # Equal-cost moves are accepted (drift across flat regions) but only a
    # strict improvement resets the abandonment counter.
    if cost < cand.cost:
        cand.genes, cand.cost, cand.trial = v, cost, 0
    else:
        if cost == cand.cost:
            cand.genes = v
        cand.trial += 1


def abc_step(population: list[Candidate], bounds: GeneBounds, trial_limit: int, fitness: FitnessFn, rng) -> list[Candidate]:
    """One ABC cycle: employed, onlooker and scout phases (in place).

    Onlookers pick food sources by roulette over :func:`abc_quality`.
    Sources whose trial counter exceeds ``trial_limit`` are re-drawn
    uniformly inside ``bounds``, except the current best source, which is
    never abandoned.
    """
    n = len(population)
    for i in range(n):
        _abc_visit(population, i, fitness, rng)

    cum = np.cumsum([abc_quality(c.cost) for c in population])
    for _ in range(n):
        r = rng.random() * cum[-1]
        i = min(int(np.searchsorted(cum, r, side="right")), n - 1)
        _abc_visit(population, i, fitness, rng)

    best = _argmin([c.cost for c in population])
    for i, cand in enumerate(population):
        if cand.trial > trial_limit and i != best:
            g = bounds.sample(rng)
            cand.genes, cand.cost, cand.trial = g, fitness(g), 0
    return population


# -- Particle Swarm Optimisation ------------------------------------------------


def inertia(iteration: int, iterations: int, c0_max: float, c0_min: float) -> float:
    """Linearly decayed inertia: ``c0_max`` at the first iteration, ``c0_min`` at the last."""
    if iterations <= 1:
        return c0_max
    return c0_max - (c0_max - c0_min) * iteration / (iterations - 1)


def pso_velocity(v, x, personal_best, swarm_best, c0, c1, c2, r1, r2):
    return c0 * v + c1 * r1 * (personal_best - x) + c2 * r2 * (swarm_best - x)


def pso_step(
    population: list[Candidate],
    swarm_best: np.ndarray,
    iteration: int,
    config: OptimizerConfig,
    fitness: FitnessFn,
    rng,
) -> list[Candidate]:
    """Move every particle once and refresh personal bests (in place).

    There is no velocity clamping and no position bound.
    """
    c0 = inertia(iteration, config.iterations, config.c0_max, config.c0_min)
    for p in population:
        r1 = rng.random(p.genes.size)
        r2 = rng.random(p.genes.size)
        p.velocity = pso_velocity(p.velocity, p.genes, p.best_genes, swarm_best, c0, config.c1, config.c2, r1, r2)
        p.genes = p.genes + p.velocity
        p.cost = fitness(p.genes)
        if p.cost < p.best_cost:
            p.best_genes, p.best_cost = p.genes, p.cost
    return population


# -- Differential Evolution -----------------------------------------------------


def de_mutant(a, b, c, best, f: float, variant: str = "randtobest1") -> np.ndarray:
    """Mutant vector; ``randtobest1`` pulls the base ``a`` toward ``best``."""
    if variant == "randtobest1":
        return a + f * (best - a) + f * (b - c)
    if variant == "rand1":
        return a + f * (b - c)
    raise ValueError(f"unknown DE variant {variant!r}")


def de_crossover(target, mutant, cr: float, forced: int, r) -> np.ndarray:
    """Binomial crossover: mutant gene where ``r < cr`` or at index ``forced``."""
    mask = r < cr
    mask[forced] = True
    return np.where(mask, mutant, target)


def _distinct_partners(n, i, rng):
    picks = []
    while len(picks) < 3:
        k = int(rng.integers(n))
        if k != i and k not in picks:
            picks.append(k)
    return picks


def de_step(population: list[Candidate], best: np.ndarray, config: OptimizerConfig, fitness: FitnessFn, rng) -> list[Candidate]:
    """One synchronous DE generation with greedy one-to-one replacement."""
    n = len(population)
    if n < 4:
        raise ValueError(f"DE needs a population of at least 4, got {n}")
    snapshot = [c.genes for c in population]
    for i, target in enumerate(population):
        a, b, c = (snapshot[k] for k in _distinct_partners(n, i, rng))
        mutant = de_mutant(a, b, c, best, config.f, config.de_variant)
        forced = int(rng.integers(target.genes.size))
        trial = de_crossover(snapshot[i], mutant, config.cr, forced, rng.random(target.genes.size))
        cost = fitness(trial)
        if cost <= target.cost:
            target.genes, target.cost = trial, cost
    return population


# -- driver ---------------------------------------------------------------------


def optimize(
    engine: str,
    config: OptimizerConfig,
    bounds: GeneBounds,
    fitness: FitnessFn,
    seed,
    callback: Optional[Callable[[int, list[Candidate]], None]] = None,
) -> RunResult:
    """Run ``engine`` for ``config.iterations`` iterations and return the best-ever solution.

    ``callback(iteration, population)`` is invoked after every engine step.
    """
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r} (expected one of {', '.join(ENGINES)})")
    rng = make_rng(seed)
    counted = CountingFitness(fitness)
    population = init_population(bounds, counted, config.population, rng)

    if engine == "pso":
        for p in population:
            p.velocity = np.zeros_like(p.genes)
            p.best_genes, p.best_cost = p.genes, p.cost

    def elite():
        if engine == "pso":
            i = _argmin([p.best_cost for p in population])
            return population[i].best_genes, population[i].best_cost
        c = fittest(population)
        return c.genes, c.cost

    best_genes, best_cost = elite()
    best_genes = best_genes.copy()
    trace = [best_cost]
    scouts = 0
    for t in range(config.iterations):
        if engine == "abc":
            before = counted.calls
            abc_step(population, bounds, config.trial_limit, counted, rng)
            scouts += counted.calls - before - 2 * len(population)
        elif engine == "pso":
            pso_step(population, best_genes, t, config, counted, rng)
        else:
            de_step(population, best_genes, config, counted, rng)
        if callback is not None:
            callback(t, population)
        genes, cost = elite()
        if cost < best_cost:
            best_genes, best_cost = genes.copy(), cost
        trace.append(best_cost)
    return RunResult(best_genes, best_cost, np.array(trace), seed, counted.calls, scouts)
