import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evotf.genotype import GeneBounds
from evotf.metaheuristics import (
    ENGINES,
    Candidate,
    CountingFitness,
    OptimizerConfig,
    abc_neighbour,
    abc_quality,
    abc_step,
    de_crossover,
    de_mutant,
    de_step,
    fittest,
    inertia,
    make_rng,
    optimize,
    pso_step,
    pso_velocity,
)


def sphere(x):
    return float(np.dot(x, x))


def rastrigin(x):
    return float(10 * x.size + np.sum(x * x - 10 * np.cos(2 * np.pi * x)))


SHORT = OptimizerConfig(population=6, iterations=20, trial_limit=3)


@pytest.mark.parametrize("engine", ENGINES)
def test_sphere_converges(engine):
    cfg = OptimizerConfig(iterations=1000)
    best = min(optimize(engine, cfg, GeneBounds.uniform(10), sphere, seed).best_cost for seed in range(5))
    assert best < 1e-2


@pytest.mark.parametrize("engine", ENGINES)
def test_same_seed_same_run(engine):
    a = optimize(engine, SHORT, GeneBounds.uniform(5), rastrigin, 42)
    b = optimize(engine, SHORT, GeneBounds.uniform(5), rastrigin, 42)
    assert np.array_equal(a.best_genes, b.best_genes)
    assert np.array_equal(a.fitness_trace, b.fitness_trace)
    c = optimize(engine, SHORT, GeneBounds.uniform(5), rastrigin, 43)
    assert not np.array_equal(a.best_genes, c.best_genes)


@pytest.mark.parametrize("engine", ENGINES)
def test_trace_is_elitist_and_matches_result(engine):
    res = optimize(engine, SHORT, GeneBounds.uniform(5), rastrigin, 1)
    assert res.fitness_trace.shape == (SHORT.iterations + 1,)
    assert np.all(np.diff(res.fitness_trace) <= 0)
    assert res.fitness_trace[-1] == res.best_cost
    assert rastrigin(res.best_genes) == res.best_cost


@pytest.mark.parametrize("engine", ["pso", "de"])
def test_evaluation_count(engine):
    res = optimize(engine, SHORT, GeneBounds.uniform(4), sphere, 3)
    assert res.evaluations == SHORT.population * (1 + SHORT.iterations)


def test_abc_evaluation_count_includes_scouts():
    res = optimize("abc", SHORT, GeneBounds.uniform(4), rastrigin, 3)
    assert res.scouts > 0
    assert res.evaluations == SHORT.population * (1 + 2 * SHORT.iterations) + res.scouts


def test_unknown_engine():
    with pytest.raises(ValueError, match="unknown engine"):
        optimize("ga", SHORT, GeneBounds.uniform(2), sphere, 0)


def test_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(population=3)
    with pytest.raises(ValueError):
        OptimizerConfig(cr=1.5)
    with pytest.raises(ValueError):
        OptimizerConfig(de_variant="best2")


def test_nan_costs_become_inf():
    f = CountingFitness(lambda x: float("nan"))
    assert f(np.zeros(2)) == math.inf and f.calls == 1


def test_fittest_ties_and_empty():
    pop = [Candidate(np.zeros(1), 2.0), Candidate(np.ones(1), 1.0), Candidate(np.full(1, 2.0), 1.0)]
    assert fittest(pop) is pop[1]
    with pytest.raises(ValueError):
        fittest([])


# -- ABC ------------------------------------------------------------------------


def test_abc_neighbour_arithmetic():
    x_i = np.array([1.0, 2.0, 3.0])
    x_k = np.array([0.0, 5.0, 1.0])
    np.testing.assert_array_equal(abc_neighbour(x_i, x_k, 1, 0.5), [1.0, 0.5, 3.0])
    np.testing.assert_array_equal(abc_neighbour(x_i, x_k, 2, 0.0), x_i)
    assert x_i[1] == 2.0  # input untouched


def test_abc_quality_is_decreasing():
    assert abc_quality(0.0) == 1.0
    assert abc_quality(1.0) == 0.5
    assert abc_quality(-1.0) == 2.0
    assert abc_quality(0.1) > abc_quality(0.2)


def _population(rng, n=6, dim=3, f=sphere):
    return [Candidate(g, f(g)) for g in rng.uniform(-1, 1, size=(n, dim))]


def test_abc_step_never_worsens_population_best():
    rng = make_rng(0)
    bounds = GeneBounds.uniform(3)
    pop = _population(rng)
    best = fittest(pop).cost
    for _ in range(50):
        abc_step(pop, bounds, 2, sphere, rng)
        now = fittest(pop).cost
        assert now <= best
        best = now


def test_abc_scouts_land_inside_bounds_and_spare_best():
    rng = make_rng(1)
    bounds = GeneBounds(np.full(3, 5.0), np.full(3, 6.0))
    pop = _population(rng)
    for i, c in enumerate(pop):
        c.cost, c.trial = (-1.0 if i == 2 else 0.0), 1000
    keep = pop[2].genes.copy()
    calls = CountingFitness(lambda x: 1.0)  # no move ever improves
    abc_step(pop, bounds, 10, calls, rng)
    assert calls.calls == 2 * len(pop) + len(pop) - 1
    assert np.array_equal(pop[2].genes, keep) and pop[2].trial > 1000
    for i, c in enumerate(pop):
        if i != 2:
            assert np.all((c.genes >= 5.0) & (c.genes < 6.0))
            assert c.trial == 0 and c.cost == 1.0


def test_abc_trial_counter_counts_failures():
    rng = make_rng(2)
    pop = [Candidate(np.zeros(2), 0.0), Candidate(np.zeros(2), 0.0), Candidate(np.zeros(2), 0.0), Candidate(np.zeros(2), 0.0)]
    # identical sources: every neighbour equals its source, so no strict gain
    abc_step(pop, GeneBounds.uniform(2), 100, sphere, rng)
    assert sum(c.trial for c in pop) == 2 * len(pop)


# -- PSO ------------------------------------------------------------------------


def test_inertia_endpoints():
    assert inertia(0, 1000, 1.0, 0.0) == 1.0
    assert inertia(999, 1000, 1.0, 0.0) == 0.0
    assert inertia(0, 1, 0.9, 0.4) == 0.9
    assert inertia(2, 5, 0.9, 0.4) == pytest.approx(0.65)


def test_pso_velocity_arithmetic():
    v = pso_velocity(
        np.array([1.0]), np.array([2.0]), np.array([3.0]), np.array([5.0]), 0.5, 2.0, 2.0, np.array([0.25]), np.array([0.5])
    )
    # 0.5*1 + 2*0.25*(3-2) + 2*0.5*(5-2)
    np.testing.assert_allclose(v, [4.0])


def test_pso_fixed_point():
    rng = make_rng(0)
    x = np.array([0.3, -0.2])
    pop = [Candidate(x.copy(), sphere(x), velocity=np.zeros(2), best_genes=x.copy(), best_cost=sphere(x)) for _ in range(4)]
    pso_step(pop, x.copy(), 0, SHORT, sphere, rng)
    for p in pop:
        np.testing.assert_array_equal(p.genes, x)
        np.testing.assert_array_equal(p.velocity, 0.0)


def test_pso_personal_best_monotone():
    rng = make_rng(3)
    cfg = OptimizerConfig(iterations=30)
    pop = _population(rng, 6, 4)
    for p in pop:
        p.velocity = np.zeros(4)
        p.best_genes, p.best_cost = p.genes, p.cost
    for t in range(30):
        before = [p.best_cost for p in pop]
        i = int(np.argmin(before))
        pso_step(pop, pop[i].best_genes, t, cfg, sphere, rng)
        assert all(p.best_cost <= b for p, b in zip(pop, before))
        assert all(sphere(p.best_genes) == p.best_cost for p in pop)


# -- DE -------------------------------------------------------------------------


def test_de_mutant_arithmetic():
    a, b, c, best = (np.array([v]) for v in (1.0, 4.0, 2.0, 3.0))
    np.testing.assert_allclose(de_mutant(a, b, c, best, 0.5), [1 + 0.5 * 2 + 0.5 * 2])
    np.testing.assert_allclose(de_mutant(a, b, c, best, 0.5, "rand1"), [2.0])
    with pytest.raises(ValueError):
        de_mutant(a, b, c, best, 0.5, "best2")


def test_de_crossover_extremes():
    t = np.zeros(5)
    m = np.ones(5)
    r = np.full(5, 0.5)
    np.testing.assert_array_equal(de_crossover(t, m, 0.0, 2, r.copy()), [0, 0, 1, 0, 0])
    np.testing.assert_array_equal(de_crossover(t, m, 1.0, 2, r.copy()), m)


@settings(max_examples=40, deadline=None)
@given(cr=st.floats(0, 1), seed=st.integers(0, 1000))
def test_de_crossover_takes_each_gene_from_a_parent(cr, seed):
    rng = np.random.default_rng(seed)
    t, m = rng.normal(size=8), rng.normal(size=8)
    forced = int(rng.integers(8))
    u = de_crossover(t, m, cr, forced, rng.random(8))
    assert u[forced] == m[forced]
    assert np.all((u == t) | (u == m))


def test_de_step_needs_four():
    rng = make_rng(0)
    pop = _population(rng, 3)
    with pytest.raises(ValueError):
        de_step(pop, pop[0].genes, SHORT, sphere, rng)


def test_de_population_best_monotone():
    rng = make_rng(5)
    pop = _population(rng, 8, 5, rastrigin)
    for _ in range(40):
        before = [c.cost for c in pop]
        de_step(pop, fittest(pop).genes, SHORT, rastrigin, rng)
        assert all(c.cost <= b for c, b in zip(pop, before))


def test_callback_sees_every_iteration():
    seen = []
    optimize("de", SHORT, GeneBounds.uniform(3), sphere, 0, callback=lambda t, pop: seen.append((t, len(pop))))
    assert seen == [(t, SHORT.population) for t in range(SHORT.iterations)]


def test_abc_sphere_reference_threshold():
    res = optimize("abc", OptimizerConfig(), GeneBounds.uniform(10), sphere, 0)
    assert res.best_cost < 1e-3


@pytest.mark.parametrize("engine", ENGINES)
def test_best_never_worse_than_any_evaluation(engine):
    seen = []

    def f(x):
        seen.append(rastrigin(x))
        return seen[-1]

    res = optimize(engine, SHORT, GeneBounds.uniform(4), f, 9)
    assert res.best_cost == min(seen)
    assert len(seen) == res.evaluations
