import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scenariotest.errors import BadPopulationSize, UnevaluatedMember
from scenariotest.library import ParameterSpec, get_template
from scenariotest.sampling import (
    GAParams,
    GeneticSampler,
    UniformSampler,
    denormalize,
    derive_seed,
    make_rng,
    make_sampler,
    snap,
)

UNIT = ParameterSpec("u", "", 0.0, 1.0)
SPAN = ParameterSpec("span", "m", 10.0, 30.0)
STEPPED = ParameterSpec("k", "", 0.0, 10.0, kind="integer-stepped", step=1.0)


def test_degenerate_range_always_returns_the_point():
    fixed = ParameterSpec("c", "m", 5.0, 5.0)
    s = UniformSampler([fixed], seed=3)
    assert all(s.sample() == {"c": 5.0} for _ in range(50))


def test_uniform_mean_and_deciles():
    s = UniformSampler([UNIT], seed=0)
    xs = np.array([s.sample()["u"] for _ in range(10_000)])
    assert 0.48 <= xs.mean() <= 0.52
    freq = np.histogram(xs, bins=10, range=(0, 1))[0] / xs.size
    assert np.all((freq >= 0.08) & (freq <= 0.12))


def test_uniform_stepped_values_on_lattice():
    s = UniformSampler([STEPPED], seed=1)
    vals = {s.sample()["k"] for _ in range(500)}
    assert vals == {float(i) for i in range(11)}


def test_uniform_deterministic_per_seed():
    specs = get_template("ped_crossing").parameters
    a, b, c = (UniformSampler(specs, seed) for seed in (5, 5, 6))
    da = [a.sample() for _ in range(20)]
    assert da == [b.sample() for _ in range(20)]
    assert da != [c.sample() for _ in range(20)]


def test_derive_seed_is_stable_and_distinct():
    assert derive_seed(0, 1, 0) == derive_seed(0, 1, 0)
    seeds = {derive_seed(0, 1, i) for i in range(1000)}
    assert len(seeds) == 1000
    assert all(0 <= s < 2**64 for s in seeds)
    assert derive_seed(0, 0, 3) != derive_seed(0, 1, 3)


def test_streams_are_independent():
    assert make_rng(9, 0).random() != make_rng(9, 1).random()


@pytest.mark.parametrize("gene, spec, expected", [
    (0.49, STEPPED, 5.0), (0.5, SPAN, 20.0), (0.0, SPAN, 10.0), (1.0, SPAN, 30.0),
    (0.44, STEPPED, 4.0), (0.45, STEPPED, 4.0),  # exact tie goes low
    (1.0, STEPPED, 10.0),
])
def test_denormalize_examples(gene, spec, expected):
    assert denormalize([gene], [spec])[spec.name] == pytest.approx(expected)


def test_denormalize_gene_count():
    with pytest.raises(ValueError):
        denormalize([0.1, 0.2], [SPAN])


def test_snap_clamps_to_lattice():
    p = ParameterSpec("q", "", 0.0, 1.5, kind="integer-stepped", step=0.5)
    assert snap(0.74, p) == 0.5
    assert snap(0.76, p) == 1.0
    assert snap(9.0, p) == 1.5
    assert snap(-3.0, p) == 0.0


def test_ga_initial_population():
    ga = GeneticSampler([SPAN, STEPPED], seed=0)
    assert len(ga.population.members) == 24
    assert ga.population.generation == 0
    for m in ga.population.members:
        assert m.fitness is None
        assert np.all((m.genes >= 0) & (m.genes <= 1))


@pytest.mark.parametrize("size", [0, 1])
def test_bad_population_size(size):
    with pytest.raises(BadPopulationSize):
        GeneticSampler([SPAN], population_size=size, seed=0)


def test_unevaluated_member():
    ga = GeneticSampler([SPAN], seed=0)
    ga.set_fitness([0.5] * 23)
    with pytest.raises(UnevaluatedMember):
        ga.next_generation()


def test_elites_survive_unchanged():
    ga = GeneticSampler([SPAN, UNIT, STEPPED], seed=4)
    fit = list(np.linspace(0, 1, 24))
    fit[3] = 5.0
    ga.set_fitness(fit)
    best = [ga.population.members[3].genes.copy(), ga.population.members[23].genes.copy()]
    nxt = ga.next_generation()
    assert nxt.generation == 1
    np.testing.assert_array_equal(nxt.members[0].genes, best[0])
    np.testing.assert_array_equal(nxt.members[1].genes, best[1])
    assert all(m.fitness is None for m in nxt.members)


def test_no_crossover_no_mutation_yields_copies():
    ga = GeneticSampler([SPAN, UNIT], seed=2, crossover_prob=0.0, mutation_prob=0.0)
    parents = {tuple(m.genes) for m in ga.population.members}
    ga.set_fitness(list(range(24)))
    for m in ga.next_generation().members:
        assert tuple(m.genes) in parents


def _hill(genes):
    # smooth monotone landscape on the unit box
    return float(np.sum(genes))


def _evolve(seed, generations=10, specs=(UNIT, UNIT, UNIT)):
    ga = GeneticSampler(list(specs), seed=seed)
    means, bests = [], []
    for _ in range(generations):
        fit = [_hill(m.genes) for m in ga.population.members]
        ga.set_fitness(fit)
        means.append(np.mean(fit))
        bests.append(max(fit))
        ga.next_generation()
    return means, bests


def test_ga_improves_mean_fitness_on_monotone_landscape():
    improved = 0
    for seed in range(20):
        means, _ = _evolve(seed)
        improved += means[-1] > means[0]
    assert improved >= 16


def test_ga_best_never_decreases():
    for seed in range(20):
        _, bests = _evolve(seed)
        assert all(b1 >= b0 for b0, b1 in zip(bests, bests[1:]))


def test_ga_deterministic():
    a, _ = _evolve(11)
    b, _ = _evolve(11)
    assert a == b


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32), pop=st.integers(2, 12), elit=st.integers(0, 2),
       fits=st.lists(st.floats(0, 2), min_size=12, max_size=12))
def test_ga_invariants(seed, pop, elit, fits):
    ga = GeneticSampler([SPAN, STEPPED], seed=seed, params=GAParams(population_size=pop, elitism=min(elit, pop)))
    ga.set_fitness(fits[:pop])
    nxt = ga.next_generation()
    assert len(nxt.members) == pop
    for m in nxt.members:
        assert np.all((m.genes >= 0) & (m.genes <= 1))
    for b in ga.bindings():
        assert 10 <= b["span"] <= 30
        assert b["k"] == int(b["k"])


def test_make_sampler():
    assert make_sampler("uniform", [SPAN], 0).kind == "uniform"
    assert make_sampler("genetic", [SPAN], 0, population_size=6).params.population_size == 6
    with pytest.raises(ValueError):
        make_sampler("annealing", [SPAN], 0)
