"""Parameter samplers: uniform random and a real-valued genetic algorithm.

Both samplers draw from numpy's PCG64 generator, seeded through
``numpy.random.SeedSequence`` so streams are portable across platforms.
Genomes live in the unit hypercube; :func:`denormalize` maps them onto the
template's parameter ranges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BadPopulationSize, UnevaluatedMember
from .library import ParameterSpec

# stream ids for SeedSequence spawn keys
SAMPLER_STREAM = 0
CASE_STREAM = 1


def make_rng(seed, stream: int = SAMPLER_STREAM) -> np.random.Generator:
    """PCG64 generator for ``stream`` of ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(stream,))))


def derive_seed(seed: int, stream: int, index: int) -> int:
    """64-bit seed for item ``index`` of ``stream``, fixed by ``seed`` alone."""
    words = np.random.SeedSequence(int(seed), spawn_key=(stream, int(index))).generate_state(2, np.uint32)
    return int(words[0]) | (int(words[1]) << 32)


def snap(value: float, spec: ParameterSpec) -> float:
    """Nearest lattice point of a stepped spec; exact ties go to the lower point."""
    k = (value - spec.lower) / spec.step
    lo = math.floor(k)
    if k - lo > 0.5:
        lo += 1
    lo = min(max(lo, 0), spec.lattice_size - 1)
    return spec.lower + lo * spec.step


def denormalize(genes: Sequence[float], specs: Sequence[ParameterSpec]) -> dict[str, float]:
    if len(genes) != len(specs):
        raise ValueError(f"expected {len(specs)} genes, got {len(genes)}")
    out = {}
    for g, p in zip(genes, specs):
        v = p.lower + float(g) * (p.upper - p.lower)
        if p.stepped:
            v = snap(v, p)
        out[p.name] = min(max(v, p.lower), p.upper)
    return out


class UniformSampler:
    """Independent uniform draws over each parameter range."""

    kind = "uniform"

    def __init__(self, specs: Sequence[ParameterSpec], seed: int):
        self.specs = tuple(specs)
        self.rng = make_rng(seed)
        self.history: list[tuple[dict, float]] = []

    def sample(self) -> dict[str, float]:
        out = {}
        for p in self.specs:
            if p.stepped:
                k = int(self.rng.integers(0, p.lattice_size))
                out[p.name] = min(p.lower + k * p.step, p.upper)
            else:
                out[p.name] = p.lower + float(self.rng.random()) * (p.upper - p.lower)
        return out

    def record(self, bindings, score: float) -> None:
        self.history.append((dict(bindings), score))


@dataclass
class Genome:
    genes: np.ndarray
    fitness: float | None = None


@dataclass
class Population:
    generation: int
    members: list[Genome] = field(default_factory=list)


@dataclass(frozen=True)
class GAParams:
    population_size: int = 24
    elitism: int = 2
    tournament_size: int = 3
    crossover_prob: float = 0.9
    mutation_prob: float | None = None  # None means 1 / gene count
    mutation_sigma: float = 0.1

    def __post_init__(self):
        if self.population_size < 2:
            raise BadPopulationSize(f"population size must be >= 2, got {self.population_size}")
        if not 0 <= self.elitism <= self.population_size:
            raise ValueError("elitism must lie in [0, population_size]")
        if self.tournament_size < 1:
            raise ValueError("tournament size must be >= 1")


class GeneticSampler:
    """Generational GA over normalized genomes, maximizing fitness.

    Each generation keeps the ``elitism`` best members unchanged (ties by
    lower index) and fills the rest with children of tournament-selected
    parent pairs: with probability ``crossover_prob`` the pair undergoes
    uniform crossover (each gene swapped with probability 1/2), then every
    gene is perturbed by N(0, sigma) with probability ``mutation_prob`` and
    clamped to [0, 1].
    """

    kind = "genetic"

    def __init__(self, specs: Sequence[ParameterSpec], population_size: int = 24, seed: int = 0,
                 params: GAParams | None = None, **overrides):
        if params is None:
            params = GAParams(population_size=population_size, **overrides)
        self.params = params
        self.specs = tuple(specs)
        self.n_genes = len(self.specs)
        self.rng = make_rng(seed)
        self.history: list[tuple[dict, float]] = []
        members = [Genome(self.rng.random(self.n_genes)) for _ in range(params.population_size)]
        self.population = Population(0, members)

    @property
    def mutation_prob(self) -> float:
        p = self.params.mutation_prob
        if p is None:
            return 1.0 / max(self.n_genes, 1)
        return p

    def bindings(self) -> list[dict[str, float]]:
        return [denormalize(m.genes, self.specs) for m in self.population.members]

    def set_fitness(self, fitnesses: Sequence[float]) -> None:
        for m, f in zip(self.population.members, fitnesses):
            m.fitness = float(f)

    def record(self, bindings, score: float) -> None:
        self.history.append((dict(bindings), score))

    def _tournament(self, fitness: np.ndarray) -> int:
        n = len(fitness)
        k = min(self.params.tournament_size, n)
        entrants = self.rng.choice(n, size=k, replace=False)
        # highest fitness wins, lower index breaks ties
        return int(min(entrants, key=lambda i: (-fitness[i], i)))

    def next_generation(self) -> Population:
        members = self.population.members
        for i, m in enumerate(members):
            if m.fitness is None:
                raise UnevaluatedMember(f"member {i} of generation {self.population.generation} has no fitness")
        fitness = np.array([m.fitness for m in members])
        n = len(members)
        order = sorted(range(n), key=lambda i: (-fitness[i], i))
        children = [Genome(members[i].genes.copy()) for i in order[: self.params.elitism]]

        p_m = self.mutation_prob
        sigma = self.params.mutation_sigma
        while len(children) < n:
            a = members[self._tournament(fitness)].genes.copy()
            b = members[self._tournament(fitness)].genes.copy()
            if self.rng.random() < self.params.crossover_prob:
                swap = self.rng.random(self.n_genes) < 0.5
                a[swap], b[swap] = b[swap], a[swap].copy()
            for child in (a, b):
                mask = self.rng.random(self.n_genes) < p_m
                child += mask * self.rng.normal(0.0, sigma, self.n_genes)
                np.clip(child, 0.0, 1.0, out=child)
                if len(children) < n:
                    children.append(Genome(child))

        self.population = Population(self.population.generation + 1, children)
        return self.population


def make_sampler(kind: str, specs: Sequence[ParameterSpec], seed: int, **hyper):
    if kind == "uniform":
        return UniformSampler(specs, seed)
    if kind == "genetic":
        return GeneticSampler(specs, seed=seed, params=GAParams(**hyper))
    raise ValueError(f"unknown sampler kind {kind!r}")
