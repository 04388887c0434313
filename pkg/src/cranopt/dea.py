"""Differential evolution over the guarded box [eps, 1-eps]^dim.

Mutation uses an elite-archive difference plus a population difference,
elementwise crossover, and greedy one-to-one selection with ties going to
the trial vector.  Fixed (seed, params, objective) gives bit-identical
results.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class DeaParams:
    population_size: int = 40
    max_generations: int = 300
    crossover_range: tuple = (0.1, 0.9)
    archive_fraction: float = 0.1
    bounds_guard: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 4:
            raise ValueError("population_size must be >= 4 for mutation")
        if not 0.0 < self.archive_fraction <= 1.0:
            raise ValueError("archive_fraction must lie in (0, 1]")


@dataclass
class DeaResult:
    best_genes: np.ndarray
    best_fitness: float
    history: np.ndarray = field(default=None)
    evaluations: int = 0


def _clamp(genes, guard):
    return np.clip(genes, guard, 1.0 - guard)


def initialize(dim, params, rng, pinned=None):
    """Uniform initial population inside the guarded box.

    ``pinned`` optionally replaces the first individual (e.g. the all-0.5
    baseline so the optimizer can never end up below it).
    """
    lo, hi = params.bounds_guard, 1.0 - params.bounds_guard
    pop = lo + rng.random((params.population_size, dim)) * (hi - lo)
    if pinned is not None:
        pop[0] = _clamp(np.asarray(pinned, dtype=float), params.bounds_guard)
    return pop

def mutate(population, archive, target_idx, rng, guard):
    """Difference mutation toward a random elite, clamped into the box."""
    n = len(population)
    if n < 4:
        raise ValueError("population too small for mutation")
    target = population[target_idx]
    elite = archive[rng.integers(len(archive))]
    others = [i for i in range(n) if i != target_idx]
    p1, p2 = rng.choice(others, size=2, replace=False)
    lam = 1.0 - rng.random()  # Uniform(0, 1]
    mutant = target + lam * (elite - target) \
        + lam * (population[p1] - population[p2])
    return _clamp(mutant, guard)


def crossover(parent, mutant, cr, rng):
    """Elementwise binomial crossover with probability ``cr``."""
    mask = rng.random(parent.size) <= cr
    return np.where(mask, mutant, parent)


def select(parent, trial, parent_fitness, trial_fitness):
    """Greedy one-to-one selection; ties go to the trial vector."""
    if trial_fitness >= parent_fitness:
        return trial, trial_fitness
    return parent, parent_fitness


def optimize(objective, dim, params=None, pinned=None, progress=None):
    """Maximize ``objective`` over the guarded box.

    ``objective`` maps a length-``dim`` gene vector to a float; failures
    signalled by ValueError count as fitness -inf.  ``progress``, if
    given, is called with (generation, best, mean) each generation.
    """
    if params is None:
        params = DeaParams()
    rng = np.random.default_rng(params.seed)
    guard = params.bounds_guard

    def fitness(genes):
        try:
            return float(objective(genes))
        except ValueError:
            return -np.inf

    pop = initialize(dim, params, rng, pinned=pinned)
    fit = np.array([fitness(ind) for ind in pop])
    evals = params.population_size
    archive_size = max(1, int(round(params.archive_fraction
                                    * params.population_size)))
    cr_lo, cr_hi = params.crossover_range

    history = np.empty(params.max_generations)
    for g in range(params.max_generations):
        elite_idx = np.argsort(fit)[::-1][:archive_size]
        archive = pop[elite_idx]
        for i in range(params.population_size):
            mutant = mutate(pop, archive, i, rng, guard)
            cr = rng.uniform(cr_lo, cr_hi)
            trial = crossover(pop[i], mutant, cr, rng)
            trial_fit = fitness(trial)
            evals += 1
            pop[i], fit[i] = select(pop[i], trial, fit[i], trial_fit)
        history[g] = fit.max()
        if progress is not None:
            progress(g, history[g], fit.mean())
    best = int(np.argmax(fit))
    return DeaResult(best_genes=pop[best].copy(), best_fitness=float(fit[best]),
                     history=history, evaluations=evals)
