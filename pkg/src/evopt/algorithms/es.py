"""Generational evolution strategy with tournament selection, blend
crossover, and Gaussian mutation.

Each generation produces a full replacement population with one elite copy of
the current best.  For every other offspring: two parents are picked by
3-way tournament; with probability ``cxpb`` a blend crossover mixes them with
per-coordinate weight ``gamma = (1 + 2*alpha)*u - alpha`` (``alpha = 0`` keeps
children inside the parents' coordinate interval), otherwise the first parent
is copied.  Each coordinate then mutates with probability ``mutpb`` by a
Gaussian step scaled to the population's per-coordinate spread, which keeps
mutation proportionate as the search contracts.

Draw order per offspring: two tournaments (one index triple each), the
crossover uniform, the blend weight d-vector (crossover branch only), the
mutation-mask d-vector, and the mutation-step normal d-vector.
"""

from __future__ import annotations

import numpy as np

from .base import HyperParam, PopulationOptimizer

__all__ = ["ES", "tournament_pick", "blend", "gaussian_mutation"]


def tournament_pick(rng: np.random.Generator, fitness: np.ndarray, size: int) -> int:
    idx = rng.integers(len(fitness), size=size)
    return int(idx[np.argmin(fitness[idx])])


def blend(rng: np.random.Generator, p1: np.ndarray, p2: np.ndarray,
          alpha: float) -> np.ndarray:
    gamma = (1.0 + 2.0 * alpha) * rng.random(p1.shape[0]) - alpha
    return gamma * p1 + (1.0 - gamma) * p2


def gaussian_mutation(rng: np.random.Generator, child: np.ndarray, mutpb: float,
                      sigma: np.ndarray) -> np.ndarray:
    mask = rng.random(child.shape[0]) < mutpb
    step = sigma * rng.normal(size=child.shape[0])
    return np.where(mask, child + step, child)


class ES(PopulationOptimizer):

    name = "es"
    version = "1.0"
    pop_alias = "npop"
    default_population = 30
    min_population = 2
    HYPERPARAMS = {
        "cxpb": HyperParam("float", 0.7, 0.0, 1.0, doc="crossover probability"),
        "mutpb": HyperParam("float", 0.2, 0.0, 1.0, doc="per-coordinate mutation probability"),
        "alpha": HyperParam("float", 0.5, 0.0, 1.0, doc="blend extension coefficient"),
        "tournament": HyperParam("int", 3, 2, 10, doc="tournament size"),
    }

    def __init__(self, mode, fit, bounds, npop: int = 30, cxpb: float = 0.7,
                 mutpb: float = 0.2, alpha: float = 0.5, tournament: int = 3,
                 seed=None, workers: int = 1):
        super().__init__(mode, fit, bounds, population_size=npop,
                         seed=seed, workers=workers,
                         hyper={"cxpb": cxpb, "mutpb": mutpb, "alpha": alpha,
                                "tournament": tournament})
        self.cxpb = float(cxpb)
        self.mutpb = float(mutpb)
        self.alpha = float(alpha)
        self.tournament = int(tournament)

    def _step(self, k: int):
        n, d = self._pop.shape
        rng = self.rng
        span = self.space.internal_upper - self.space.internal_lower
        sigma = np.maximum(self._pop.std(axis=0), 1e-12 * span)
        offspring = np.empty_like(self._pop)
        offspring[0] = self._pop[int(np.argmin(self._fit))]
        for i in range(1, n):
            p1 = self._pop[tournament_pick(rng, self._fit, self.tournament)]
            p2 = self._pop[tournament_pick(rng, self._fit, self.tournament)]
            if rng.random() < self.cxpb:
                child = blend(rng, p1, p2, self.alpha)
            else:
                child = p1.copy()
            offspring[i] = gaussian_mutation(rng, child, self.mutpb, sigma)
        offspring = self.space.repair(offspring)
        g = self._evaluate(offspring)
        self._pop, self._fit = offspring, g
