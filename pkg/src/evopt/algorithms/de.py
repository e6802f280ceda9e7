"""Differential evolution, rand/1/bin, after Storn & Price (1997).

Mutant ``v = x_r1 + F*(x_r2 - x_r3)`` with r1, r2, r3 distinct and different
from the target; binomial crossover with one forced index; the trial replaces
the target only if its fitness strictly improves.  Draw order per target:
the three donor indices (one choice-without-replacement draw), the forced
crossover index, then the d-vector of crossover uniforms.
"""

from __future__ import annotations

import numpy as np

from .base import HyperParam, PopulationOptimizer

__all__ = ["DE"]


class DE(PopulationOptimizer):

    name = "de"
    version = "1.0"
    pop_alias = "npop"
    default_population = 30
    min_population = 4
    HYPERPARAMS = {
        "F": HyperParam("float", 0.5, 0.0, 2.0, doc="differential weight"),
        "CR": HyperParam("float", 0.7, 0.0, 1.0, doc="crossover probability"),
    }

    def __init__(self, mode, fit, bounds, npop: int = 30, F: float = 0.5,
                 CR: float = 0.7, seed=None, workers: int = 1):
        super().__init__(mode, fit, bounds, population_size=npop,
                         seed=seed, workers=workers, hyper={"F": F, "CR": CR})
        self.F = float(F)
        self.CR = float(CR)

    def _step(self, k: int):
        n, d = self._pop.shape
        rng = self.rng
        trials = np.empty_like(self._pop)
        for i in range(n):
            picks = rng.choice(n - 1, size=3, replace=False)
            r1, r2, r3 = [p + (p >= i) for p in picks]
            jrand = int(rng.integers(d))
            mask = rng.random(d) < self.CR
            mask[jrand] = True
            mutant = self._pop[r1] + self.F * (self._pop[r2] - self._pop[r3])
            trials[i] = np.where(mask, mutant, self._pop[i])
        trials = self.space.repair(trials)
        g = self._evaluate(trials)
        improved = g < self._fit
        self._pop[improved] = trials[improved]
        self._fit[improved] = g[improved]
