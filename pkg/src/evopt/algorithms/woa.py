"""Whale optimization algorithm, after Mirjalili & Lewis (2016).

Per whale, with probability 0.5 an encircling move

    x <- leader - A * |C * leader - x|,   A = 2*a*r1 - a,   C = 2*r2,

where the leader is the incumbent best when ``|A| < 1`` and a random whale
otherwise (exploration); else the spiral bubble-net move

    x <- D' * exp(b*l) * cos(2*pi*l) + best,   D' = |best - x|,  l ~ U(-1, 1).

``a`` decreases linearly from 2 to 0 across the run.  Draw order per whale:
p; encircling branch draws r1, r2 (scalars) and, if exploring, the random
whale index; the spiral branch draws l.
"""

from __future__ import annotations

import numpy as np

from .base import HyperParam, PopulationOptimizer

__all__ = ["WOA"]


class WOA(PopulationOptimizer):

    name = "woa"
    version = "1.0"
    pop_alias = "nwhales"
    default_population = 30
    min_population = 2
    HYPERPARAMS = {
        "b": HyperParam("float", 1.0, 0.01, 5.0, doc="spiral shape constant"),
    }

    def __init__(self, mode, fit, bounds, nwhales: int = 30, b: float = 1.0,
                 seed=None, workers: int = 1):
        super().__init__(mode, fit, bounds, population_size=nwhales,
                         seed=seed, workers=workers, hyper={"b": b})
        self.b = float(b)

    def _step(self, k: int):
        n, d = self._pop.shape
        rng = self.rng
        a = 2.0 * (1.0 - k / self._ngen_total)
        best = self._xbest.copy()
        new = np.empty_like(self._pop)
        for i in range(n):
            x = self._pop[i]
            p = rng.random()
            if p < 0.5:
                r1 = rng.random()
                r2 = rng.random()
                A = 2.0 * a * r1 - a
                C = 2.0 * r2
                if abs(A) < 1.0:
                    new[i] = best - A * np.abs(C * best - x)
                else:
                    m = int(rng.integers(n))
                    new[i] = self._pop[m] - A * np.abs(C * self._pop[m] - x)
            else:
                l = rng.uniform(-1.0, 1.0)
                dist = np.abs(best - x)
                new[i] = dist * np.exp(self.b * l) * np.cos(2.0 * np.pi * l) + best
        new = self.space.repair(new)
        g = self._evaluate(new)
        self._pop, self._fit = new, g
