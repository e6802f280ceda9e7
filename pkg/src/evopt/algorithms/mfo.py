"""Moth-flame optimization, after Mirjalili (2015).

Flames are the best positions found so far, kept sorted by fitness.  Each
moth spirals around its assigned flame,

    S = D * exp(b*t) * cos(2*pi*t) + flame,    D = |flame - moth|,

with ``t ~ U(-1, 1)`` drawn per coordinate.  The number of flames moths are
assigned to decreases from the population size to 1 across the run
(``round(N - k*(N-1)/total)``); moths beyond the flame count follow the last
flame.  After evaluation the flame set is the best N of the union of old
flames and new moths.
"""

from __future__ import annotations

import numpy as np

from .base import HyperParam, PopulationOptimizer

__all__ = ["MFO"]


class MFO(PopulationOptimizer):

    name = "mfo"
    version = "1.0"
    pop_alias = "nmoths"
    default_population = 30
    min_population = 2
    HYPERPARAMS = {
        "b": HyperParam("float", 1.0, 0.01, 5.0, doc="spiral shape constant"),
    }

    def __init__(self, mode, fit, bounds, nmoths: int = 30, b: float = 1.0,
                 seed=None, workers: int = 1):
        super().__init__(mode, fit, bounds, population_size=nmoths,
                         seed=seed, workers=workers, hyper={"b": b})
        self.b = float(b)

    def _init_state(self):
        order = np.argsort(self._fit, kind="stable")
        self._flames = self._pop[order].copy()
        self._flame_fit = self._fit[order].copy()

    def flame_count(self, k: int) -> int:
        n = self.population_size
        return max(1, int(round(n - k * (n - 1) / self._ngen_total)))

    def _step(self, k: int):
        n, d = self._pop.shape
        rng = self.rng
        n_flames = self.flame_count(k)
        new = np.empty_like(self._pop)
        for i in range(n):
            flame = self._flames[min(i, n_flames - 1)]
            t = rng.uniform(-1.0, 1.0, d)
            dist = np.abs(flame - self._pop[i])
            new[i] = dist * np.exp(self.b * t) * np.cos(2.0 * np.pi * t) + flame
        new = self.space.repair(new)
        g = self._evaluate(new)
        self._pop, self._fit = new, g
        pool = np.vstack([self._flames, new])
        pool_fit = np.concatenate([self._flame_fit, g])
        order = np.argsort(pool_fit, kind="stable")[:n]
        self._flames = pool[order].copy()
        self._flame_fit = pool_fit[order].copy()

    def _after_inject(self, indices):
        pool = np.vstack([self._flames, self._pop[indices]])
        pool_fit = np.concatenate([self._flame_fit, self._fit[indices]])
        order = np.argsort(pool_fit, kind="stable")[:self.population_size]
        self._flames = pool[order].copy()
        self._flame_fit = pool_fit[order].copy()

    def _state_arrays(self):
        return {"flames": self._flames, "flame_fit": self._flame_fit}

    def _restore_extra(self, arrays, meta):
        self._flames = arrays["flames"].copy()
        self._flame_fit = arrays["flame_fit"].copy()
