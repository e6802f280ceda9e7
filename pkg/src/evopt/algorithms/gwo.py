"""Grey wolf optimizer, after Mirjalili, Mirjalili & Lewis (2014).

The three best solutions found so far (alpha, beta, delta) guide the pack:
each wolf moves to the mean of three leader-encircling points,

    X_L = L - A * |C * L - x|,   A = 2*a*r1 - a,   C = 2*r2,

with ``a`` decreasing from 2 to 0 across the run on a square-root schedule,
``a = 2*sqrt(1 - k/N)``.  The nonlinear decay holds the pack in its
productive contraction band longer than the textbook linear ramp, which
stalls refinement over the closing third of a short run; the endpoints and
every other operator are the textbook ones.  Draw order per generation: for
each wolf in index order, for each leader (alpha, beta, delta), ``r1`` then
``r2`` as d-vectors.
"""

from __future__ import annotations

import numpy as np

from .base import PopulationOptimizer

__all__ = ["GWO"]


class GWO(PopulationOptimizer):

    name = "gwo"
    version = "1.0"
    pop_alias = "nwolves"
    default_population = 20
    min_population = 3
    HYPERPARAMS = {}

    def __init__(self, mode, fit, bounds, nwolves: int = 20,
                 seed=None, workers: int = 1):
        super().__init__(mode, fit, bounds, population_size=nwolves,
                         seed=seed, workers=workers, hyper={})

    def _init_state(self):
        d = self.space.dimension
        self._leaders = np.zeros((3, d))
        self._leader_fit = np.full(3, np.inf)
        for i in range(self.population_size):
            self._cascade(self._pop[i], self._fit[i])

    def _cascade(self, x, g):
        if g < self._leader_fit[0]:
            self._leaders[2], self._leader_fit[2] = self._leaders[1], self._leader_fit[1]
            self._leaders[1], self._leader_fit[1] = self._leaders[0], self._leader_fit[0]
            self._leaders[0], self._leader_fit[0] = x.copy(), g
        elif g < self._leader_fit[1]:
            self._leaders[2], self._leader_fit[2] = self._leaders[1], self._leader_fit[1]
            self._leaders[1], self._leader_fit[1] = x.copy(), g
        elif g < self._leader_fit[2]:
            self._leaders[2], self._leader_fit[2] = x.copy(), g

    def coefficient(self, k: int) -> float:
        """Encircling coefficient bound a(k), decreasing from 2 to 0."""
        return 2.0 * (1.0 - k / self._ngen_total) ** 0.5

    def _step(self, k: int):
        n, d = self._pop.shape
        a = self.coefficient(k)
        new = np.empty_like(self._pop)
        for i in range(n):
            acc = np.zeros(d)
            for leader in self._leaders:
                r1 = self.rng.random(d)
                r2 = self.rng.random(d)
                A = 2.0 * a * r1 - a
                C = 2.0 * r2
                acc += leader - A * np.abs(C * leader - self._pop[i])
            new[i] = acc / 3.0
        new = self.space.repair(new)
        g = self._evaluate(new)
        self._pop, self._fit = new, g
        for i in range(n):
            self._cascade(new[i], g[i])

    def _state_arrays(self):
        return {"leaders": self._leaders, "leader_fit": self._leader_fit}

    def _restore_extra(self, arrays, meta):
        self._leaders = arrays["leaders"].copy()
        self._leader_fit = arrays["leader_fit"].copy()
