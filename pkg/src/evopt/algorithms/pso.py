"""Particle swarm optimization with inertia weight, after Kennedy & Eberhart
(1995) and Shi & Eberhart's inertia formulation.

    v <- w*v + c1*r1*(pbest - x) + c2*r2*(gbest - x),    x <- x + v

with r1, r2 drawn per particle as d-vectors (r1 first).  The global best used
in a generation is the best personal best at the generation start; personal
and global bests are refreshed after the batch evaluation.
"""

from __future__ import annotations

import numpy as np

from .base import HyperParam, PopulationOptimizer

__all__ = ["PSO"]


class PSO(PopulationOptimizer):

    name = "pso"
    version = "1.0"
    pop_alias = "nparticles"
    default_population = 30
    min_population = 2
    HYPERPARAMS = {
        "w": HyperParam("float", 0.7298, 0.0, 1.5, doc="inertia weight"),
        "c1": HyperParam("float", 1.49618, 0.0, 4.0, doc="cognitive coefficient"),
        "c2": HyperParam("float", 1.49618, 0.0, 4.0, doc="social coefficient"),
    }

    def __init__(self, mode, fit, bounds, nparticles: int = 30, w: float = 0.7298,
                 c1: float = 1.49618, c2: float = 1.49618, seed=None,
                 workers: int = 1):
        super().__init__(mode, fit, bounds, population_size=nparticles,
                         seed=seed, workers=workers,
                         hyper={"w": w, "c1": c1, "c2": c2})
        self.w = float(w)
        self.c1 = float(c1)
        self.c2 = float(c2)

    def _init_state(self):
        self._vel = np.zeros_like(self._pop)
        self._pbest = self._pop.copy()
        self._pbest_fit = self._fit.copy()

    def _step(self, k: int):
        n, d = self._pop.shape
        rng = self.rng
        gbest = self._pbest[int(np.argmin(self._pbest_fit))].copy()
        for i in range(n):
            r1 = rng.random(d)
            r2 = rng.random(d)
            self._vel[i] = (self.w * self._vel[i]
                            + self.c1 * r1 * (self._pbest[i] - self._pop[i])
                            + self.c2 * r2 * (gbest - self._pop[i]))
        new = self.space.repair(self._pop + self._vel)
        g = self._evaluate(new)
        self._pop, self._fit = new, g
        improved = g < self._pbest_fit
        self._pbest[improved] = new[improved]
        self._pbest_fit[improved] = g[improved]

    def _after_inject(self, indices):
        self._vel[indices] = 0.0
        self._pbest[indices] = self._pop[indices]
        self._pbest_fit[indices] = self._fit[indices]

    def _state_arrays(self):
        return {"vel": self._vel, "pbest": self._pbest, "pbest_fit": self._pbest_fit}

    def _restore_extra(self, arrays, meta):
        self._vel = arrays["vel"].copy()
        self._pbest = arrays["pbest"].copy()
        self._pbest_fit = arrays["pbest_fit"].copy()
