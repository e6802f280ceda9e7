"""Bat algorithm, after Yang (2010).

Per bat: frequency ``f = fmin + (fmax - fmin)*beta`` with ``beta ~ U(0,1)``,
velocity ``v += (x - gbest)*f``, candidate ``x + v``; with probability
``1 - r_k`` the candidate is replaced by a local walk around the best:
each coordinate moves with probability ``walk_dims`` by
``eps * A_mean * walk_scale * (ub - lb)``, ``eps ~ U(-1, 1)``.  The walk
differs from the textbook's dense unit-scale form in two ways that matter on
mixed-unit, high-dimensional spaces: steps are scaled per variable to its
range, and only a random coordinate subset moves, so refinement proceeds
coordinate-wise instead of disturbing every already-converged variable at
once.  After the batch evaluation a candidate is accepted if a uniform draw
falls below the bat's loudness and it does not worsen the bat; acceptance
decays the loudness (``A *= alpha_bat``) while the pulse rate grows globally
as ``r_k = r0*(1 - exp(-gamma_bat*k))``.

Draw order per bat: beta, the walk uniform, and on the walk branch the
coordinate mask d-vector then the eps d-vector; after evaluation, one
acceptance uniform per bat in index order.

Draw order per generation: for each bat, beta, the walk uniform, and (walk
branch only) the eps d-vector; after evaluation, one acceptance uniform per
bat in index order.
"""

from __future__ import annotations

import math

import numpy as np

from .base import HyperParam, PopulationOptimizer

__all__ = ["BAT"]


class BAT(PopulationOptimizer):

    name = "bat"
    version = "1.0"
    pop_alias = "nbats"
    default_population = 30
    min_population = 2
    HYPERPARAMS = {
        "fmin": HyperParam("float", 0.0, None, None, doc="minimum frequency"),
        "fmax": HyperParam("float", 1.0, None, None, doc="maximum frequency"),
        "loudness": HyperParam("float", 1.0, 0.0, 2.0, doc="initial loudness A0"),
        "pulse_rate": HyperParam("float", 0.5, 0.0, 1.0, doc="asymptotic pulse rate r0"),
        "alpha_bat": HyperParam("float", 0.9, 0.0, 1.0, doc="loudness decay factor"),
        "gamma_bat": HyperParam("float", 0.9, 0.0, None, doc="pulse-rate growth rate"),
        "walk_scale": HyperParam("float", 0.5, 0.0, 1.0,
                                 doc="local-walk step as a fraction of each range"),
        "walk_dims": HyperParam("float", 0.25, 0.0, 1.0,
                                doc="per-coordinate probability of moving in a walk"),
    }

    def __init__(self, mode, fit, bounds, nbats: int = 30, fmin: float = 0.0,
                 fmax: float = 1.0, loudness: float = 1.0, pulse_rate: float = 0.5,
                 alpha_bat: float = 0.9, gamma_bat: float = 0.9,
                 walk_scale: float = 0.5, walk_dims: float = 0.25,
                 seed=None, workers: int = 1):
        if fmin > fmax:
            raise ValueError(f"fmin={fmin} must not exceed fmax={fmax}")
        super().__init__(mode, fit, bounds, population_size=nbats,
                         seed=seed, workers=workers,
                         hyper={"fmin": fmin, "fmax": fmax, "loudness": loudness,
                                "pulse_rate": pulse_rate, "alpha_bat": alpha_bat,
                                "gamma_bat": gamma_bat, "walk_scale": walk_scale,
                                "walk_dims": walk_dims})
        self.fmin = float(fmin)
        self.fmax = float(fmax)
        self.loudness = float(loudness)
        self.pulse_rate = float(pulse_rate)
        self.alpha_bat = float(alpha_bat)
        self.gamma_bat = float(gamma_bat)
        self.walk_scale = float(walk_scale)
        self.walk_dims = float(walk_dims)

    def _init_state(self):
        self._vel = np.zeros_like(self._pop)
        self._A = np.full(self.population_size, self.loudness)

    def _step(self, k: int):
        n, d = self._pop.shape
        rng = self.rng
        r_k = self.pulse_rate * (1.0 - math.exp(-self.gamma_bat * k))
        gbest = self._xbest.copy()
        mean_a = float(self._A.mean())
        span = self.space.internal_upper - self.space.internal_lower
        cands = np.empty_like(self._pop)
        for i in range(n):
            beta = rng.random()
            f = self.fmin + (self.fmax - self.fmin) * beta
            self._vel[i] += (self._pop[i] - gbest) * f
            cand = self._pop[i] + self._vel[i]
            if rng.random() > r_k:
                mask = rng.random(d) < self.walk_dims
                eps = rng.uniform(-1.0, 1.0, d)
                step = eps * mean_a * self.walk_scale * span
                cand = np.where(mask, gbest + step, gbest)
            cands[i] = cand
        cands = self.space.repair(cands)
        g = self._evaluate(cands)
        for i in range(n):
            if rng.random() < self._A[i] and g[i] <= self._fit[i]:
                self._pop[i] = cands[i]
                self._fit[i] = g[i]
                self._A[i] *= self.alpha_bat

    def _after_inject(self, indices):
        self._vel[indices] = 0.0

    def _state_arrays(self):
        return {"vel": self._vel, "A": self._A}

    def _restore_extra(self, arrays, meta):
        self._vel = arrays["vel"].copy()
        self._A = arrays["A"].copy()
