"""Simulated annealing with per-variable perturbation and geometric cooling.

One generation is one temperature level with ``chain_size`` sequential moves.
A move perturbs each variable independently with probability ``chi``: floats
take a Gaussian step scaled to ``move_scale * (high - low)``, ints and grids
are redrawn uniformly.  A move is accepted if it does not worsen the chain,
otherwise with Metropolis probability ``exp(-delta / T)``.

The temperature starts at the fitness spread of the initial random batch
(overridable) and decays geometrically to ``T_final`` across the declared
horizon.  The chain is inherently serial, so with a single chain evaluations
run one at a time regardless of the worker count.
"""

from __future__ import annotations

import math

import numpy as np

from .base import HyperParam, PopulationOptimizer
from ..space import SearchSpace

__all__ = ["SA", "perturb"]


def perturb(x: np.ndarray, space: SearchSpace, chi: float,
            rng: np.random.Generator, scale: float = 0.1) -> np.ndarray:
    """One annealing move: independent per-variable perturbation, then repair."""
    out = np.array(x, dtype=float, copy=True)
    for j, v in enumerate(space.variables):
        if rng.random() < chi:
            if v.kind == "float":
                out[j] += rng.normal(0.0, scale * (v.high - v.low))
            elif v.kind == "int":
                out[j] = rng.integers(int(v.low), int(v.high) + 1)
            else:
                out[j] = rng.integers(0, len(v.levels))
    return space.repair(out)


class SA(PopulationOptimizer):

    name = "sa"
    version = "1.0"
    pop_alias = "chain_size"
    default_population = 30
    min_population = 1
    HYPERPARAMS = {
        "chi": HyperParam("float", 0.2, 0.0, 1.0, doc="per-variable move probability"),
        "move_scale": HyperParam("float", 0.1, 0.0, 1.0,
                                 doc="float step size as a fraction of the range"),
        "T_initial": HyperParam("float", 0.0, 0.0, None,
                                doc="starting temperature; 0 derives it from the "
                                    "initial batch fitness spread"),
        "T_final": HyperParam("float", 0.0, 0.0, None,
                              doc="final temperature; 0 derives it as 1e-6 * T_initial"),
    }

    def __init__(self, mode, fit, bounds, chain_size: int = 30, chi: float = 0.2,
                 move_scale: float = 0.1, T_initial: float = 0.0,
                 T_final: float = 0.0, seed=None, workers: int = 1):
        super().__init__(mode, fit, bounds, population_size=chain_size,
                         seed=seed, workers=workers,
                         hyper={"chi": chi, "move_scale": move_scale,
                                "T_initial": T_initial, "T_final": T_final})
        self.chi = float(chi)
        self.move_scale = float(move_scale)
        self.T_initial = float(T_initial)
        self.T_final = float(T_final)

    def _init_state(self):
        spread = float(self._fit.max() - self._fit.min())
        self._t0 = self.T_initial if self.T_initial > 0 else max(spread, 1e-12)
        self._tf = self.T_final if self.T_final > 0 else max(1e-6 * self._t0, 1e-300)
        best = int(np.argmin(self._fit))
        self._current = self._pop[best].copy()
        self._g_current = float(self._fit[best])
        self._pop = self._current[None, :].copy()
        self._fit = np.array([self._g_current])

    def temperature(self, k: int) -> float:
        ratio = (self._tf / self._t0) ** (1.0 / max(self._ngen_total - 1, 1))
        return self._t0 * ratio ** (k - 1)

    def _step(self, k: int):
        t = self.temperature(k)
        for _ in range(self.population_size):
            cand = perturb(self._current, self.space, self.chi, self.rng,
                           self.move_scale)
            g = float(self._evaluate(cand[None, :])[0])
            delta = g - self._g_current
            if delta <= 0 or self.rng.random() < math.exp(-delta / t):
                self._current = cand
                self._g_current = g
        self._pop = self._current[None, :].copy()
        self._fit = np.array([self._g_current])

    def inject(self, internal, fitness):
        """Replay re-seeding: adopt the best injected point if it improves."""
        internal = np.atleast_2d(internal)
        fitness = np.asarray(fitness, dtype=float)
        if len(fitness) == 0:
            return
        i = int(np.argmin(fitness))
        if fitness[i] < self._g_current:
            self._current = internal[i].copy()
            self._g_current = float(fitness[i])
            self._pop = self._current[None, :].copy()
            self._fit = np.array([self._g_current])
        if fitness[i] < self._gbest:
            self._gbest = float(fitness[i])
            self._xbest = internal[i].copy()

    def _state_meta(self):
        return {"t0": self._t0, "tf": self._tf, "g_current": self._g_current}

    def _state_arrays(self):
        return {"current": self._current}

    def _restore_extra(self, arrays, meta):
        self._t0 = float(meta["t0"])
        self._tf = float(meta["tf"])
        self._g_current = float(meta["g_current"])
        self._current = arrays["current"].copy()
