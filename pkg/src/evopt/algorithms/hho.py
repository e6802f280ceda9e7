"""Harris hawks optimization, after Heidari et al. (2019).

Each generation the prey (rabbit) is the incumbent best.  Per hawk, the
escaping energy ``E = 2*E0*(1 - k/N)`` with ``E0 ~ U(-1, 1)`` selects one of
five moves:

* ``|E| >= 1``          exploration: random-hawk perch (q >= 0.5) or
  rabbit-minus-mean with a random-bounds term (q < 0.5);
* ``r >= 0.5, |E| >= 0.5``  soft besiege  ``(rb - x) - E*|J*rb - x|``;
* ``r >= 0.5, |E| < 0.5``   hard besiege  ``rb - E*|rb - x|``;
* ``r < 0.5``           soft/hard besiege with progressive rapid dives: a
  trial ``Y`` (as soft/hard, the hard form using the population mean), and on
  failure a Levy-flight trial ``Z = Y + S * LF(d)``; each trial is accepted
  only if its fitness beats the hawk's current fitness.

This is the synchronous variant: all proposals derive from the
generation-start population and rabbit, and the dive trials are evaluated in
per-phase sub-batches (Y first, then Z for the hawks whose Y lost, then the
non-dive positions).  Draw order per hawk: E0; then q (exploration: random
hawk index, r1, r2 for the perch branch, else r3, r4) or r (besiege: J for
soft forms; dives add S as a d-vector then the Levy u, v normal d-vectors).
The Levy exponent is fixed at 1.5 with the customary 0.01 step scale.
"""

from __future__ import annotations

import numpy as np
from scipy.special import gamma as _gamma

from .base import PopulationOptimizer

__all__ = ["HHO", "levy_step", "prey_energy"]

LEVY_BETA = 1.5
_LEVY_SIGMA = (_gamma(1 + LEVY_BETA) * np.sin(np.pi * LEVY_BETA / 2)
               / (_gamma((1 + LEVY_BETA) / 2) * LEVY_BETA
                  * 2 ** ((LEVY_BETA - 1) / 2))) ** (1 / LEVY_BETA)

PHASES = ("exploration", "soft", "hard", "soft_dive", "hard_dive")


def prey_energy(e0: float, k: int, ngen_total: int) -> float:
    """Escaping energy E = 2*E0*(1 - k/N); zero at the final generation."""
    if ngen_total <= 0:
        raise ValueError("ngen_total must be positive")
    return 2.0 * e0 * (1.0 - k / ngen_total)


def levy_step(rng: np.random.Generator, d: int) -> np.ndarray:
    """Mantegna Levy flight step with exponent 1.5 and 0.01 scale."""
    u = rng.normal(0.0, _LEVY_SIGMA, d)
    v = rng.normal(0.0, 1.0, d)
    return 0.01 * u / np.abs(v) ** (1 / LEVY_BETA)


class HHO(PopulationOptimizer):

    name = "hho"
    version = "1.0"
    pop_alias = "nhawks"
    default_population = 20
    min_population = 2
    HYPERPARAMS = {}

    def __init__(self, mode, fit, bounds, nhawks: int = 20,
                 seed=None, workers: int = 1):
        super().__init__(mode, fit, bounds, population_size=nhawks,
                         seed=seed, workers=workers, hyper={})
        self.phase_counts = {p: 0 for p in PHASES}

    def _init_state(self):
        self.phase_counts = {p: 0 for p in PHASES}

    def _step(self, k: int):
        n, d = self._pop.shape
        rng = self.rng
        rabbit = self._xbest.copy()
        mean_pos = self._pop.mean(axis=0)
        lb, ub = self.space.internal_lower, self.space.internal_upper

        direct: list[tuple[int, np.ndarray]] = []
        dives: list[tuple[int, np.ndarray, np.ndarray]] = []
        for i in range(n):
            e0 = 2.0 * rng.random() - 1.0
            e = prey_energy(e0, k, self._ngen_total)
            x = self._pop[i]
            if abs(e) >= 1.0:
                self.phase_counts["exploration"] += 1
                q = rng.random()
                if q >= 0.5:
                    m = int(rng.integers(n))
                    r1 = rng.random()
                    r2 = rng.random()
                    pos = self._pop[m] - r1 * np.abs(self._pop[m] - 2.0 * r2 * x)
                else:
                    r3 = rng.random()
                    r4 = rng.random()
                    pos = (rabbit - mean_pos) - r3 * (lb + r4 * (ub - lb))
                direct.append((i, pos))
            else:
                r = rng.random()
                if r >= 0.5 and abs(e) >= 0.5:
                    self.phase_counts["soft"] += 1
                    j = 2.0 * (1.0 - rng.random())
                    pos = (rabbit - x) - e * np.abs(j * rabbit - x)
                    direct.append((i, pos))
                elif r >= 0.5:
                    self.phase_counts["hard"] += 1
                    pos = rabbit - e * np.abs(rabbit - x)
                    direct.append((i, pos))
                else:
                    j = 2.0 * (1.0 - rng.random())
                    if abs(e) >= 0.5:
                        self.phase_counts["soft_dive"] += 1
                        y = rabbit - e * np.abs(j * rabbit - x)
                    else:
                        self.phase_counts["hard_dive"] += 1
                        y = rabbit - e * np.abs(j * rabbit - mean_pos)
                    s = rng.random(d)
                    z = y + s * levy_step(rng, d)
                    dives.append((i, y, z))

        new_pop = self._pop.copy()
        new_fit = self._fit.copy()

        if dives:
            ys = self.space.repair(np.stack([y for _, y, _ in dives]))
            gy = self._evaluate(ys)
            losers = []
            for t, (i, _, z) in enumerate(dives):
                if gy[t] < self._fit[i]:
                    new_pop[i] = ys[t]
                    new_fit[i] = gy[t]
                else:
                    losers.append((i, z))
            if losers:
                zs = self.space.repair(np.stack([z for _, z in losers]))
                gz = self._evaluate(zs)
                for t, (i, _) in enumerate(losers):
                    if gz[t] < self._fit[i]:
                        new_pop[i] = zs[t]
                        new_fit[i] = gz[t]

        if direct:
            idx = [i for i, _ in direct]
            xs = self.space.repair(np.stack([p for _, p in direct]))
            gx = self._evaluate(xs)
            new_pop[idx] = xs
            new_fit[idx] = gx

        self._pop, self._fit = new_pop, new_fit

    def _state_meta(self):
        return {"phase_counts": self.phase_counts}

    def _restore_extra(self, arrays, meta):
        self.phase_counts = dict(meta.get("phase_counts", {p: 0 for p in PHASES}))
