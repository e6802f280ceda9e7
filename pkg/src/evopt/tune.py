"""Hyperparameter search over optimizer configurations.

Four methods share one contract: they evaluate configuration dictionaries
with a user-supplied inner objective (typically "best fitness of a reduced
run, median over a few fixed seeds", see :func:`make_inner`), respect their
evaluation budget exactly, and return a :class:`TuneResult` with every
evaluated config, the best-so-far trace, and CSV export.

* grid: exhaustive Cartesian sweep with a declared level count per axis;
* random: i.i.d. uniform draws over the hyper-space;
* bayes: sequential model-based search with a Gaussian-process surrogate
  (Matern 2.5) and expected improvement over a random candidate pool;
* evolution: a small elitist evolution strategy over the hyper-space.

The hyper-space reuses the search-space machinery, so int and categorical
hyperparameters ride the same continuous embedding as everywhere else.
"""

from __future__ import annotations

import itertools
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.stats import norm

from .space import SearchSpace, parse_space

__all__ = [
    "BudgetError",
    "TuneResult",
    "grid_search",
    "random_search",
    "bayesian_search",
    "evolutionary_search",
    "make_inner",
    "TUNERS",
]


class BudgetError(RuntimeError):
    """The tuner would exceed (or has exhausted) its evaluation budget."""


@dataclass
class TuneResult:
    """All evaluated configs in evaluation order plus ranking helpers."""

    method: str
    mode: str
    names: list[str]
    configs: list[dict] = field(default_factory=list)
    objectives: list[float] = field(default_factory=list)
    fallbacks: int = 0

    @property
    def _sign(self) -> float:
        return 1.0 if self.mode == "min" else -1.0

    def ranked(self) -> list[tuple[dict, float]]:
        order = np.argsort(self._sign * np.array(self.objectives), kind="stable")
        return [(self.configs[i], self.objectives[i]) for i in order]

    @property
    def best_config(self) -> dict:
        return self.ranked()[0][0]

    @property
    def best_objective(self) -> float:
        return self.ranked()[0][1]

    def trace(self) -> np.ndarray:
        """Best-so-far objective after each evaluation."""
        obj = self._sign * np.array(self.objectives)
        return self._sign * np.minimum.accumulate(obj)

    def bucketed(self, bucket: int = 10) -> np.ndarray:
        """Best objective of every consecutive bucket of evaluations."""
        obj = self._sign * np.array(self.objectives)
        parts = [obj[i:i + bucket] for i in range(0, len(obj), bucket)]
        return self._sign * np.array([p.min() for p in parts])

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(",".join(["iteration", *self.names, "objective"]) + "\n")
            for i, (cfg, obj) in enumerate(zip(self.configs, self.objectives), 1):
                cells = [str(i)] + [repr(cfg[n]) for n in self.names] + [repr(obj)]
                fh.write(",".join(cells) + "\n")


class _Budgeted:
    """Wraps the inner objective with an audited evaluation counter."""

    def __init__(self, inner: Callable[[dict], float], budget: int):
        if budget < 1:
            raise BudgetError(f"budget must be >= 1, got {budget}")
        self.inner = inner
        self.budget = budget
        self.used = 0

    def reserve(self, n: int) -> None:
        if self.used + n > self.budget:
            raise BudgetError(f"would exceed budget {self.budget} "
                              f"(used {self.used}, requested {n})")
        self.used += n

    def __call__(self, config: dict) -> float:
        self.reserve(1)
        return float(self.inner(config))

    def run_batch(self, configs: list[dict], workers: int = 1) -> list[float]:
        self.reserve(len(configs))
        if workers > 1 and len(configs) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                return [float(v) for v in pool.map(self.inner, configs)]
        return [float(self.inner(c)) for c in configs]


def _decode_config(hspace: SearchSpace, internal: np.ndarray) -> dict:
    return dict(zip(hspace.names, hspace.decode(internal)))


def _grid_axis(var, levels: int) -> list[float]:
    if var.kind == "grid":
        return [float(i) for i in range(len(var.levels))]
    if var.kind == "int":
        pts = np.round(np.linspace(var.low, var.high, levels))
        return [float(p) for p in dict.fromkeys(pts)]
    return [float(p) for p in np.linspace(var.low, var.high, levels)]


def grid_search(hspace, inner, levels: int | dict = 3, mode: str = "min",
                budget_cap: int = 10000, workers: int = 1) -> TuneResult:
    """Exhaustive Cartesian sweep; refuses grids larger than ``budget_cap``.

    ``levels`` is the point count per int/float axis (scalar or per-name
    mapping); categorical axes always enumerate all their levels.
    """
    hspace = _coerce_hspace(hspace)
    axes = []
    for v in hspace.variables:
        n = levels.get(v.name, 3) if isinstance(levels, dict) else int(levels)
        if n < 1:
            raise ValueError(f"levels for {v.name} must be >= 1, got {n}")
        axes.append(_grid_axis(v, n))
    size = int(np.prod([len(a) for a in axes]))
    if size > budget_cap:
        raise BudgetError(f"grid has {size} cells, above the cap of {budget_cap}; "
                          "reduce levels or raise budget_cap")
    budgeted = _Budgeted(inner, size)
    result = TuneResult(method="grid", mode=mode, names=hspace.names)
    cells = [np.array(c) for c in itertools.product(*axes)]
    configs = [_decode_config(hspace, c) for c in cells]
    for obj, cfg in zip(budgeted.run_batch(configs, workers), configs):
        result.configs.append(cfg)
        result.objectives.append(obj)
    assert budgeted.used == size
    return result


def random_search(hspace, budget: int, inner, seed=None, mode: str = "min",
                  workers: int = 1) -> TuneResult:
    """``budget`` i.i.d. uniform configurations."""
    hspace = _coerce_hspace(hspace)
    rng = np.random.default_rng(seed)
    budgeted = _Budgeted(inner, budget)
    result = TuneResult(method="random", mode=mode, names=hspace.names)
    draws = hspace.sample_internal(rng, budget)
    configs = [_decode_config(hspace, row) for row in draws]
    for obj, cfg in zip(budgeted.run_batch(configs, workers), configs):
        result.configs.append(cfg)
        result.objectives.append(obj)
    assert budgeted.used == budget
    return result


def bayesian_search(hspace, budget: int, inner, seed=None, mode: str = "min",
                    n_init: int = 10, candidates: int = 256) -> TuneResult:
    """Sequential model-based search with expected improvement.

    Starts from ``n_init`` uniform draws (identical to ``random_search`` with
    the same seed when ``budget == n_init``), then fits a Gaussian process on
    the standardized observations and evaluates the candidate maximizing
    expected improvement among a fresh uniform pool each iteration.  A failed
    surrogate fit falls back to one random draw (counted and warned).
    """
    from sklearn.gaussian_process import GaussianProcessRegressor
    from sklearn.gaussian_process.kernels import ConstantKernel, Matern, WhiteKernel

    hspace = _coerce_hspace(hspace)
    rng = np.random.default_rng(seed)
    budgeted = _Budgeted(inner, budget)
    sign = 1.0 if mode == "min" else -1.0
    result = TuneResult(method="bayes", mode=mode, names=hspace.names)
    n_init = min(n_init, budget)
    lo, hi = hspace.internal_lower, hspace.internal_upper

    xs = list(hspace.sample_internal(rng, n_init))
    for row in xs:
        cfg = _decode_config(hspace, row)
        result.configs.append(cfg)
        result.objectives.append(budgeted(cfg))

    while budgeted.used < budget:
        x01 = (np.stack(xs) - lo) / (hi - lo)
        y = sign * np.array(result.objectives)
        y_std = y.std()
        next_x = None
        if y_std > 0:
            yn = (y - y.mean()) / y_std
            kernel = (ConstantKernel(1.0, (1e-3, 1e3))
                      * Matern(length_scale=np.full(hspace.dimension, 0.3),
                               length_scale_bounds=(1e-2, 1e2), nu=2.5)
                      + WhiteKernel(1e-6, (1e-10, 1e-1)))
            gp = GaussianProcessRegressor(
                kernel=kernel, normalize_y=False, n_restarts_optimizer=1,
                random_state=int(rng.integers(2 ** 31)))
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    gp.fit(x01, yn)
                pool = hspace.sample_internal(rng, candidates)
                pool01 = (pool - lo) / (hi - lo)
                mu, sd = gp.predict(pool01, return_std=True)
                best = yn.min()
                imp = best - mu
                with np.errstate(divide="ignore", invalid="ignore"):
                    z = np.where(sd > 0, imp / sd, 0.0)
                    ei = np.where(sd > 0, imp * norm.cdf(z) + sd * norm.pdf(z),
                                  np.maximum(imp, 0.0))
                next_x = pool[int(np.argmax(ei))]
            except Exception as exc:
                warnings.warn(f"surrogate fit failed ({exc!r}); "
                              "falling back to a random draw")
                result.fallbacks += 1
        else:
            result.fallbacks += 1
        if next_x is None:
            next_x = hspace.sample_internal(rng)
        xs.append(next_x)
        cfg = _decode_config(hspace, next_x)
        result.configs.append(cfg)
        result.objectives.append(budgeted(cfg))
    assert budgeted.used == budget
    return result


def evolutionary_search(hspace, budget: int, inner, seed=None, mode: str = "min",
                        population: int = 10, workers: int = 1) -> TuneResult:
    """Elitist evolution strategy over the hyper-space.

    Tournament parents, blend crossover, range-scaled Gaussian mutation;
    survivors are the best of parents plus offspring, so the best config is
    never lost.  The final offspring batch is trimmed to the remaining
    budget.
    """
    hspace = _coerce_hspace(hspace)
    rng = np.random.default_rng(seed)
    budgeted = _Budgeted(inner, budget)
    sign = 1.0 if mode == "min" else -1.0
    result = TuneResult(method="evolution", mode=mode, names=hspace.names)
    pop_n = min(population, budget)
    lo, hi = hspace.internal_lower, hspace.internal_upper
    sigma = 0.15 * (hi - lo)

    def record_batch(rows: np.ndarray) -> np.ndarray:
        configs = [_decode_config(hspace, r) for r in rows]
        objs = budgeted.run_batch(configs, workers)
        for cfg, obj in zip(configs, objs):
            result.configs.append(cfg)
            result.objectives.append(obj)
        return sign * np.array(objs)

    pop = hspace.sample_internal(rng, pop_n)
    fit = record_batch(pop)
    while budgeted.used < budget:
        n_child = min(pop_n, budget - budgeted.used)
        children = np.empty((n_child, hspace.dimension))
        for i in range(n_child):
            t1 = rng.integers(pop_n, size=3)
            t2 = rng.integers(pop_n, size=3)
            p1 = pop[t1[np.argmin(fit[t1])]]
            p2 = pop[t2[np.argmin(fit[t2])]]
            gamma = 1.5 * rng.random(hspace.dimension) - 0.25
            child = gamma * p1 + (1.0 - gamma) * p2
            mask = rng.random(hspace.dimension) < 0.3
            child = np.where(mask, child + sigma * rng.normal(size=hspace.dimension),
                             child)
            children[i] = child
        children = hspace.repair(children)
        child_fit = record_batch(children)
        merged = np.vstack([pop, children])
        merged_fit = np.concatenate([fit, child_fit])
        keep = np.argsort(merged_fit, kind="stable")[:pop_n]
        pop, fit = merged[keep], merged_fit[keep]
    assert budgeted.used == budget
    return result


def _coerce_hspace(hspace) -> SearchSpace:
    if isinstance(hspace, SearchSpace):
        return hspace
    return parse_space(hspace)


def make_inner(algorithm: str, fit, bounds, mode: str, ngen: int,
               base_params: dict | None = None,
               seeds: Sequence[int] = (101, 202, 303),
               workers: int = 1) -> Callable[[dict], float]:
    """Inner objective: median best fitness of reduced runs over fixed seeds.

    The returned callable builds the named optimizer with the fixed
    ``base_params`` overlaid by the tuned config, runs it for ``ngen``
    generations per seed, and aggregates by the median, which damps run-to-run
    noise without inflating the budget accounting (one config = one inner
    evaluation).
    """
    from .algorithms import build

    base_params = dict(base_params or {})

    def inner(config: dict) -> float:
        bests = []
        for s in seeds:
            opt = build(algorithm, mode=mode, fit=fit, bounds=bounds,
                        params={**base_params, **config}, seed=s, workers=workers)
            _, ybest, _ = opt.evolute(ngen=ngen)
            bests.append(ybest)
        return float(np.median(bests))

    return inner


TUNERS = {
    "grid": grid_search,
    "random": random_search,
    "bayes": bayesian_search,
    "evolution": evolutionary_search,
}
