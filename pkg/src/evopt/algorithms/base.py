"""Shared optimizer skeleton for the population metaheuristics.

Every algorithm follows the same generation-synchronous loop: decode and
evaluate the population (in parallel), update the incumbent, apply the
algorithm's position update, repair out-of-bounds coordinates, repeat.
Maximization is implemented canonically by minimizing the negated fitness and
un-negating every reported value, so ``mode="max"`` on ``f`` walks exactly the
same iterates as ``mode="min"`` on ``-f`` under the same seed.

All random draws happen on the coordinator from one seeded generator in a
fixed iteration order; evaluation workers never draw, which makes a run
bitwise reproducible for any worker count.  Schedules that depend on run
length (cooling, shrinking coefficients) use the declared total horizon, so a
run split across checkpoints reproduces the uninterrupted run exactly.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

from ..engine import (CheckpointError, Evaluator, GenRecord, RunLog, config_hash,
                      load_checkpoint, save_checkpoint)
from ..problems import FitnessSpec
from ..space import SearchSpace, SpaceError, parse_space

__all__ = ["HyperParam", "PopulationOptimizer"]


@dataclass(frozen=True)
class HyperParam:
    """Declared hyperparameter: used for config validation and tuner spaces."""

    kind: str                      # "float" | "int" | "grid"
    default: Any
    low: float | None = None
    high: float | None = None
    levels: tuple | None = None
    doc: str = ""

    def validate(self, name: str, value) -> None:
        if self.kind == "grid":
            if value not in self.levels:
                raise ValueError(f"{name}={value!r} not in {self.levels}")
            return
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ValueError(f"{name} must be numeric, got {value!r}")
        if self.kind == "int" and float(value) != int(value):
            raise ValueError(f"{name} must be an integer, got {value!r}")
        if self.low is not None and value < self.low:
            raise ValueError(f"{name}={value} below minimum {self.low}")
        if self.high is not None and value > self.high:
            raise ValueError(f"{name}={value} above maximum {self.high}")


def _coerce_space(bounds) -> SearchSpace:
    if isinstance(bounds, SearchSpace):
        return bounds
    if isinstance(bounds, dict):
        return parse_space(bounds)
    raise SpaceError(f"bounds must be a SearchSpace or a space mapping, "
                     f"got {type(bounds).__name__}")


def _coerce_fitness(fit, mode: str) -> FitnessSpec:
    if isinstance(fit, FitnessSpec):
        if fit.mode != mode:
            return FitnessSpec(name=fit.name, evaluator=fit.evaluator, mode=mode,
                               on_error=fit.on_error, sentinel=fit.sentinel)
        return fit
    if callable(fit):
        return FitnessSpec(name=getattr(fit, "__name__", "fitness"),
                           evaluator=fit, mode=mode)
    raise TypeError(f"fit must be callable or a FitnessSpec, got {type(fit).__name__}")


class PopulationOptimizer:
    """Base class: owns the population, RNG, incumbent, log, and checkpoints.

    Subclasses implement ``_init_state`` (after the initial population has
    been evaluated) and ``_step(k)`` (one generation; ``self._ngen_total`` is
    the schedule horizon).  Internally fitness is always minimized; the
    ``self._fit`` array and ``self._gbest`` hold sign-adjusted values.
    """

    name = "base"
    version = "1"
    pop_alias = "population_size"
    default_population = 20
    min_population = 2
    HYPERPARAMS: dict[str, HyperParam] = {}

    def __init__(self, mode: str, fit, bounds, population_size: int,
                 seed: int | None = None, workers: int = 1,
                 hyper: dict | None = None):
        if mode not in ("min", "max"):
            raise ValueError(f"mode must be 'min' or 'max', got {mode!r}")
        if population_size < self.min_population:
            raise ValueError(f"{self.name}: {self.pop_alias} must be >= "
                             f"{self.min_population}, got {population_size}")
        if workers < 1:
            raise ValueError(f"workers must be >= 1, got {workers}")
        self.mode = mode
        self.space = _coerce_space(bounds)
        self.fitspec = _coerce_fitness(fit, mode)
        self.population_size = int(population_size)
        self.seed = seed
        self.workers = int(workers)
        self._sign = 1.0 if mode == "min" else -1.0
        self.hyper = dict(hyper or {})
        for pname, value in self.hyper.items():
            if pname in self.HYPERPARAMS:
                self.HYPERPARAMS[pname].validate(pname, value)

        self.rng: np.random.Generator | None = None
        self._pop: np.ndarray | None = None
        self._fit: np.ndarray | None = None
        self._xbest: np.ndarray | None = None
        self._gbest: float = np.inf
        self._generation = 0
        self._ngen_total = 0
        self._evaluator: Evaluator | None = None
        self._gen_values: list[float] = []
        self.log = RunLog(mode=mode)

    # ------------------------------------------------------------------ config

    def config(self) -> dict:
        """JSON-compatible run configuration (hashed into checkpoints)."""
        return {
            "algorithm": self.name,
            "mode": self.mode,
            "space": self.space.to_dict(),
            "population_size": self.population_size,
            "seed": self.seed,
            "hyperparams": self.hyper,
        }

    def config_digest(self) -> str:
        return config_hash(self.config())

    # ------------------------------------------------------------------ loop

    def evolute(self, ngen: int, x0=None, verbose: bool = False,
                total_generations: int | None = None,
                checkpoint_out=None, checkpoint_every: int | None = None,
                resume_from=None):
        """Run the optimizer for ``ngen`` generations.

        ``total_generations`` declares the schedule horizon when this call
        runs only a prefix of a longer run (defaults to ``ngen``); resuming
        from a checkpoint continues the stored horizon.  Returns
        ``(x_best, y_best, log)`` with ``x_best`` decoded.
        """
        if ngen < 0:
            raise ValueError(f"ngen must be >= 0, got {ngen}")
        evaluator = Evaluator(self.space, self.fitspec, workers=self.workers)
        self._evaluator = evaluator
        try:
            if resume_from is not None:
                if x0 is not None:
                    raise ValueError("x0 cannot be combined with resume_from")
                self._restore(resume_from)
                start = self._generation
                total = self._ngen_total
                if total_generations is not None:
                    total = int(total_generations)
                total = max(total, start + ngen)
                self._ngen_total = total
                evaluator.eval_count = self._nevals_restored
            else:
                self.rng = np.random.default_rng(self.seed)
                self.log = RunLog(mode=self.mode)
                start = 0
                total = int(total_generations) if total_generations is not None else ngen
                if total < ngen:
                    raise ValueError(f"total_generations={total} < ngen={ngen}")
                self._ngen_total = max(total, 1)
                self._generation = 0
                self._gen_values = []
                self._initialize(x0)

            for k in range(start + 1, start + ngen + 1):
                t0 = time.perf_counter()
                self._gen_values = []
                self._step(k)
                self._generation = k
                vals = np.array(self._gen_values)
                self.log.append(GenRecord(
                    generation=k,
                    nevals=evaluator.eval_count,
                    best=self._sign * self._gbest,
                    gen_best=float(vals.min() if self.mode == "min" else vals.max()),
                    gen_mean=float(vals.mean()),
                    elapsed_s=time.perf_counter() - t0,
                ))
                if verbose:
                    print(f"[{self.name}] gen {k}/{self._ngen_total}  "
                          f"nevals={evaluator.eval_count}  "
                          f"best={self._sign * self._gbest:.6g}", flush=True)
                if (checkpoint_out is not None and checkpoint_every
                        and k % checkpoint_every == 0):
                    self.save_checkpoint(checkpoint_out)
            if checkpoint_out is not None:
                self.save_checkpoint(checkpoint_out)
        finally:
            evaluator.close()
            self._evaluator = None
        return self.space.decode(self._xbest), self._sign * self._gbest, self.log

    def _initialize(self, x0) -> None:
        n = self.population_size
        if x0 is not None:
            rows = list(x0)
            if len(rows) != n:
                raise ValueError(f"x0 must have {n} members, got {len(rows)}")
            self._pop = np.stack([self.space.encode(row) for row in rows])
        else:
            self._pop = self.space.sample_internal(self.rng, n)
        self._pop = self.space.repair(self._pop)
        self._fit = self._evaluate(self._pop)
        self._init_state()

    def _evaluate(self, batch: np.ndarray) -> np.ndarray:
        """Batch-evaluate internal vectors; returns minimization-sense fitness."""
        raw = self._evaluator(batch)
        g = self._sign * raw
        i = int(np.argmin(g))
        if g[i] < self._gbest:
            self._gbest = float(g[i])
            self._xbest = np.atleast_2d(batch)[i].copy()
        self._gen_values.extend(raw.tolist())
        return g

    # ------------------------------------------------------- subclass contract

    def _init_state(self) -> None:
        """Set up algorithm state; ``self._pop``/``self._fit`` are evaluated."""

    def _step(self, k: int) -> None:
        raise NotImplementedError

    # ------------------------------------------------------------ replay hooks

    def inject(self, internal: np.ndarray, fitness: np.ndarray) -> None:
        """Replace the worst members with already-evaluated candidates.

        Used by the replay hybrids to re-seed sub-populations between
        generations; ``fitness`` is minimization-sense.  Subclasses refresh
        any auxiliary per-member state via ``_after_inject``.
        """
        internal = np.atleast_2d(internal)
        fitness = np.asarray(fitness, dtype=float)
        m = min(len(fitness), self.population_size)
        if m == 0:
            return
        worst = np.argsort(self._fit, kind="stable")[::-1][:m]
        self._pop[worst] = internal[:m]
        self._fit[worst] = fitness[:m]
        i = int(np.argmin(fitness[:m]))
        if fitness[i] < self._gbest:
            self._gbest = float(fitness[i])
            self._xbest = internal[i].copy()
        self._after_inject(worst)

    def _after_inject(self, indices: np.ndarray) -> None:
        pass

    # ------------------------------------------------------------- checkpoints

    def _state_arrays(self) -> dict[str, np.ndarray]:
        return {}

    def _state_meta(self) -> dict:
        return {}

    def _restore_extra(self, arrays: dict, meta: dict) -> None:
        pass

    def save_checkpoint(self, path) -> None:
        """Write the full resumable state at the current generation boundary."""
        header = {
            "kind": "optimizer-checkpoint",
            "format_version": 1,
            "algorithm": self.name,
            "algorithm_version": self.version,
            "mode": self.mode,
            "generation": self._generation,
            "ngen_total": self._ngen_total,
            "nevals": self._evaluator.eval_count if self._evaluator else self.log.nevals,
            "config_hash": self.config_digest(),
            "rng_state": self.rng.bit_generator.state,
            "meta": self._state_meta(),
        }
        arrays = {
            "population": self._pop,
            "fitness": self._fit,
            "xbest": self._xbest,
            "gbest": np.array([self._gbest]),
        }
        arrays.update(self._state_arrays())
        arrays.update(self.log.to_arrays())
        save_checkpoint(path, header, arrays)

    def _restore(self, path) -> None:
        header, arrays = load_checkpoint(path)
        if header.get("algorithm") != self.name:
            raise CheckpointError(
                f"checkpoint was written by algorithm {header.get('algorithm')!r}, "
                f"not {self.name!r}")
        if header.get("algorithm_version") != self.version:
            raise CheckpointError(
                f"checkpoint algorithm version {header.get('algorithm_version')!r} "
                f"does not match {self.version!r}")
        if header.get("config_hash") != self.config_digest():
            raise CheckpointError(
                "checkpoint configuration hash does not match this optimizer; "
                "refusing to resume with an altered config")
        self.rng = np.random.default_rng()
        self.rng.bit_generator.state = header["rng_state"]
        self._pop = arrays["population"].copy()
        self._fit = arrays["fitness"].copy()
        self._xbest = arrays["xbest"].copy()
        self._gbest = float(arrays["gbest"][0])
        self._generation = int(header["generation"])
        self._ngen_total = int(header["ngen_total"])
        self._nevals_restored = int(header["nevals"])
        self.log = RunLog.from_arrays(self.mode, arrays)
        self._restore_extra(arrays, header.get("meta", {}))
