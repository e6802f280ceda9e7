"""Replay-hybrid optimizers: three sub-algorithms over a shared fitness-ranked
memory.

Every candidate any sub-algorithm evaluates is pushed into one replay memory.
Between generations each sub-population is re-seeded from two channels:
greedy replay (the deterministic top of the memory, exploitation) and
prioritized replay (rank-weighted sampling, exploration), with the remainder
kept from the sub-algorithm's own proposals.  The classic variant couples
ES + PSO + SA; the modern variant couples GWO + DE + WOA.

Generations run in lockstep: the sub-algorithms execute their evaluation
phases concurrently on a shared worker pool, and memory mutations happen at a
single synchronization point per generation in fixed sub order, so runs are
deterministic for any worker count.  Each sub-algorithm owns an independent
random stream derived from the hybrid's seed (seed, seed+1, seed+2), so with
both replay fractions at zero the three runs are exactly the standalone runs
with those seeds.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .algorithms import ES, PSO, SA, GWO, DE, WOA
from .algorithms.base import HyperParam, _coerce_fitness, _coerce_space
from .engine import (CheckpointError, Evaluator, GenRecord, RunLog, config_hash,
                     load_checkpoint, save_checkpoint)

__all__ = ["ReplayMemory", "PESA", "PESA2"]


def _decoded_key(decoded: list) -> tuple:
    return tuple(decoded)


@dataclass
class _Entry:
    internal: np.ndarray
    key: tuple
    fitness: float        # minimization sense
    insert_index: int


class ReplayMemory:
    """Fitness-ranked candidate store with prioritized and greedy sampling.

    Duplicate decoded candidates collapse to one entry (the latest insertion
    wins).  Over capacity, the worst-fitness entry is evicted, so the best
    entry is never lost.  Priorities are rank based, ``p_i = rank_i**-alpha``
    with rank 1 the best, which makes sampling invariant to the fitness
    scale.
    """

    def __init__(self, capacity: int, alpha: float = 1.0):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        if alpha < 0:
            raise ValueError(f"priority exponent must be >= 0, got {alpha}")
        self.capacity = int(capacity)
        self.alpha = float(alpha)
        self._by_key: dict[tuple, _Entry] = {}
        self.n_added = 0
        self.n_evicted = 0
        self.n_refreshed = 0

    def __len__(self) -> int:
        return len(self._by_key)

    def add(self, internal: np.ndarray, decoded: list, fitness: float) -> None:
        """Insert an evaluated candidate (fitness in minimization sense)."""
        key = _decoded_key(decoded)
        self.n_added += 1
        entry = self._by_key.get(key)
        if entry is not None:
            entry.fitness = float(fitness)
            entry.insert_index = self.n_added
            self.n_refreshed += 1
            return
        self._by_key[key] = _Entry(np.array(internal, dtype=float, copy=True), key,
                                   float(fitness), self.n_added)
        if len(self._by_key) > self.capacity:
            worst = max(self._by_key.values(),
                        key=lambda e: (e.fitness, -e.insert_index))
            del self._by_key[worst.key]
            self.n_evicted += 1

    def _sorted_entries(self) -> list[_Entry]:
        return sorted(self._by_key.values(),
                      key=lambda e: (e.fitness, e.insert_index))

    @property
    def best(self) -> tuple[np.ndarray, float]:
        if not self._by_key:
            raise ValueError("memory is empty")
        e = self._sorted_entries()[0]
        return e.internal.copy(), e.fitness

    def sample_greedy(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Deterministic top-n by fitness; all entries if n exceeds the size."""
        if not self._by_key:
            raise ValueError("memory is empty")
        top = self._sorted_entries()[:n]
        return (np.stack([e.internal for e in top]),
                np.array([e.fitness for e in top]))

    def priorities(self) -> np.ndarray:
        """Normalized rank-based sampling probabilities (rank 1 = best)."""
        m = len(self._by_key)
        ranks = np.arange(1, m + 1, dtype=float)
        p = ranks ** -self.alpha
        return p / p.sum()

    def sample_prioritized(self, n: int,
                           rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """n draws without replacement with probability proportional to
        rank**-alpha; returns all entries if n exceeds the size."""
        if not self._by_key:
            raise ValueError("memory is empty")
        entries = self._sorted_entries()
        m = len(entries)
        take = min(n, m)
        idx = rng.choice(m, size=take, replace=False, p=self.priorities())
        return (np.stack([entries[i].internal for i in idx]),
                np.array([entries[i].fitness for i in idx]))

    def state_arrays(self) -> dict[str, np.ndarray]:
        entries = self._sorted_entries()
        if entries:
            internal = np.stack([e.internal for e in entries])
            fit = np.array([e.fitness for e in entries])
            idx = np.array([e.insert_index for e in entries], dtype=np.int64)
        else:
            internal = np.zeros((0, 0))
            fit = np.zeros(0)
            idx = np.zeros(0, dtype=np.int64)
        return {"mem_internal": internal, "mem_fitness": fit, "mem_insert": idx,
                "mem_counters": np.array([self.n_added, self.n_evicted,
                                          self.n_refreshed], dtype=np.int64)}

    def restore(self, arrays: dict, space) -> None:
        self._by_key.clear()
        for row, fit, idx in zip(arrays["mem_internal"], arrays["mem_fitness"],
                                 arrays["mem_insert"]):
            key = _decoded_key(space.decode(row))
            self._by_key[key] = _Entry(np.array(row, dtype=float), key,
                                       float(fit), int(idx))
        counters = arrays["mem_counters"]
        self.n_added, self.n_evicted, self.n_refreshed = (int(c) for c in counters)


class PESA:
    """Classic replay hybrid: ES + PSO + SA sharing one replay memory.

    Constructor mirrors the standalone optimizers; ``population_size`` is the
    total across the three sub-algorithms (split as evenly as possible) unless
    ``subpops`` gives explicit sizes.
    """

    name = "pesa"
    version = "1.0"
    pop_alias = "population_size"
    default_population = 30
    min_population = 6
    SUB_ALGORITHMS = (ES, PSO, SA)
    HYPERPARAMS = {
        "replay_greedy_frac": HyperParam("float", 0.2, 0.0, 1.0,
                                         doc="sub-population fraction re-seeded "
                                             "from greedy replay"),
        "replay_prio_frac": HyperParam("float", 0.2, 0.0, 1.0,
                                       doc="sub-population fraction re-seeded "
                                           "from prioritized replay"),
        "alpha_prio": HyperParam("float", 1.0, 0.0, 5.0,
                                 doc="rank-priority exponent"),
        "memory_factor": HyperParam("int", 50, 1, 1000,
                                    doc="memory capacity as a multiple of the "
                                        "total population"),
    }
    EXTRA_PARAMS = ("subpops",)

    def __init__(self, mode, fit, bounds, population_size: int = 30,
                 subpops=None, replay_greedy_frac: float = 0.2,
                 replay_prio_frac: float = 0.2, alpha_prio: float = 1.0,
                 memory_factor: int = 50, seed=None, workers: int = 1):
        if mode not in ("min", "max"):
            raise ValueError(f"mode must be 'min' or 'max', got {mode!r}")
        if replay_greedy_frac + replay_prio_frac > 1.0 + 1e-12:
            raise ValueError("replay fractions must sum to at most 1")
        self.mode = mode
        self.space = _coerce_space(bounds)
        self.fitspec = _coerce_fitness(fit, mode)
        self._sign = 1.0 if mode == "min" else -1.0
        if subpops is not None:
            subpops = tuple(int(x) for x in subpops)
            if len(subpops) != 3 or any(s < 1 for s in subpops):
                raise ValueError("subpops must be three positive sizes")
        else:
            n = int(population_size)
            if n < self.min_population:
                raise ValueError(f"{self.name}: population_size must be >= "
                                 f"{self.min_population}, got {n}")
            base, rem = divmod(n, 3)
            subpops = tuple(base + (1 if i < rem else 0) for i in range(3))
        self.subpops = subpops
        self.population_size = sum(subpops)
        self.replay_greedy_frac = float(replay_greedy_frac)
        self.replay_prio_frac = float(replay_prio_frac)
        self.alpha_prio = float(alpha_prio)
        self.memory_factor = int(memory_factor)
        self.seed = seed
        self.workers = int(workers)
        self.log = RunLog(mode=mode)
        self._generation = 0
        self._ngen_total = 0
        self._xbest = None
        self._gbest = np.inf

    # ------------------------------------------------------------------ config

    def config(self) -> dict:
        return {
            "algorithm": self.name,
            "mode": self.mode,
            "space": self.space.to_dict(),
            "population_size": self.population_size,
            "subpops": list(self.subpops),
            "seed": self.seed,
            "hyperparams": {
                "replay_greedy_frac": self.replay_greedy_frac,
                "replay_prio_frac": self.replay_prio_frac,
                "alpha_prio": self.alpha_prio,
                "memory_factor": self.memory_factor,
            },
        }

    def config_digest(self) -> str:
        return config_hash(self.config())

    def _sub_seed(self, i: int):
        return None if self.seed is None else int(self.seed) + i

    def _make_subs(self):
        subs = []
        for i, (cls, n) in enumerate(zip(self.SUB_ALGORITHMS, self.subpops)):
            subs.append(cls(mode=self.mode, fit=self.fitspec, bounds=self.space,
                            **{cls.pop_alias: n}, seed=self._sub_seed(i), workers=1))
        return subs

    # -------------------------------------------------------------------- run

    def evolute(self, ngen: int, x0=None, verbose: bool = False,
                total_generations: int | None = None, checkpoint_out=None,
                checkpoint_every: int | None = None, resume_from=None):
        """Run the hybrid; returns ``(x_best, y_best, log)`` like any optimizer."""
        if ngen < 0:
            raise ValueError(f"ngen must be >= 0, got {ngen}")
        pool = ThreadPoolExecutor(max_workers=self.workers) if self.workers > 1 else None
        # The three sub-algorithm steps run concurrently so a serial chain
        # (SA) overlaps the batch evaluations of its siblings.
        step_pool = ThreadPoolExecutor(max_workers=3) if self.workers > 1 else None
        self._subs = self._make_subs()
        evaluators = [Evaluator(self.space, sub.fitspec, workers=self.workers,
                                record=True, pool=pool) for sub in self._subs]
        try:
            if resume_from is not None:
                if x0 is not None:
                    raise ValueError("x0 cannot be combined with resume_from")
                self._restore(resume_from, evaluators)
                start = self._generation
                total = max(self._ngen_total, start + ngen)
                self._ngen_total = total
            else:
                self._rng = np.random.default_rng(
                    None if self.seed is None else int(self.seed) + 1000003)
                self.log = RunLog(mode=self.mode)
                self.memory = ReplayMemory(
                    capacity=self.memory_factor * self.population_size,
                    alpha=self.alpha_prio)
                self._gbest = np.inf
                self._xbest = None
                start = 0
                total = int(total_generations) if total_generations is not None else ngen
                if total < ngen:
                    raise ValueError(f"total_generations={total} < ngen={ngen}")
                self._ngen_total = max(total, 1)
                self._generation = 0
                x0_parts = self._split_x0(x0)
                for sub, ev, part in zip(self._subs, evaluators, x0_parts):
                    sub.rng = np.random.default_rng(sub.seed)
                    sub.log = RunLog(mode=self.mode)
                    sub._evaluator = ev
                    sub._ngen_total = self._ngen_total
                    sub._gen_values = []
                    sub._initialize(part)
                self._sync_memory(evaluators)

            for k in range(start + 1, start + ngen + 1):
                t0 = time.perf_counter()
                for sub in self._subs:
                    sub._gen_values = []
                if step_pool is not None:
                    futures = [step_pool.submit(sub._step, k) for sub in self._subs]
                    for f in futures:
                        f.result()
                else:
                    for sub in self._subs:
                        sub._step(k)
                self._generation = k
                for sub in self._subs:
                    sub._generation = k
                self._sync_memory(evaluators)
                self._reseed()
                vals = np.concatenate([np.array(sub._gen_values) for sub in self._subs])
                nevals = sum(ev.eval_count for ev in evaluators)
                self.log.append(GenRecord(
                    generation=k, nevals=nevals,
                    best=self._sign * self._gbest,
                    gen_best=float(vals.min() if self.mode == "min" else vals.max()),
                    gen_mean=float(vals.mean()),
                    elapsed_s=time.perf_counter() - t0))
                if verbose:
                    print(f"[{self.name}] gen {k}/{self._ngen_total}  nevals={nevals}  "
                          f"best={self._sign * self._gbest:.6g}", flush=True)
                if checkpoint_out is not None and checkpoint_every \
                        and k % checkpoint_every == 0:
                    self.save_checkpoint(checkpoint_out, evaluators)
            if checkpoint_out is not None:
                self.save_checkpoint(checkpoint_out, evaluators)
        finally:
            for ev in evaluators:
                ev.close()
            if step_pool is not None:
                step_pool.shutdown(wait=True)
            if pool is not None:
                pool.shutdown(wait=True)
        return self.space.decode(self._xbest), self._sign * self._gbest, self.log

    def _split_x0(self, x0):
        if x0 is None:
            return [None, None, None]
        rows = list(x0)
        if len(rows) != self.population_size:
            raise ValueError(f"x0 must have {self.population_size} members, "
                             f"got {len(rows)}")
        parts, at = [], 0
        for n in self.subpops:
            parts.append(rows[at:at + n])
            at += n
        return parts

    def _sync_memory(self, evaluators) -> None:
        """Single per-generation synchronization point for memory mutations."""
        for sub, ev in zip(self._subs, evaluators):
            for eval_index, internal, raw in ev.drain_records():
                g = self._sign * raw
                self.memory.add(internal, self.space.decode(internal), g)
                if g < self._gbest:
                    self._gbest = float(g)
                    self._xbest = np.array(internal, dtype=float, copy=True)

    def _reseed(self) -> None:
        """Re-seed each sub-population from greedy and prioritized replay."""
        for sub, n in zip(self._subs, self.subpops):
            n_greedy = int(round(self.replay_greedy_frac * n))
            n_prio = int(round(self.replay_prio_frac * n))
            if n_greedy + n_prio > n:
                n_prio = n - n_greedy
            batches = []
            if n_greedy > 0:
                batches.append(self.memory.sample_greedy(n_greedy))
            if n_prio > 0:
                batches.append(self.memory.sample_prioritized(n_prio, self._rng))
            if not batches:
                continue
            xs = np.vstack([b[0] for b in batches])
            gs = np.concatenate([b[1] for b in batches])
            sub.inject(xs, gs)

    # ------------------------------------------------------------- checkpoints

    def save_checkpoint(self, path, evaluators=None) -> None:
        nevals = (sum(ev.eval_count for ev in evaluators) if evaluators
                  else self.log.nevals)
        header = {
            "kind": "optimizer-checkpoint",
            "format_version": 1,
            "algorithm": self.name,
            "algorithm_version": self.version,
            "mode": self.mode,
            "generation": self._generation,
            "ngen_total": self._ngen_total,
            "nevals": nevals,
            "sub_nevals": [ev.eval_count for ev in evaluators] if evaluators else [],
            "config_hash": self.config_digest(),
            "rng_state": self._rng.bit_generator.state,
            "sub_rng_states": [sub.rng.bit_generator.state for sub in self._subs],
            "sub_meta": [sub._state_meta() for sub in self._subs],
            "meta": {},
        }
        arrays = {"xbest": self._xbest, "gbest": np.array([self._gbest])}
        for i, sub in enumerate(self._subs):
            arrays[f"sub{i}_population"] = sub._pop
            arrays[f"sub{i}_fitness"] = sub._fit
            arrays[f"sub{i}_xbest"] = sub._xbest
            arrays[f"sub{i}_gbest"] = np.array([sub._gbest])
            for aname, arr in sub._state_arrays().items():
                arrays[f"sub{i}_{aname}"] = arr
        arrays.update(self.memory.state_arrays())
        arrays.update(self.log.to_arrays())
        save_checkpoint(path, header, arrays)

    def _restore(self, path, evaluators) -> None:
        header, arrays = load_checkpoint(path)
        if header.get("algorithm") != self.name:
            raise CheckpointError(f"checkpoint was written by "
                                  f"{header.get('algorithm')!r}, not {self.name!r}")
        if header.get("config_hash") != self.config_digest():
            raise CheckpointError("checkpoint configuration hash does not match "
                                  "this optimizer; refusing to resume")
        self._rng = np.random.default_rng()
        self._rng.bit_generator.state = header["rng_state"]
        self._generation = int(header["generation"])
        self._ngen_total = int(header["ngen_total"])
        self._gbest = float(arrays["gbest"][0])
        self._xbest = arrays["xbest"].copy()
        self.log = RunLog.from_arrays(self.mode, arrays)
        self.memory = ReplayMemory(capacity=self.memory_factor * self.population_size,
                                   alpha=self.alpha_prio)
        self.memory.restore(arrays, self.space)
        for i, (sub, ev) in enumerate(zip(self._subs, evaluators)):
            sub.rng = np.random.default_rng()
            sub.rng.bit_generator.state = header["sub_rng_states"][i]
            sub._evaluator = ev
            sub._ngen_total = self._ngen_total
            sub._generation = self._generation
            sub._gen_values = []
            sub.log = RunLog(mode=self.mode)
            sub._pop = arrays[f"sub{i}_population"].copy()
            sub._fit = arrays[f"sub{i}_fitness"].copy()
            sub._xbest = arrays[f"sub{i}_xbest"].copy()
            sub._gbest = float(arrays[f"sub{i}_gbest"][0])
            sub_arrays = {aname[len(f"sub{i}_"):]: arr for aname, arr in arrays.items()
                          if aname.startswith(f"sub{i}_")}
            sub._restore_extra(sub_arrays, header["sub_meta"][i])
            ev.eval_count = int(header["sub_nevals"][i])


class PESA2(PESA):
    """Modern replay hybrid: GWO + DE + WOA over the shared memory."""

    name = "pesa2"
    SUB_ALGORITHMS = (GWO, DE, WOA)
