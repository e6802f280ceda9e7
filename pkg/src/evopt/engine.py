"""Shared run machinery: parallel fitness evaluation, run logging, checkpoints.

The evaluation model is fork-join per generation: a coordinator proposes a
batch of candidates, the pool evaluates them concurrently, and results are
joined in submission order before any state update.  Workers never draw
random numbers; all stochastic decisions happen on the coordinator from one
seeded stream, so a run is bitwise reproducible for any worker count.

Workers are threads.  Fitness functions that sleep, wait on subprocesses, or
release the GIL (external codes, I/O, numpy-heavy work) parallelize well; a
pure-Python CPU-bound fitness will not, and should be wrapped as an external
command instead.  The engine has no evaluation timeout of its own; timeouts
belong to the fitness wrapper (see the external-command evaluator).
"""

from __future__ import annotations

import hashlib
import io
import json
import struct
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .problems import DomainError, FitnessSpec
from .space import SearchSpace

__all__ = [
    "EvaluationError",
    "CheckpointError",
    "Evaluator",
    "GenRecord",
    "RunLog",
    "evaluate_population",
    "config_hash",
    "save_checkpoint",
    "load_checkpoint",
]

RUNLOG_SCHEMA = "runlog-v1"
RUNLOG_COLUMNS = ("generation", "nevals", "best", "gen_best", "gen_mean", "elapsed_s")


class EvaluationError(RuntimeError):
    """A fitness evaluation failed or returned a non-finite value."""

    def __init__(self, message: str, decoded=None, eval_index=None):
        super().__init__(message)
        self.decoded = decoded
        self.eval_index = eval_index


class CheckpointError(RuntimeError):
    """A checkpoint file failed validation (corruption or config mismatch)."""


class Evaluator:
    """Order-preserving batch evaluator over a thread pool.

    Decodes each internal vector, asserts the decoded values satisfy the
    space (every evaluated candidate is in-domain), applies the fitness, and
    enforces the fitness spec's error policy.  Results come back in
    submission order regardless of completion order, and the fitness values
    are independent of ``workers``.
    """

    def __init__(self, space: SearchSpace, fitness: FitnessSpec, workers: int = 1,
                 record: bool = False, pool: ThreadPoolExecutor | None = None):
        if workers < 1:
            raise ValueError(f"workers must be >= 1, got {workers}")
        self.space = space
        self.fitness = fitness
        self.workers = workers
        self.eval_count = 0
        self._pool = pool
        self._owns_pool = pool is None and workers > 1
        if self._owns_pool:
            self._pool = ThreadPoolExecutor(max_workers=workers)
        self._records: list[tuple[int, np.ndarray, float]] = [] if record else None

    def _eval_one(self, internal: np.ndarray, eval_index: int) -> float:
        decoded = self.space.decode(internal)
        if not self.space.contains(decoded):
            raise EvaluationError(
                f"candidate decoded outside the space: {decoded!r}",
                decoded=decoded, eval_index=eval_index)
        try:
            y = float(self.fitness(decoded))
        except DomainError:
            if self.fitness.on_error == "sentinel":
                return self.fitness.sentinel
            raise
        if not np.isfinite(y):
            if self.fitness.on_error == "sentinel":
                return self.fitness.sentinel
            raise EvaluationError(
                f"fitness returned non-finite value {y!r} for candidate "
                f"#{eval_index}: {decoded!r}", decoded=decoded, eval_index=eval_index)
        return y

    def __call__(self, batch: np.ndarray) -> np.ndarray:
        """Evaluate a (n, d) batch; returns raw fitness values in input order."""
        batch = np.atleast_2d(np.asarray(batch, dtype=float))
        n = batch.shape[0]
        base = self.eval_count
        if self._pool is not None and n > 1:
            futures = [self._pool.submit(self._eval_one, batch[i], base + i)
                       for i in range(n)]
            try:
                values = [f.result() for f in futures]
            except Exception as exc:
                for f in futures:
                    f.cancel()
                if isinstance(exc, EvaluationError):
                    raise
                raise EvaluationError(f"fitness evaluation raised: {exc!r}") from exc
        else:
            values = [self._eval_one(batch[i], base + i) for i in range(n)]
        self.eval_count += n
        if self._records is not None:
            for i, y in enumerate(values):
                self._records.append((base + i, batch[i].copy(), y))
        return np.array(values)

    def drain_records(self) -> list[tuple[int, np.ndarray, float]]:
        """Return and clear the (eval_index, internal, fitness) tape."""
        if self._records is None:
            raise RuntimeError("evaluator was not created with record=True")
        out, self._records = self._records, []
        return out

    def close(self):
        if self._owns_pool and self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def evaluate_population(batch, fitness: FitnessSpec, workers: int = 1,
                        space: SearchSpace | None = None) -> np.ndarray:
    """One-shot batch evaluation with the engine's ordering guarantees.

    ``space`` may be omitted when the batch already holds decoded float
    vectors for a purely continuous problem.
    """
    batch = np.atleast_2d(np.asarray(batch, dtype=float))
    if space is None:
        from .space import parse_space
        lo, hi = batch.min() - 1.0, batch.max() + 1.0
        space = parse_space({f"x{i}": ["float", float(lo), float(hi)]
                             for i in range(batch.shape[1])})
    with Evaluator(space, fitness, workers=workers) as ev:
        return ev(batch)


@dataclass(frozen=True)
class GenRecord:
    """One generation row: cumulative evaluations and fitness statistics."""

    generation: int
    nevals: int
    best: float
    gen_best: float
    gen_mean: float
    elapsed_s: float

    def trajectory_fields(self) -> tuple:
        # elapsed_s is wall-clock and excluded from determinism comparisons
        return (self.generation, self.nevals, self.best, self.gen_best, self.gen_mean)


@dataclass
class RunLog:
    """Per-generation statistics of one optimizer run.

    ``best`` is the best-so-far fitness in the reported sense (non-increasing
    for minimization, non-decreasing for maximization).
    """

    mode: str = "min"
    records: list[GenRecord] = field(default_factory=list)

    def append(self, record: GenRecord):
        self.records.append(record)

    @property
    def generations(self) -> int:
        return len(self.records)

    @property
    def nevals(self) -> int:
        return self.records[-1].nevals if self.records else 0

    def trajectory(self) -> list[tuple]:
        """Deterministic fields only (drops wall-clock time)."""
        return [r.trajectory_fields() for r in self.records]

    def same_trajectory(self, other: "RunLog") -> bool:
        return self.mode == other.mode and self.trajectory() == other.trajectory()

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(",".join(RUNLOG_COLUMNS) + "\n")
            for r in self.records:
                fh.write(f"{r.generation},{r.nevals},{r.best!r},{r.gen_best!r},"
                         f"{r.gen_mean!r},{r.elapsed_s:.6f}\n")

    def to_arrays(self) -> dict[str, np.ndarray]:
        return {
            "log_generation": np.array([r.generation for r in self.records], dtype=np.int64),
            "log_nevals": np.array([r.nevals for r in self.records], dtype=np.int64),
            "log_best": np.array([r.best for r in self.records]),
            "log_gen_best": np.array([r.gen_best for r in self.records]),
            "log_gen_mean": np.array([r.gen_mean for r in self.records]),
            "log_elapsed": np.array([r.elapsed_s for r in self.records]),
        }

    @classmethod
    def from_arrays(cls, mode: str, arrays: dict[str, np.ndarray]) -> "RunLog":
        log = cls(mode=mode)
        n = len(arrays["log_generation"])
        for i in range(n):
            log.append(GenRecord(
                generation=int(arrays["log_generation"][i]),
                nevals=int(arrays["log_nevals"][i]),
                best=float(arrays["log_best"][i]),
                gen_best=float(arrays["log_gen_best"][i]),
                gen_mean=float(arrays["log_gen_mean"][i]),
                elapsed_s=float(arrays["log_elapsed"][i]),
            ))
        return log


def config_hash(config: dict) -> str:
    """Stable hash of a JSON-compatible configuration mapping."""
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canon.encode()).hexdigest()


# Checkpoint file layout: MAGIC, 4-byte header length, JSON header, then the
# arrays as concatenated .npy blobs in the order listed by the header.  The
# header stores a sha256 of the payload so corruption is detected before any
# array is parsed.  .npy blobs carry no timestamps, so saving the same state
# twice yields byte-identical files.
CHECKPOINT_MAGIC = b"EVOPTCK1"


def save_checkpoint(path, header: dict, arrays: dict[str, np.ndarray]) -> None:
    payload = io.BytesIO()
    order = []
    for name in arrays:
        order.append(name)
        np.save(payload, np.ascontiguousarray(arrays[name]), allow_pickle=False)
    blob = payload.getvalue()
    header = dict(header)
    header["array_order"] = order
    header["payload_sha256"] = hashlib.sha256(blob).hexdigest()
    head = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack(">I", len(head)))
        fh.write(head)
        fh.write(blob)


def load_checkpoint(path) -> tuple[dict, dict[str, np.ndarray]]:
    with open(path, "rb") as fh:
        magic = fh.read(len(CHECKPOINT_MAGIC))
        if magic != CHECKPOINT_MAGIC:
            raise CheckpointError(f"{path}: not a checkpoint file (bad magic {magic!r})")
        (hlen,) = struct.unpack(">I", fh.read(4))
        try:
            header = json.loads(fh.read(hlen).decode())
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise CheckpointError(f"{path}: unreadable header: {exc}") from exc
        blob = fh.read()
    digest = hashlib.sha256(blob).hexdigest()
    if digest != header.get("payload_sha256"):
        raise CheckpointError(f"{path}: payload checksum mismatch, file is corrupt")
    arrays = {}
    buf = io.BytesIO(blob)
    for name in header["array_order"]:
        arrays[name] = np.load(buf, allow_pickle=False)
    return header, arrays
