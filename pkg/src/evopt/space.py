"""Search space definitions for mixed discrete/continuous/categorical optimization.

Three variable kinds are supported:

* ``int``    -- an integer variable with inclusive bounds, e.g. ``["int", 1, 6]``
* ``float``  -- a real variable with inclusive bounds, e.g. ``["float", -100, 100]``
* ``grid``   -- a categorical variable over an ordered tuple of levels,
  e.g. ``["grid", ("linear", "rbf", "sigmoid")]``

Every variable is carried internally as a continuous coordinate so that any
continuous position-update rule applies uniformly to mixed spaces:

* floats live on their own axis and pass through unchanged,
* ints live on ``[low, high]`` and are discretized by nearest-integer rounding
  (ties rounded half away from zero) at decode time,
* grids live on the continuous index axis ``[0, nlevels - 1]`` and are
  discretized to the nearest index, then mapped to the level atom.

Out-of-bounds internal coordinates are handled by clipping (:func:`repair`),
never by reflection or re-sampling.  All functions here are pure; random
streams are passed in explicitly and never shared between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

__all__ = [
    "SpaceError",
    "VariableSpec",
    "SearchSpace",
    "Candidate",
    "parse_space",
    "sample",
]

KINDS = ("int", "float", "grid")


class SpaceError(ValueError):
    """Raised for malformed space definitions or inconsistent vectors."""


def _round_half_away(c: float) -> int:
    """Nearest integer with ties rounded half away from zero."""
    return int(math.floor(abs(c) + 0.5)) * (1 if c >= 0 else -1)


@dataclass(frozen=True)
class VariableSpec:
    """One decision variable: an int/float range or a categorical grid."""

    name: str
    kind: str
    low: float | None = None
    high: float | None = None
    levels: tuple | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpaceError(f"variable '{self.name}': unknown kind '{self.kind}' "
                             f"(expected one of {KINDS})")
        if self.kind == "grid":
            if not self.levels:
                raise SpaceError(f"variable '{self.name}': grid requires a non-empty "
                                 "tuple of levels")
            if len(set(self.levels)) != len(self.levels):
                raise SpaceError(f"variable '{self.name}': grid levels contain duplicates")
        else:
            if self.low is None or self.high is None:
                raise SpaceError(f"variable '{self.name}': {self.kind} requires low and "
                                 "high bounds")
            if not (math.isfinite(self.low) and math.isfinite(self.high)):
                raise SpaceError(f"variable '{self.name}': bounds must be finite")
            if self.low >= self.high:
                raise SpaceError(f"variable '{self.name}': degenerate bounds "
                                 f"(low={self.low!r} >= high={self.high!r})")
            if self.kind == "int":
                if self.low != int(self.low) or self.high != int(self.high):
                    raise SpaceError(f"variable '{self.name}': int bounds must be "
                                     f"integers, got [{self.low!r}, {self.high!r}]")

    @property
    def internal_low(self) -> float:
        return 0.0 if self.kind == "grid" else float(self.low)

    @property
    def internal_high(self) -> float:
        return float(len(self.levels) - 1) if self.kind == "grid" else float(self.high)

    def decode_coord(self, c: float):
        """Map one internal coordinate to the variable's typed value."""
        if self.kind == "float":
            return float(c)
        if self.kind == "int":
            return min(max(_round_half_away(c), int(self.low)), int(self.high))
        idx = min(max(_round_half_away(c), 0), len(self.levels) - 1)
        return self.levels[idx]

    def encode_value(self, value) -> float:
        """Map a typed value back to its internal coordinate."""
        if self.kind == "grid":
            try:
                return float(self.levels.index(value))
            except ValueError:
                raise SpaceError(f"variable '{self.name}': {value!r} is not a grid level")
        v = float(value)
        if self.kind == "int" and v != int(v):
            raise SpaceError(f"variable '{self.name}': expected an integer, got {value!r}")
        if not (self.internal_low <= v <= self.internal_high):
            raise SpaceError(f"variable '{self.name}': {value!r} outside "
                             f"[{self.low!r}, {self.high!r}]")
        return v

    def contains(self, value) -> bool:
        if self.kind == "grid":
            return value in self.levels
        if self.kind == "int":
            return float(value) == int(value) and self.low <= value <= self.high
        return self.low <= value <= self.high

    def to_entry(self) -> list:
        if self.kind == "grid":
            return ["grid", list(self.levels)]
        caster = int if self.kind == "int" else float
        return [self.kind, caster(self.low), caster(self.high)]


@dataclass(frozen=True)
class SearchSpace:
    """An ordered collection of variables; iteration order is definition order."""

    variables: tuple[VariableSpec, ...]

    def __post_init__(self):
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise SpaceError(f"duplicate variable names: {dup}")
        if not self.variables:
            raise SpaceError("space must declare at least one variable")

    @property
    def dimension(self) -> int:
        return len(self.variables)

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    @property
    def internal_lower(self) -> np.ndarray:
        return np.array([v.internal_low for v in self.variables])

    @property
    def internal_upper(self) -> np.ndarray:
        return np.array([v.internal_high for v in self.variables])

    def sample_internal(self, rng: np.random.Generator, n: int | None = None) -> np.ndarray:
        """Draw uniform internal coordinates; shape (d,) or (n, d).

        Ints are uniform over the integers of [low, high], grids uniform over
        levels, floats uniform over [low, high].
        """
        count = 1 if n is None else n
        out = np.empty((count, self.dimension))
        for j, v in enumerate(self.variables):
            if v.kind == "float":
                out[:, j] = rng.uniform(v.low, v.high, size=count)
            elif v.kind == "int":
                out[:, j] = rng.integers(int(v.low), int(v.high) + 1, size=count)
            else:
                out[:, j] = rng.integers(0, len(v.levels), size=count)
        return out[0] if n is None else out

    def decode(self, internal: Sequence[float]) -> list:
        """Map an internal vector to the list of typed variable values."""
        if len(internal) != self.dimension:
            raise SpaceError(f"internal vector has length {len(internal)}, "
                             f"expected {self.dimension}")
        return [v.decode_coord(float(c)) for v, c in zip(self.variables, internal)]

    def encode(self, decoded: Sequence) -> np.ndarray:
        """Map typed values to internal coordinates (exact for every kind)."""
        if len(decoded) != self.dimension:
            raise SpaceError(f"decoded vector has length {len(decoded)}, "
                             f"expected {self.dimension}")
        return np.array([v.encode_value(x) for v, x in zip(self.variables, decoded)])

    def repair(self, internal: np.ndarray) -> np.ndarray:
        """Clip internal coordinates into their axes; idempotent."""
        return np.clip(internal, self.internal_lower, self.internal_upper)

    def contains(self, decoded: Sequence) -> bool:
        return len(decoded) == self.dimension and all(
            v.contains(x) for v, x in zip(self.variables, decoded))

    def to_dict(self) -> dict:
        """Serializable form; ``parse_space`` round-trips it to an equal space."""
        return {v.name: v.to_entry() for v in self.variables}

    def __len__(self) -> int:
        return self.dimension


@dataclass
class Candidate:
    """A point in the space: internal coordinates plus decoded values.

    ``fitness`` is ``None`` until evaluated; ``eval_index`` is the monotone
    evaluation counter assigned by the engine.
    """

    internal: np.ndarray
    decoded: list
    fitness: float | None = None
    eval_index: int | None = None


def _parse_entry(name: str, entry) -> VariableSpec:
    if not isinstance(entry, (list, tuple)) or not entry:
        raise SpaceError(f"variable '{name}': entry must be a non-empty list "
                         f"[kind, args...], got {entry!r}")
    kind = entry[0]
    if kind == "grid":
        if len(entry) != 2 or not isinstance(entry[1], (list, tuple)):
            raise SpaceError(f"variable '{name}': grid expects a single sequence of "
                             f"levels, got {entry[1:]!r}")
        return VariableSpec(name=name, kind="grid", levels=tuple(entry[1]))
    if kind in ("int", "float"):
        if len(entry) != 3:
            raise SpaceError(f"variable '{name}': {kind} expects [kind, low, high], "
                             f"got {entry!r}")
        low, high = entry[1], entry[2]
        if not isinstance(low, (int, float)) or not isinstance(high, (int, float)) \
                or isinstance(low, bool) or isinstance(high, bool):
            raise SpaceError(f"variable '{name}': bounds must be numeric, "
                             f"got [{low!r}, {high!r}]")
        return VariableSpec(name=name, kind=kind, low=low, high=high)
    raise SpaceError(f"variable '{name}': unknown kind {kind!r} (expected one of {KINDS})")


def parse_space(spec: dict) -> SearchSpace:
    """Build a :class:`SearchSpace` from a ``{name: [kind, args...]}`` mapping.

    Declaration order is preserved.  Malformed entries raise :class:`SpaceError`
    naming the offending variable.
    """
    if not isinstance(spec, dict):
        raise SpaceError(f"space definition must be a mapping, got {type(spec).__name__}")
    return SearchSpace(tuple(_parse_entry(str(name), entry) for name, entry in spec.items()))


def sample(space: SearchSpace, rng: np.random.Generator) -> Candidate:
    """Draw one uniform candidate with consistent internal coordinates."""
    internal = space.sample_internal(rng)
    return Candidate(internal=internal, decoded=space.decode(internal))
