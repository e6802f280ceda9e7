"""Built-in fitness functions, constraint helpers, and the problem registry.

Fitness functions take the decoded variable values and return a scalar.  They
are pure and reentrant, which is what allows the engine to evaluate a
population concurrently.  User-supplied fitness functions must honor the same
contract.

Constraints are handled inside the fitness function (penalty style) rather
than by dedicated machinery; :func:`self_adaptive_penalty` implements the
Coello (2000) self-adaptive scheme used by the truss benchmark.  Equality
constraints are expected to be rewritten by the user as ``|h| - eps <= 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .space import SearchSpace, parse_space

__all__ = [
    "DomainError",
    "FitnessSpec",
    "sphere",
    "self_adaptive_penalty",
    "three_bar_truss",
    "scalarize_linear",
    "get_problem",
    "PROBLEMS",
]


class DomainError(ValueError):
    """A fitness function was called outside its mathematical domain."""


@dataclass(frozen=True)
class FitnessSpec:
    """A named scalar objective plus its optimization sense and error policy.

    ``on_error="sentinel"`` makes the engine replace non-finite fitness values
    (and :class:`DomainError` raises) with ``sentinel`` instead of aborting the
    run; the default policy aborts.
    """

    name: str
    evaluator: Callable[[Sequence], float]
    mode: str = "min"
    on_error: str = "abort"
    sentinel: float = 1.0e12

    def __post_init__(self):
        if self.mode not in ("min", "max"):
            raise ValueError(f"mode must be 'min' or 'max', got {self.mode!r}")
        if self.on_error not in ("abort", "sentinel"):
            raise ValueError(f"on_error must be 'abort' or 'sentinel', got {self.on_error!r}")

    def __call__(self, x: Sequence) -> float:
        return self.evaluator(x)


def sphere(x: Sequence[float]) -> float:
    """Sum of squared coordinates; global minimum 0 at the origin."""
    return float(sum(float(xi) ** 2 for xi in x))


def self_adaptive_penalty(y: float, g: Iterable[float], w1: float, w2: float) -> float:
    """Penalized objective ``y + w1 * sum(max(g_i, 0)) + w2 * count(g_i > 0)``.

    ``g_i <= 0`` means constraint i is satisfied.  The result equals ``y``
    exactly on feasible points and is monotone non-decreasing in each ``g_i``.
    """
    g = list(g)
    phi = sum(max(float(gi), 0.0) for gi in g)
    viol = sum(1 for gi in g if gi > 0)
    return float(y) + w1 * phi + w2 * viol


def three_bar_truss(x: Sequence[float]) -> float:
    """Three-bar truss design: penalized structure volume over two bar areas.

    Classic constrained benchmark with two cross-sectional areas and three
    stress constraints, penalized with ``self_adaptive_penalty`` at
    ``w1 = w2 = 100``.  Feasible points return the raw volume exactly.
    """
    x1, x2 = float(x[0]), float(x[1])
    if x1 <= 0 or x2 <= 0:
        raise DomainError(f"truss areas must be positive, got ({x1}, {x2})")
    y = (2 * math.sqrt(2) * x1 + x2) * 100

    g1 = (math.sqrt(2) * x1 + x2) / (math.sqrt(2) * x1 ** 2 + 2 * x1 * x2) * 2 - 2
    g2 = x2 / (math.sqrt(2) * x1 ** 2 + 2 * x1 * x2) * 2 - 2
    g3 = 1 / (x1 + math.sqrt(2) * x2) * 2 - 2

    return self_adaptive_penalty(y, [g1, g2, g3], w1=100, w2=100)


def three_bar_truss_volume(x: Sequence[float]) -> float:
    """Raw (unpenalized) truss volume, for feasibility cross-checks."""
    return (2 * math.sqrt(2) * float(x[0]) + float(x[1])) * 100


def three_bar_truss_feasible(x: Sequence[float]) -> bool:
    """Independent feasibility predicate for the truss constraints."""
    x1, x2 = float(x[0]), float(x[1])
    if x1 <= 0 or x2 <= 0:
        return False
    g1 = (math.sqrt(2) * x1 + x2) / (math.sqrt(2) * x1 ** 2 + 2 * x1 * x2) * 2 - 2
    g2 = x2 / (math.sqrt(2) * x1 ** 2 + 2 * x1 * x2) * 2 - 2
    g3 = 1 / (x1 + math.sqrt(2) * x2) * 2 - 2
    return g1 <= 0 and g2 <= 0 and g3 <= 0


def scalarize_linear(objectives: Sequence[float], weights: Sequence[float]) -> float:
    """Weighted sum ``sum(w_k * f_k)`` for a-priori multiobjective reduction."""
    if len(objectives) != len(weights):
        raise ValueError(f"got {len(objectives)} objectives but {len(weights)} weights")
    return float(sum(w * f for w, f in zip(weights, objectives)))


def _sphere_space(d: int = 5) -> SearchSpace:
    return parse_space({f"x{i}": ["float", -100, 100] for i in range(1, d + 1)})


def _truss_space() -> SearchSpace:
    # Lower bound kept strictly positive: clipping to an exact 0 area would
    # put the fitness outside its domain.
    return parse_space({"x1": ["float", 1e-6, 1.0], "x2": ["float", 1e-6, 1.0]})


def _make_sphere(d: int = 5):
    return FitnessSpec(name="sphere", evaluator=sphere, mode="min"), _sphere_space(d)


def _make_tbtd():
    return FitnessSpec(name="tbtd", evaluator=three_bar_truss, mode="min"), _truss_space()


def _make_sofc():
    from . import sofc
    return (FitnessSpec(name="sofc", evaluator=sofc.sofc_fitness, mode="max",
                        on_error="sentinel", sentinel=sofc.SENTINEL_FITNESS),
            sofc.sofc_space())


PROBLEMS: dict[str, Callable] = {
    "sphere": _make_sphere,
    "tbtd": _make_tbtd,
    "sofc": _make_sofc,
}


def get_problem(name: str, **kwargs) -> tuple[FitnessSpec, SearchSpace]:
    """Look up a built-in problem by registry name.

    Returns the fitness spec and the problem's default search space.
    """
    if name not in PROBLEMS:
        raise KeyError(f"unknown problem {name!r}; registry: {sorted(PROBLEMS)}")
    return PROBLEMS[name](**kwargs)
