"""Optimizer registry: nine standalone metaheuristics behind one contract.

Every optimizer exposes ``evolute(ngen, x0=None, ...) -> (xbest, ybest, log)``
and the same constructor surface (``mode``, ``fit``, ``bounds``, a flavored
population-size keyword, ``seed``, ``workers``, plus declared
hyperparameters).  ``build`` constructs one from a validated config mapping,
which is what the batch CLI and the tuner use.
"""

from __future__ import annotations

from .base import HyperParam, PopulationOptimizer
from .bat import BAT
from .de import DE
from .es import ES
from .gwo import GWO
from .hho import HHO
from .mfo import MFO
from .pso import PSO
from .sa import SA
from .woa import WOA

__all__ = [
    "HyperParam", "PopulationOptimizer",
    "GWO", "HHO", "DE", "PSO", "SA", "ES", "BAT", "MFO", "WOA",
    "ALGORITHMS", "build",
]

ALGORITHMS: dict[str, type] = {
    cls.name: cls for cls in (GWO, HHO, DE, PSO, SA, ES, BAT, MFO, WOA)
}


def _register_hybrids() -> None:
    # Imported lazily: the hybrids depend on this module.
    from ..pesa import PESA, PESA2
    from ..surrogate import NHHO
    for cls in (PESA, PESA2, NHHO):
        ALGORITHMS.setdefault(cls.name, cls)


def algorithm_names(include_hybrids: bool = True) -> list[str]:
    if include_hybrids:
        _register_hybrids()
    return sorted(ALGORITHMS)


def build(name: str, mode: str, fit, bounds, params: dict | None = None,
          seed=None, workers: int = 1):
    """Construct a registered optimizer from a config-style parameter mapping.

    ``params`` holds the flavored population key and hyperparameters; unknown
    keys are rejected and declared ranges enforced before any evaluation.
    """
    _register_hybrids()
    if name not in ALGORITHMS:
        raise KeyError(f"unknown algorithm {name!r}; registry: {algorithm_names()}")
    cls = ALGORITHMS[name]
    params = dict(params or {})
    allowed = set(cls.HYPERPARAMS) | {cls.pop_alias}
    extra = getattr(cls, "EXTRA_PARAMS", ())
    allowed |= set(extra)
    unknown = set(params) - allowed
    if unknown:
        raise ValueError(f"{name}: unknown parameters {sorted(unknown)}; "
                         f"allowed: {sorted(allowed)}")
    for pname, spec in cls.HYPERPARAMS.items():
        if pname in params:
            spec.validate(pname, params[pname])
    kwargs = dict(params)
    kwargs.setdefault(cls.pop_alias, cls.default_population)
    return cls(mode=mode, fit=fit, bounds=bounds, seed=seed, workers=workers,
               **kwargs)
