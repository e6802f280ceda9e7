"""evopt: population-based global optimization over mixed search spaces.

Nine standalone metaheuristics, two replay hybrids, and an offline
surrogate-assisted optimizer behind one contract, with parallel fitness
evaluation, checkpoint/restart, built-in engineering benchmarks, and
hyperparameter tuning.  Typical use:

    from evopt import GWO

    def sphere(x):
        return sum(xi**2 for xi in x)

    space = {f"x{i}": ["float", -100, 100] for i in range(1, 6)}
    gwo = GWO(mode="min", fit=sphere, bounds=space, nwolves=5, seed=1)
    xbest, ybest, log = gwo.evolute(ngen=100)
"""

from .algorithms import (ALGORITHMS, BAT, DE, ES, GWO, HHO, MFO, PSO, SA, WOA,
                         HyperParam, PopulationOptimizer, build)
from .engine import (CheckpointError, EvaluationError, Evaluator, GenRecord,
                     RunLog, evaluate_population, load_checkpoint, save_checkpoint)
from .pesa import PESA, PESA2, ReplayMemory
from .problems import (DomainError, FitnessSpec, get_problem, scalarize_linear,
                       self_adaptive_penalty, sphere, three_bar_truss)
from .space import (Candidate, SearchSpace, SpaceError, VariableSpec, parse_space,
                    sample)
from .surrogate import NHHO, SurrogateNet, TrainConfig, predict, train_surrogate
from .tune import (TUNERS, TuneResult, bayesian_search, evolutionary_search,
                   grid_search, make_inner, random_search)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # spaces
    "SearchSpace", "VariableSpec", "Candidate", "SpaceError", "parse_space", "sample",
    # problems
    "FitnessSpec", "DomainError", "sphere", "three_bar_truss",
    "self_adaptive_penalty", "scalarize_linear", "get_problem",
    # engine
    "Evaluator", "EvaluationError", "CheckpointError", "RunLog", "GenRecord",
    "evaluate_population", "save_checkpoint", "load_checkpoint",
    # algorithms
    "PopulationOptimizer", "HyperParam", "ALGORITHMS", "build",
    "GWO", "HHO", "DE", "PSO", "SA", "ES", "BAT", "MFO", "WOA",
    "PESA", "PESA2", "ReplayMemory", "NHHO",
    "SurrogateNet", "TrainConfig", "train_surrogate", "predict",
    # tuning
    "TuneResult", "TUNERS", "grid_search", "random_search", "bayesian_search",
    "evolutionary_search", "make_inner",
]
