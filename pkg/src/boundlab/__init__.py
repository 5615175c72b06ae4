"""Compressed-sensing matrix quality measures, recovery bounds and designers.

Submodules: :mod:`~boundlab.linalg`, :mod:`~boundlab.signals`,
:mod:`~boundlab.cacti`, :mod:`~boundlab.solvers`, :mod:`~boundlab.metrics`,
:mod:`~boundlab.bounds`, :mod:`~boundlab.design` and the experiment
:mod:`~boundlab.harness`.
"""

__version__ = "0.1.0"

from .bounds import BoundTrace, cai_bound, studer_final_bound, studer_trace, tang_bound
from .cacti import CactiCode, EffectiveDictionary, assemble, random_code, sense
from .errors import (
    BoundlabError,
    BudgetError,
    ConvergenceError,
    DegenerateInputError,
    InapplicableError,
    SingularityError,
    StructuralError,
)
from .metrics import average_coherence_sq, coherence, normalized_gram, omega, ric
from .signals import add_bounded_noise, dct2_basis, gen_sparse_dataset, gen_support_pool, rrmse
from .solvers import BasisPursuit, RecoveryResult, SolverConfig, basis_pursuit

__all__ = [
    "BasisPursuit",
    "BoundTrace",
    "BoundlabError",
    "BudgetError",
    "CactiCode",
    "ConvergenceError",
    "DegenerateInputError",
    "EffectiveDictionary",
    "InapplicableError",
    "RecoveryResult",
    "SingularityError",
    "SolverConfig",
    "StructuralError",
    "add_bounded_noise",
    "assemble",
    "average_coherence_sq",
    "basis_pursuit",
    "cai_bound",
    "coherence",
    "dct2_basis",
    "gen_sparse_dataset",
    "gen_support_pool",
    "normalized_gram",
    "omega",
    "random_code",
    "rrmse",
    "ric",
    "sense",
    "studer_final_bound",
    "studer_trace",
    "tang_bound",
]
