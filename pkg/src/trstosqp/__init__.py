"""Fully stochastic trust-region SQP for equality-constrained optimization.

The main entry points are :func:`run` (TR-StoSQP), :func:`run_baseline`
(the l1-penalty line-search comparator) and the built-in problems in
:mod:`trstosqp.bench`.
"""

from .baseline import BaselineConfig, run_baseline
from .errors import (
    CapabilityError,
    ConfigurationError,
    ContractViolation,
    InvariantViolation,
    LibsvmParseError,
    MeritLoopError,
    RankDeficiencyError,
)
from .hessian import make_strategy
from .oracle import NoiseModel
from .problem import KKTResidual, ProblemInstance, eval_kkt
from .record import RunRecord, read_trace_csv
from .trsqp import BetaSchedule, SolverConfig, run
from .trsub import solve_tangential

__all__ = [
    "BaselineConfig", "BetaSchedule", "CapabilityError", "ConfigurationError",
    "ContractViolation", "InvariantViolation", "KKTResidual", "LibsvmParseError",
    "MeritLoopError", "NoiseModel", "ProblemInstance", "RankDeficiencyError", "RunRecord",
    "SolverConfig", "eval_kkt", "make_strategy", "read_trace_csv", "run", "run_baseline",
    "solve_tangential",
]
__version__ = "0.1.0"
