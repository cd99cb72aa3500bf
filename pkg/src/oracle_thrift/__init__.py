"""Oracle-efficient combinatorial semi-bandit simulation."""

from .core import (
    Action,
    ActionSet,
    ArmStats,
    ComplexityLedger,
    Observation,
    PairStats,
    update_stats,
)
from .envs import (
    CovarianceGaussianEnv,
    GeneralDiscreteEnv,
    LinearUniformEnv,
    make_env,
    optimal_action,
    sigma_profile,
)
from .oracle import (
    AlphaOracle,
    EmptyFeasibleSet,
    EnumerationBudgetExceeded,
    ExactOracle,
    GeneralEvaluator,
    LinearWeights,
    OracleBatch,
    OracleQuery,
    execute_batch,
    solve_top_m_linear,
    wrap_alpha,
)
from .registry import ConfigError, make_algorithm, validate_algo_env
from .runner import RunConfig, RunRecord, read_results, run_sweep, run_trial, write_results
from .schedule import EpochGrid, build_grid, default_M

__version__ = "0.1.0"

__all__ = [
    "Action", "ActionSet", "ArmStats", "PairStats", "Observation",
    "ComplexityLedger", "update_stats",
    "LinearUniformEnv", "CovarianceGaussianEnv", "GeneralDiscreteEnv",
    "make_env", "optimal_action", "sigma_profile",
    "ExactOracle", "AlphaOracle", "LinearWeights", "GeneralEvaluator",
    "OracleQuery", "OracleBatch", "execute_batch", "solve_top_m_linear",
    "wrap_alpha", "EmptyFeasibleSet", "EnumerationBudgetExceeded",
    "ConfigError", "make_algorithm", "validate_algo_env",
    "RunConfig", "RunRecord", "run_trial", "run_sweep",
    "read_results", "write_results",
    "EpochGrid", "build_grid", "default_M",
    "__version__",
]
