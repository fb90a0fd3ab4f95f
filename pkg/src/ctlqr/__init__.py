"""Adaptive control of continuous-time stochastic linear-quadratic systems.

Simulates the randomized certainty-equivalent policy on unknown linear
diffusions, identifies the dynamics online from a single trajectory, and
measures regret against the oracle-optimal feedback.
"""

__version__ = "0.1.0"

from .backend import available_backends, default_backend_name, get_backend
from .errors import (
    BlowUpError,
    ConfigError,
    ConvergenceError,
    CtlqrError,
    DimensionError,
    GridMismatchError,
    RankDeficiencyError,
    ScheduleError,
    StabilityError,
    StabilizabilityError,
)
from .estimator import (
    ParameterEstimate,
    draw_initial_estimate,
    estimation_error,
    least_squares,
    randomize,
)
from .experiment import (
    ExperimentConfig,
    ExperimentDataset,
    emit_csv,
    load_system,
    run_replicates,
    save_system,
)
from .linalg import (
    Gain,
    RiccatiSolution,
    is_hurwitz,
    matrix_exponential,
    optimal_gain,
    solve_care,
    solve_lyapunov,
    spectral_abscissa,
)
from .model import CostSpec, Dynamics, ValidationReport, airplane_model, stationary_covariance, validate
from .noise import CANONICAL_DT, NoisePath
from .policy import EpisodeSchedule, PolicyOptions, run_algorithm1, safeguard, schedule
from .records import EpisodeRecord, RunRecord, SafeguardEvent
from .regret import (
    RegretCurve,
    RegretDecomposition,
    TransientWeightCache,
    compute_regret,
    decomposition_check,
    instantaneous_cost,
    oracle_run,
)
from .sde import (
    EstimatorAccumulators,
    Trajectory,
    closed_form_moments,
    self_normalized_statistic,
    simulate_segment,
)

__all__ = [
    "__version__",
    "available_backends",
    "default_backend_name",
    "get_backend",
    "CtlqrError",
    "DimensionError",
    "StabilityError",
    "StabilizabilityError",
    "ConvergenceError",
    "RankDeficiencyError",
    "BlowUpError",
    "ScheduleError",
    "GridMismatchError",
    "ConfigError",
    "Gain",
    "RiccatiSolution",
    "is_hurwitz",
    "spectral_abscissa",
    "solve_lyapunov",
    "solve_care",
    "optimal_gain",
    "matrix_exponential",
    "Dynamics",
    "CostSpec",
    "ValidationReport",
    "airplane_model",
    "validate",
    "stationary_covariance",
    "NoisePath",
    "CANONICAL_DT",
    "Trajectory",
    "EstimatorAccumulators",
    "simulate_segment",
    "closed_form_moments",
    "self_normalized_statistic",
    "ParameterEstimate",
    "least_squares",
    "randomize",
    "estimation_error",
    "draw_initial_estimate",
    "EpisodeSchedule",
    "PolicyOptions",
    "schedule",
    "safeguard",
    "run_algorithm1",
    "SafeguardEvent",
    "EpisodeRecord",
    "RunRecord",
    "RegretCurve",
    "RegretDecomposition",
    "TransientWeightCache",
    "instantaneous_cost",
    "compute_regret",
    "oracle_run",
    "decomposition_check",
    "ExperimentConfig",
    "ExperimentDataset",
    "run_replicates",
    "emit_csv",
    "load_system",
    "save_system",
]
