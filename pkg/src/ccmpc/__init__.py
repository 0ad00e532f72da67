"""Chance-constrained MPC for polynomial systems via moment relaxations."""
from .config import ConfigError, dump_config, example_path, load_config, load_example, parse_config
from .dynamics import (
    ProblemSpec, SemialgebraicSet, SystemModel, constraint_polynomial, expected_cost,
    horizon_cost, required_probability, unroll,
)
from .extraction import ExtractionResult, extract_control
from .moments import (
    DisturbanceSpec, MomentSequence, delta_moments, linear_functional, localizing_matrix,
    moment_matrix, product_moments, representing_measure_check, uniform_moments,
)
from .mpc import (
    RunConfig, StepError, TrajectoryLog, mc_validate, replay, simulate, step,
    theorem1_khat, theorem1_phat, theorem1_phat_limit,
)
from .poly import Polynomial, grevlex_rank, monomial_basis, parse_polynomial
from .relaxation import RelaxationConfig, build_relaxation, scale_problem
from .sdp import SdpProblem, SdpSolution, SolverSettings, check_solution, psd_check, solve

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DisturbanceSpec", "ExtractionResult", "MomentSequence", "Polynomial",
    "ProblemSpec", "RelaxationConfig", "RunConfig", "SdpProblem", "SdpSolution",
    "SemialgebraicSet", "SolverSettings", "StepError", "SystemModel", "TrajectoryLog",
    "build_relaxation", "check_solution", "constraint_polynomial", "delta_moments",
    "dump_config", "example_path", "expected_cost", "extract_control", "grevlex_rank",
    "horizon_cost", "linear_functional", "load_config", "load_example", "localizing_matrix",
    "mc_validate", "moment_matrix", "monomial_basis", "parse_config", "parse_polynomial",
    "product_moments", "psd_check", "replay", "representing_measure_check",
    "required_probability", "scale_problem", "simulate", "solve", "step", "theorem1_khat",
    "theorem1_phat", "theorem1_phat_limit", "uniform_moments", "unroll",
]
