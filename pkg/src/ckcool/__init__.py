"""Steady states, stability and ground-state cooling of a cavity coupled to
several mechanical modes through radiation pressure and cross-Kerr terms."""

__version__ = "0.1.0"

from .errors import BracketError, ResidualError, SolverError, UnstableError, ValidationError
from .params import (SystemParams, bose_occupation, drive_amplitude, normalize_params,
                     device_defaults, params_to_config)
from .steady import (SteadyPolynomial, SteadyState, build_polynomial, find_steady_states,
                     reconstruct_state, select_branch, solve_roots)
from .linearized import LinearizedSystem, build_drift, build_noise, effective_params, linearize
from .covariance import (CovarianceResult, check_stability, dark_mode_occupation, lyapunov_residual,
                         phonon_numbers, solve_lyapunov, stability_report, steady_covariance)
from .sweep import (Optimum, SweepRecord, SweepSpec, emit_csv, evaluate_point, find_critical,
                    find_critical_ck, find_critical_power, find_optimal, find_optimal_power, run_sweep)
from .config import RunConfig, load_config

__all__ = [
    "BracketError",
    "ResidualError",
    "SolverError",
    "UnstableError",
    "ValidationError",
    "SystemParams",
    "bose_occupation",
    "drive_amplitude",
    "normalize_params",
    "device_defaults",
    "params_to_config",
    "SteadyPolynomial",
    "SteadyState",
    "build_polynomial",
    "find_steady_states",
    "reconstruct_state",
    "select_branch",
    "solve_roots",
    "LinearizedSystem",
    "build_drift",
    "build_noise",
    "effective_params",
    "linearize",
    "CovarianceResult",
    "check_stability",
    "dark_mode_occupation",
    "lyapunov_residual",
    "phonon_numbers",
    "solve_lyapunov",
    "stability_report",
    "steady_covariance",
    "Optimum",
    "SweepRecord",
    "SweepSpec",
    "emit_csv",
    "evaluate_point",
    "find_critical",
    "find_critical_ck",
    "find_critical_power",
    "find_optimal",
    "find_optimal_power",
    "run_sweep",
    "RunConfig",
    "load_config",
]
