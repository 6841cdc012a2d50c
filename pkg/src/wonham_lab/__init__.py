"""Simulation, filtering and Lyapunov-exponent laboratory for the Wonham filter."""
from .bounds import BoundsReport, check_bound_consistency, compute_bounds
from .campaign import run_campaign
from .estimators import StabilityIndexEstimator, WonhamFilter
from .exceptions import (
    DegenerateObservationError,
    DegenerateRunError,
    DomainError,
    InsufficientHorizonError,
    NonErgodicError,
    NotApplicableError,
)
from .filtering import (
    FilterTrajectory,
    TwoFilterRun,
    filter_step,
    run_filter,
    run_two_filters,
    wedge_log_norm,
)
from .lyapunov import (
    LyapunovEstimate,
    gamma_distance_slope,
    lambda1_fk_pathwise,
    lambda1_fk_stationary,
    lambda1_log_norm,
    lambda_sum_wedge,
)
from .model import (
    ModelSpec,
    coupling_rate,
    matrix_exponential,
    spectral_gap,
    stationary_distribution,
    validate,
)
from .simulate import RngStream, coupling_time, sample_chain, sample_observation, simulate
from .twostate import (
    gamma_expansion_high_snr,
    gamma_expansion_low_snr,
    gamma_quadrature,
    lambda1_quadrature,
    lambda1_refined_expansion,
    lambda_sum_closed_form,
    solve_gamma_lyapunov,
)

__version__ = "0.1.0"
