"""Sparse support recovery via noise-dictionary basis pursuit.

The estimator overfits the response with an l1-minimal fit over the design
augmented by random Gaussian "noise dictionaries", aggregates the design
coefficients across dictionaries by componentwise median, and thresholds
at a level calibrated so the empty model is returned with probability
1 - alpha under the global null. Calibration works without knowing the
noise level, through a pivotal statistic simulated by Monte Carlo and
optionally summarized by a generalized extreme value fit.
"""

from .bp import (
    BpSolution,
    ExtendedBpSolution,
    ToleranceConfig,
    check_certificate,
    solve_bp,
    solve_extended_bp,
)
from .design import (
    DesignMatrix,
    GroundTruth,
    load_design_csv,
    load_response_csv,
    mean_center_projection,
    standardize,
)
from .estimator import (
    LassoZeroConfig,
    LassoZeroFit,
    apply_threshold,
    fit,
    fit_qut,
    median_aggregate,
    scale_dictionary,
)
from .gev import GevParams, fit_gev, gev_cdf, gev_upper_quantile
from .metrics import SupportMetrics, score_support
from .qut import (
    PivotalCalibration,
    known_sigma_threshold,
    noise_scale_s,
    simulate_pivotal,
    threshold_from_calibration,
)
from .rng import SeededRng, gaussian_matrix
from .simulate import CampaignResult, SimulationSetting, generate_instance, run_campaign

__all__ = [
    "BpSolution",
    "CampaignResult",
    "DesignMatrix",
    "ExtendedBpSolution",
    "GevParams",
    "GroundTruth",
    "LassoZeroConfig",
    "LassoZeroFit",
    "PivotalCalibration",
    "SeededRng",
    "SimulationSetting",
    "SupportMetrics",
    "ToleranceConfig",
    "apply_threshold",
    "check_certificate",
    "fit",
    "fit_gev",
    "fit_qut",
    "gaussian_matrix",
    "generate_instance",
    "gev_cdf",
    "gev_upper_quantile",
    "known_sigma_threshold",
    "load_design_csv",
    "load_response_csv",
    "mean_center_projection",
    "median_aggregate",
    "noise_scale_s",
    "run_campaign",
    "scale_dictionary",
    "score_support",
    "simulate_pivotal",
    "solve_bp",
    "solve_extended_bp",
    "standardize",
    "threshold_from_calibration",
]

__version__ = "0.1.0"
