from .ar import (
    EstimatorResult,
    LadProblem,
    ar1_lad,
    ar1_lse,
    ar1_wlad,
    ar1_wlse,
    lad_objective,
    weighted_median,
)
from .arch import VARIANTS, ZeroObservationError, arch_fit, arch_objective, standardized_residuals, tau_hat
from .asymptotic import AsymptoticLaw, asymptotic_variance
from .solver import SolverError, minimize_box_positive

__all__ = [
    "AsymptoticLaw",
    "EstimatorResult",
    "LadProblem",
    "SolverError",
    "VARIANTS",
    "ZeroObservationError",
    "ar1_lad",
    "ar1_lse",
    "ar1_wlad",
    "ar1_wlse",
    "arch_fit",
    "arch_objective",
    "asymptotic_variance",
    "lad_objective",
    "minimize_box_positive",
    "standardized_residuals",
    "tau_hat",
    "weighted_median",
]
