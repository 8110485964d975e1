"""Parameter recovery for mixtures of local Dirac measures from their moments."""

from .errors import (
    AmbiguityError,
    ConvergenceError,
    DegenerateError,
    DensityError,
    InsufficientMomentsError,
    NumericalFailure,
    RankConditionError,
)
from .moments import (
    CumulantSequence,
    DiracComponent,
    LocalDiracMixture,
    MomentSequence,
    ParetoParams,
    cumulants_to_moments,
    gaussian_moments,
    local_dirac_moments,
    mgf_convolve,
    mgf_deconvolve,
    mixture_of,
    moments_to_cumulants,
    pareto_moments,
    pareto_reparametrize,
)
from .hankel import kernel_polynomial, moment_matrix, numeric_rank, rank_profile
from .recovery import RecoveryConfig, RecoveryResult, prony_linear, recover
from .elimination import recover_two_component
from .fourier import (
    FourierSamples,
    PiecewiseLinearSignal,
    fourier_coefficients,
    reconstruct_signal,
)
from .statmix import LocalGaussianMixture, analytic_moments, estimate, sample

__version__ = "0.1.0"

__all__ = [
    "AmbiguityError",
    "ConvergenceError",
    "CumulantSequence",
    "DegenerateError",
    "DensityError",
    "DiracComponent",
    "FourierSamples",
    "InsufficientMomentsError",
    "LocalDiracMixture",
    "LocalGaussianMixture",
    "MomentSequence",
    "NumericalFailure",
    "ParetoParams",
    "PiecewiseLinearSignal",
    "RankConditionError",
    "RecoveryConfig",
    "RecoveryResult",
    "analytic_moments",
    "cumulants_to_moments",
    "estimate",
    "fourier_coefficients",
    "gaussian_moments",
    "kernel_polynomial",
    "local_dirac_moments",
    "mgf_convolve",
    "mgf_deconvolve",
    "mixture_of",
    "moment_matrix",
    "moments_to_cumulants",
    "numeric_rank",
    "pareto_moments",
    "pareto_reparametrize",
    "prony_linear",
    "rank_profile",
    "recover",
    "recover_two_component",
    "reconstruct_signal",
    "sample",
]
