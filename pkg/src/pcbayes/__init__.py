"""Piecewise constant Bayesian estimation for stochastic processes.

Histogram-style priors with conjugate or chained (inverse) gamma levels,
exact FFBS for noisy observations, hitting-time inference for gamma-driven
SDEs and MCMC for locally perturbed gamma subordinators.
"""
from .core import (
    BetaParams,
    BinLayout,
    CredibleBand,
    DomainError,
    GammaParams,
    InverseGammaParams,
    McmcTrace,
    NormalParams,
    RngStream,
    exp_integral_E1,
)
from .kernels import IMPLEMENTATION as KERNEL_IMPLEMENTATION

__version__ = "0.1.0"

__all__ = [
    "BetaParams",
    "BinLayout",
    "CredibleBand",
    "DomainError",
    "GammaParams",
    "InverseGammaParams",
    "McmcTrace",
    "NormalParams",
    "RngStream",
    "exp_integral_E1",
    "KERNEL_IMPLEMENTATION",
    "__version__",
]
