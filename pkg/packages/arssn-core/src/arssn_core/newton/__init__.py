"""
Outer optimization loops and the rate predictions that go with them.
"""

from .hessian import ExactHessian, HessianModel, ScaledIdentityHessian, SubsampledHessian
from .optimizers import agd, arssn, default_momentum, nesterov_theta, rssn, svrg, zero_momentum
from .rates import (
    RatePrediction,
    fit_contraction,
    pi_from_sampling,
    rate_oracle,
    sample_size_thm3,
    theta_at,
    theta_star,
)
from .trace import Trace

__all__ = [
    "ExactHessian",
    "HessianModel",
    "RatePrediction",
    "ScaledIdentityHessian",
    "SubsampledHessian",
    "Trace",
    "agd",
    "arssn",
    "default_momentum",
    "fit_contraction",
    "nesterov_theta",
    "pi_from_sampling",
    "rate_oracle",
    "rssn",
    "sample_size_thm3",
    "svrg",
    "theta_at",
    "theta_star",
    "zero_momentum",
]
