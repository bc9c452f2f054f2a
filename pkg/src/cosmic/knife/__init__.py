"""Learnable Gaussian-mixture entropy estimators and the MI estimate built
from them: I_hat = h_hat(target) - h_hat(target | conditioning)."""

from .config import KnifeConfig
from .kernels import BACKEND as kernel_backend
from .models import ConditionalKnife, FitDiagnostics, MarginalKnife, Standardizer
from .serialize import load_model, save_model
from .training import (
    S_TO_T,
    T_TO_S,
    MiEstimate,
    conditional_entropy,
    entropy,
    estimate_mi,
    fit_conditional,
    fit_marginal,
    pointwise_mi,
)

__all__ = [
    "KnifeConfig",
    "kernel_backend",
    "MarginalKnife",
    "ConditionalKnife",
    "Standardizer",
    "FitDiagnostics",
    "MiEstimate",
    "S_TO_T",
    "T_TO_S",
    "fit_marginal",
    "fit_conditional",
    "entropy",
    "conditional_entropy",
    "estimate_mi",
    "pointwise_mi",
    "save_model",
    "load_model",
]
