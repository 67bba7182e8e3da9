"""Nearly unstable AR(1) processes driven by long-memory noise.

Simulation of the noise classes, the AR(1) recursion and its least-squares
statistics, discretised limit functionals of fractional Ornstein-Uhlenbeck
paths, closed forms for the limiting bias, and a Monte Carlo harness that
compares finite-sample and limit laws.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .ar1 import Ar1Config, OlsStatistics, SamplePath, decomposition_check, ols_estimate, scaled_statistics, simulate_ar1
from .asymptotics import bias_target, ef_asymptote, ef_mean, malliavin_derivative
from .errors import NearUnitError, ValidationError
from .fou import limit_scalar_F, ou_transform, sample_limit_vector, theta_functional
from .montecarlo import ExperimentConfig, bias_experiment, quantile_table, run_finite_sample, run_limit
from .noise import (
    ArfimaSpec,
    ExactFgn,
    FracIntegrated,
    IidGaussian,
    LinearFilter,
    attraction_constants,
    fgn_autocovariance,
    sample_fgn,
    sample_noise,
)

__all__ = [
    "Ar1Config",
    "ArfimaSpec",
    "ExactFgn",
    "ExperimentConfig",
    "FracIntegrated",
    "IidGaussian",
    "LinearFilter",
    "NearUnitError",
    "OlsStatistics",
    "SamplePath",
    "ValidationError",
    "attraction_constants",
    "bias_experiment",
    "bias_target",
    "decomposition_check",
    "ef_asymptote",
    "ef_mean",
    "fgn_autocovariance",
    "limit_scalar_F",
    "malliavin_derivative",
    "ols_estimate",
    "ou_transform",
    "quantile_table",
    "run_finite_sample",
    "run_limit",
    "sample_fgn",
    "sample_limit_vector",
    "sample_noise",
    "scaled_statistics",
    "simulate_ar1",
    "theta_functional",
]
