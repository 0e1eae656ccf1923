"""Weighted exponential family: densities, sampling, closed-form estimation,
bootstrap bias reduction and Monte Carlo studies."""

from .asymptotics import MomentVector, delta_covariance, g1, g2, quadrature_moments, theorem1_moments
from .estimation import (
    DataError,
    DegenerateSampleError,
    FitResult,
    SummaryStats,
    estimate,
    estimate_distinct,
    estimate_equal,
    specialized_stats,
    summary_stats,
    to_native,
)
from .generators import BUILTIN_NAMES, Generator, builtin, inverse, power_generator
from .mcstudy import StudyConfig, StudyReport, bootstrap_bias_reduce, rb, rmse, run_study
from .model import ModelParams, NativeParams, log_pdf, mixture_components, pdf, pdf_power, sample
from .specialfn import DomainError, SeedStream

__version__ = "0.1.0"

__all__ = [
    "MomentVector",
    "delta_covariance",
    "g1",
    "g2",
    "quadrature_moments",
    "theorem1_moments",
    "DataError",
    "DegenerateSampleError",
    "FitResult",
    "SummaryStats",
    "estimate",
    "estimate_distinct",
    "estimate_equal",
    "specialized_stats",
    "summary_stats",
    "to_native",
    "BUILTIN_NAMES",
    "Generator",
    "builtin",
    "inverse",
    "power_generator",
    "StudyConfig",
    "StudyReport",
    "bootstrap_bias_reduce",
    "rb",
    "rmse",
    "run_study",
    "ModelParams",
    "NativeParams",
    "log_pdf",
    "mixture_components",
    "pdf",
    "pdf_power",
    "sample",
    "DomainError",
    "SeedStream",
]
