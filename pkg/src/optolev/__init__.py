"""Simulation and analysis toolkit for stationary light-mechanics
entanglement in a cavity-levitated nanoparticle system."""

from ._kernels import backend_name
from .entanglement import (
    duan_sum,
    log_negativity,
    nu_min_ppt,
    validate_cm,
)
from .model import (
    DriftModel,
    UnstableModelError,
    build_drift,
    intracavity_cov,
    stability,
    steady_covariance,
)
from .modes import CovMatrix, FilterMode, covariance_direct, covariance_model, make_rect_filter
from .params import SystemParams, reference_params
from .spectra import SpectralMatrix, heterodyne_psd, output_spectral_matrix, susceptibility

__version__ = "0.1.0"

__all__ = [
    "DriftModel",
    "CovMatrix",
    "FilterMode",
    "SpectralMatrix",
    "SystemParams",
    "UnstableModelError",
    "backend_name",
    "build_drift",
    "covariance_direct",
    "covariance_model",
    "duan_sum",
    "heterodyne_psd",
    "intracavity_cov",
    "log_negativity",
    "make_rect_filter",
    "nu_min_ppt",
    "output_spectral_matrix",
    "reference_params",
    "stability",
    "steady_covariance",
    "susceptibility",
    "validate_cm",
]
