"""Bayesian identification of bridge-deck flutter derivatives from buffeting
response spectra."""

from .aeroelastic import (
    FD_NAMES,
    THETA_NAMES,
    FlowCondition,
    FlutterDerivatives,
    StructuralParams,
    ThetaVector,
    reduced_frequencies,
)
from .config import RunConfig, load_config, bridge_simulation_doc, parse_config, thin_plate_doc
from .likelihood import LikelihoodContext, PriorSpec, negative_log_posterior, wishart_log_pdf
from .pipeline import identify, simulate_from_config
from .sampler import SamplerConfig, run_ensemble
from .theodorsen import flat_plate_fds, theodorsen_fg

__all__ = [
    "FD_NAMES", "THETA_NAMES", "FlowCondition", "FlutterDerivatives", "StructuralParams",
    "ThetaVector", "reduced_frequencies", "RunConfig", "load_config", "parse_config",
    "bridge_simulation_doc", "thin_plate_doc",
    "LikelihoodContext", "PriorSpec", "negative_log_posterior", "wishart_log_pdf",
    "identify", "simulate_from_config", "SamplerConfig", "run_ensemble",
    "flat_plate_fds", "theodorsen_fg",
]
__version__ = "0.1.0"
