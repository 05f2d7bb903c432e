"""Photon-loss mitigation for Gaussian boson sampling."""

from .cancellation import apply_T, cancel_loss, cancellation_report, form_aware_estimate_tmsv, ominus, oplus, series_estimate
from .distributions import DiscreteDistribution, Orbit, patterns_up_to
from .experiments import ConfigError, Table, run
from .extrapolation import (
    ExtrapolationPlan,
    PoleCrossingError,
    PolePolynomials,
    extrapolate,
    gamma_coefficients,
    improved_extrapolate,
    nonuniform_first_order,
)
from .gaussian import (
    GaussianState,
    a_matrix,
    apply_interferometer,
    apply_loss,
    apply_uniform_loss,
    coherent_state,
    encode_graph,
    squeezed_vacuum_state,
    tmsv_state,
    vacuum_state,
)
from .hafnian import hafnian, loop_hafnian
from .probability import distribution, orbit_probability, pattern_probabilities, pattern_probability

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DiscreteDistribution",
    "ExtrapolationPlan",
    "GaussianState",
    "Orbit",
    "PoleCrossingError",
    "PolePolynomials",
    "Table",
    "a_matrix",
    "apply_T",
    "apply_interferometer",
    "apply_loss",
    "apply_uniform_loss",
    "cancel_loss",
    "cancellation_report",
    "coherent_state",
    "distribution",
    "encode_graph",
    "extrapolate",
    "form_aware_estimate_tmsv",
    "gamma_coefficients",
    "hafnian",
    "improved_extrapolate",
    "loop_hafnian",
    "nonuniform_first_order",
    "ominus",
    "oplus",
    "orbit_probability",
    "pattern_probabilities",
    "pattern_probability",
    "patterns_up_to",
    "run",
    "series_estimate",
    "squeezed_vacuum_state",
    "tmsv_state",
    "vacuum_state",
]
