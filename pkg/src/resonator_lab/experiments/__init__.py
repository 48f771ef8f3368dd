"""One verifier per result: correlations, moments, gap oscillation and convolutions."""

from .gaps import (
    f_alpha,
    f_alpha_monotonicity,
    fejer_correlation_raw,
    gaps_bound,
    gaps_correlation,
    gaps_witness,
    random_profiles,
)
from .mconv import MconvInstance, mconv_correlation, mconv_G, mconv_hypothesis
from .moments import classify_L_zero, diagonal_enumeration, diagonal_moment, moment_g_sigma
from .report import Report
from .visible import (
    compute_M_sigma,
    correlation_I,
    hoelder_chain,
    moment_Estar,
    predicted_I,
    predicted_M,
)

__all__ = [
    "MconvInstance",
    "Report",
    "classify_L_zero",
    "compute_M_sigma",
    "correlation_I",
    "diagonal_enumeration",
    "diagonal_moment",
    "f_alpha",
    "f_alpha_monotonicity",
    "fejer_correlation_raw",
    "gaps_bound",
    "gaps_correlation",
    "gaps_witness",
    "hoelder_chain",
    "mconv_G",
    "mconv_correlation",
    "mconv_hypothesis",
    "moment_Estar",
    "moment_g_sigma",
    "predicted_I",
    "predicted_M",
    "random_profiles",
]
