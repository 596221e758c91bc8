"""Detection probability of a single waveguide photon by a bare or cavity-embedded two-level atom."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    TWO_PI,
    BareParams,
    CavityParams,
    DegenerateDenominator,
    DetectionReport,
    GOptUndefined,
    MatchingReport,
    ScatterSolution,
    bare_amplitudes,
    bare_dp,
    cavity_amplitudes,
    cavity_dp,
    matching_report,
    optimal_g,
)

__all__ = [
    "TWO_PI",
    "BareParams",
    "CavityParams",
    "DegenerateDenominator",
    "DetectionReport",
    "GOptUndefined",
    "MatchingReport",
    "ScatterSolution",
    "bare_amplitudes",
    "bare_dp",
    "cavity_amplitudes",
    "cavity_dp",
    "matching_report",
    "optimal_g",
]
