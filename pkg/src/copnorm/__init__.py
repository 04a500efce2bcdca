"""Norms of composition operators with linear fractional symbols on H^2.

Modules:
    moebius    linear fractional maps, classification, normal forms
    specialfn  gamma function and the Gauss hypergeometric function
    normcalc   norms, essential norms and operator-theoretic flags
    oracle     finite-section and direct-series cross-checks
    cli        command-line entry point
"""

from .errors import CopnormError
from .moebius import MapClass, MoebiusMap, QdForm, classify, theta_family
from .normcalc import CohypoStatus, NormReport, norm_sq, solve_norm_equation

__all__ = [
    "CohypoStatus",
    "CopnormError",
    "MapClass",
    "MoebiusMap",
    "NormReport",
    "QdForm",
    "classify",
    "norm_sq",
    "solve_norm_equation",
    "theta_family",
]

__version__ = "0.1.0"
