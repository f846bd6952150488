"""Turing-fold bifurcations, their AB modulation systems and the simulations that test them."""

__version__ = "0.1.0"

from .absystem import CanonicalAB, busse_map, classify, plane_wave
from .bifurcation import TuringFoldReport, ab_coefficients, build_report, locate_turing_fold
from .grid import Grid1D
from .models import GeneralScalarModel, RDModel, ScalarSixthOrder, turing_fold_3

__all__ = [
    "__version__", "CanonicalAB", "Grid1D", "GeneralScalarModel", "RDModel", "ScalarSixthOrder",
    "TuringFoldReport", "ab_coefficients", "build_report", "busse_map", "classify", "locate_turing_fold",
    "plane_wave", "turing_fold_3",
]
