"""Cyclotomic polynomials of large height: exact coefficients, circle maxima
of the associated sine products, and the residue-class tower construction."""

__version__ = "0.1.0"

from .circle import CircleProfile, circle_profile, compute_D, compute_L, eval_F
from .construct import HFunction, PrimeTower, build_tower, c_constant, scan_ratios
from .cyclo_poly import CycloPoly, height_report, m_bound, phi_coefficients
from .errors import CycloError
from .numtheory import SquarefreeOdd, parse_squarefree_odd

__all__ = [
    "CircleProfile",
    "CycloError",
    "CycloPoly",
    "HFunction",
    "PrimeTower",
    "SquarefreeOdd",
    "build_tower",
    "c_constant",
    "circle_profile",
    "compute_D",
    "compute_L",
    "eval_F",
    "height_report",
    "m_bound",
    "parse_squarefree_odd",
    "phi_coefficients",
    "scan_ratios",
]
