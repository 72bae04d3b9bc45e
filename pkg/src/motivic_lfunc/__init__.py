"""High-precision evaluation of motivic L-functions."""

from .cli import load_descriptor, main
from .errors import LFunctionError
from .hybrid import build_hybrid
from .lseries import UNKNOWN, LFunctionDescriptor, feq_residual, l_value, lstar_deriv, theta
from .mellin_small import build_shape
from .numerics import Precision, gamma
from .series import TruncatedLaurentSeries
from .solver import conductor_search, solve_bad_prime, solve_sign_residues

__all__ = [
    "Precision", "gamma", "TruncatedLaurentSeries", "build_shape", "build_hybrid",
    "LFunctionDescriptor", "UNKNOWN", "theta", "feq_residual", "lstar_deriv", "l_value",
    "solve_sign_residues", "solve_bad_prime", "conductor_search", "load_descriptor", "main",
    "LFunctionError",
]
