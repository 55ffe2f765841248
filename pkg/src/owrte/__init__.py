"""One-way radiative transfer for forward-scattered waves in random media."""

from .errors import (ConfigurationError, EvanescentModeError, GridMismatchError,
                     InstabilityError, OutOfRangeError, OWRTEError, QuadratureError,
                     StepSizeError, UnsupportedModelError)
from .geometry import AngularGrid, TransportParams, beta, grad_beta, make_grid
from .medium import GaussianIsotropic, Lorentzian2D, TabulatedIsotropic
from .xsection import (CrossSectionTable, build_xsection_table, diff_xsection,
                       mean_free_path, mfp_highfreq, q_exponent)

__version__ = "0.1.0"

__all__ = [
    "AngularGrid",
    "ConfigurationError",
    "CrossSectionTable",
    "EvanescentModeError",
    "GaussianIsotropic",
    "GridMismatchError",
    "InstabilityError",
    "Lorentzian2D",
    "OWRTEError",
    "OutOfRangeError",
    "QuadratureError",
    "StepSizeError",
    "TabulatedIsotropic",
    "TransportParams",
    "UnsupportedModelError",
    "beta",
    "build_xsection_table",
    "diff_xsection",
    "grad_beta",
    "make_grid",
    "mean_free_path",
    "mfp_highfreq",
    "q_exponent",
]
