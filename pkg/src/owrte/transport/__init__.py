"""Deterministic transport solvers."""

from .angular import collision_apply, solve_angular
from .diffusion import (constant_coeffs, diffusion_coeffs, diffusion_field,
                        solve_kappa_diffusion)
from .fields import DiffusionCoeffs, IntensityField, WignerField
from .paraxial import (SupportLeakageWarning, boundary_mass_fraction, paraxial_table,
                       paraxial_xsection, solve_paraxial)
from .wigner import WrapAroundWarning, point_source_wigner, solve_wigner, wigner_nonnegativity

__all__ = [
    "DiffusionCoeffs",
    "IntensityField",
    "SupportLeakageWarning",
    "WignerField",
    "WrapAroundWarning",
    "boundary_mass_fraction",
    "collision_apply",
    "constant_coeffs",
    "diffusion_coeffs",
    "diffusion_field",
    "paraxial_table",
    "paraxial_xsection",
    "point_source_wigner",
    "solve_angular",
    "solve_kappa_diffusion",
    "solve_paraxial",
    "solve_wigner",
    "wigner_nonnegativity",
]
