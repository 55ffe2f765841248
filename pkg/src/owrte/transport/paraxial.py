"""Paraxial (narrow-cone) transport kernel."""

import warnings

import numpy as np

from ..xsection import CrossSectionTable
from .angular import solve_angular


class SupportLeakageWarning(RuntimeWarning):
    """Intensity reached the edge of the truncated kappa window."""


def paraxial_xsection(params, spectrum, kappa, kappa_prime):
    """Paraxial kernel (k^2 ell^(d+1) alpha^2 / 4) R~(k ell (kappa - kappa'), 0).

    The beta factors are dropped and the range component of the spectral
    argument is pinned to zero, so the kernel depends on kappa - kappa' only.
    """
    kappa = np.asarray(kappa, dtype=float)
    kappa_prime = np.asarray(kappa_prime, dtype=float)
    if kappa.ndim == 0:
        kappa = kappa[None]
    if kappa_prime.ndim == 0:
        kappa_prime = kappa_prime[None]
    dk = params.k_ell * (kappa - kappa_prime)
    q = np.concatenate([dk, np.zeros(dk.shape[:-1] + (1,))], axis=-1)
    pref = params.k ** 2 * params.ell ** (params.d + 1) * params.alpha ** 2 / 4.0
    return pref * spectrum.psd(q)


def paraxial_table(params, spectrum, grid):
    """Cross-section table of the paraxial kernel on a (possibly uncapped) window grid."""
    K = paraxial_xsection(params, spectrum, grid.nodes[:, None, :], grid.nodes[None, :, :])
    return CrossSectionTable.from_kernel(grid, K, params=params, kind="paraxial")


def boundary_mass_fraction(field, rim=0.9):
    """Fraction of the total intensity outside ``rim * kappa_max`` of the window."""
    g = field.grid
    if g.rule == "midpoint":
        outer = np.max(np.abs(g.nodes), axis=-1) > rim * g.kappa_max
    else:
        outer = g.radius > rim * g.kappa_max
    tot = field.total
    return float(g.weights[outer] @ field.values[outer]) / tot if tot else 0.0


def solve_paraxial(params, spectrum, i0, z_targets, grid=None, *, method="rk4",
                   leak_tol=1e-6, table=None):
    """Solve the paraxial transport equation on a window grid.

    Same integrator as the full solver; a ``SupportLeakageWarning`` is
    issued when more than ``leak_tol`` of the intensity lies in the outer
    10% of the window.
    """
    grid = i0.grid if grid is None else grid
    if table is None:
        table = paraxial_table(params, spectrum, grid)
    out = solve_angular(table, i0, z_targets, method=method)
    for f in out:
        frac = boundary_mass_fraction(f)
        if frac > leak_tol:
            warnings.warn(f"{frac:.2e} of the intensity at the kappa window edge at z={f.z:g}",
                          SupportLeakageWarning, stacklevel=2)
    return out
