"""Spatially resolved transport: exact advection along characteristics plus collisions."""

import warnings

import numpy as np

from ..errors import GridMismatchError
from ..geometry import group_velocity
from .angular import _check_targets
from .fields import WignerField


class WrapAroundWarning(RuntimeWarning):
    """Energy reached the edge of the periodic transverse box."""


def _advect(values, grid, x_domain, dz):
    """Shift each kappa slice by (kappa / beta) dz with a spectral phase ramp."""
    d = grid.d
    v = group_velocity(grid.nodes)
    axes = tuple(range(1, 1 + d))
    n_x = values.shape[1:]
    ft = np.fft.rfftn(values, axes=axes)
    phase = np.zeros(ft.shape, dtype=float)
    for a, (L, n) in enumerate(zip(x_domain, n_x)):
        if a == d - 1:
            xi = 2 * np.pi * np.fft.rfftfreq(n, d=L / n)
        else:
            xi = 2 * np.pi * np.fft.fftfreq(n, d=L / n)
        shape = [1] * (1 + d)
        shape[0] = grid.n
        vel = v[:, a].reshape(shape)
        shape = [1] * (1 + d)
        shape[1 + a] = xi.size
        phase = phase + vel * xi.reshape(shape)
    ft *= np.exp(-1j * phase * dz)
    return np.fft.irfftn(ft, s=n_x, axes=axes)


def _edge_fraction(field, frac=0.05):
    mass = np.abs(field.values).sum(axis=0)
    total = mass.sum()
    if total == 0:
        return 0.0
    edge = np.zeros(mass.shape, dtype=bool)
    for a, n in enumerate(mass.shape):
        m = max(1, int(frac * n))
        sl = [slice(None)] * mass.ndim
        sl[a] = slice(0, m)
        edge[tuple(sl)] = True
        sl[a] = slice(n - m, n)
        edge[tuple(sl)] = True
    return float(mass[edge].sum() / total)


def solve_wigner(table, w0, z_targets, steps_per_mfp=50, *, wrap_tol=1e-6):
    """Strang split-step solve of the phase-space transport equation.

    Each step is half an advection, one RK4 collision step applied at every
    x, and another half advection.  The step is ``min S / steps_per_mfp``
    (the full range when the medium does not scatter).

    Parameters
    ----------
    table : CrossSectionTable
    w0 : WignerField
    z_targets : sequence of float
    steps_per_mfp : int
    wrap_tol : float
        A ``WrapAroundWarning`` is issued when the fraction of energy in the
        outer 5% of the box exceeds this value.
    """
    if not table.grid.same_as(w0.grid):
        raise GridMismatchError("Wigner field and cross-section table use different grids")
    if int(steps_per_mfp) < 1:
        raise ValueError("steps_per_mfp must be a positive integer")
    z = _check_targets(z_targets, w0.z)
    L = table.collision_matrix
    n = table.n
    finite = np.isfinite(table.mfp)
    h_max = float(table.mfp[finite].min()) / int(steps_per_mfp) if finite.any() else np.inf
    x_domain = w0.x_domain
    y = w0.values.copy()
    zc = w0.z
    out = []

    def coll(u):
        return (L @ u.reshape(n, -1)).reshape(u.shape)

    for zt in z:
        span = zt - zc
        if span > 0:
            m = 1 if not np.isfinite(h_max) else int(np.ceil(span / h_max))
            dz = span / m
            y = _advect(y, w0.grid, x_domain, 0.5 * dz)
            for s in range(m):
                if np.isfinite(h_max):
                    k1 = coll(y)
                    k2 = coll(y + 0.5 * dz * k1)
                    k3 = coll(y + 0.5 * dz * k2)
                    k4 = coll(y + dz * k3)
                    y = y + dz / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
                y = _advect(y, w0.grid, x_domain, dz if s < m - 1 else 0.5 * dz)
        zc = zt
        field = WignerField(w0.grid, x_domain, y.copy(), float(zt))
        if _edge_fraction(field) > wrap_tol:
            warnings.warn(f"energy near the periodic box edge at z={zt:g}; enlarge x_domain",
                          WrapAroundWarning, stacklevel=2)
        out.append(field)
    return out


def wigner_nonnegativity(field):
    """Most negative value relative to the maximum (0 for a nonnegative field)."""
    vmax = np.abs(field.values).max()
    return float(min(field.values.min(), 0.0) / vmax) if vmax > 0 else 0.0


def point_source_wigner(intensity, z):
    """Singular phase-space density of a point source: (kappa_i, x_i, weight_i).

    Energy in mode ``kappa`` sits on the characteristic ``x = kappa z / beta``.
    """
    loc = group_velocity(intensity.grid.nodes) * float(z)
    return [(intensity.grid.nodes[i].copy(), loc[i].copy(), float(intensity.values[i]))
            for i in range(intensity.grid.n)]
