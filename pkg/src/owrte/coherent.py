"""Source amplitudes, the mean (coherent) field and the homogeneous reference field."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigurationError
from .geometry import beta


@dataclass(frozen=True)
class SourceModel:
    """Spectral profile of the source.

    Parameters
    ----------
    kind : {'gaussian', 'tabulated'}
    kappa_width : float
        Gaussian width of |a_o|^2 beta in kappa (``exp(-|kappa|^2 / (2 w^2))``).
    samples : (kappa, amplitude) pair of sequences, optional
        Tabulated radial profile of the source transform (linear interpolation, zero outside).
    normalization : float
        Total input flux sum_i w_i |a_o(kappa_i)|^2.
    """

    kind: str = "gaussian"
    kappa_width: float = 0.05
    samples: Optional[tuple] = None
    normalization: float = 1.0

    def profile(self, kappa):
        r = np.linalg.norm(np.atleast_2d(kappa), axis=-1)
        if self.kind == "gaussian":
            return np.exp(-r ** 2 / (4 * self.kappa_width ** 2))
        if self.kind == "tabulated":
            s, v = (np.asarray(a, dtype=float) for a in self.samples)
            return np.interp(r, s, v, right=0.0)
        raise ConfigurationError(f"unknown source kind {self.kind!r}", "source.kind")

    def validate(self, params):
        if not self.normalization > 0:
            raise ConfigurationError("normalization must be positive", "source.normalization")
        km = params.kappa_max
        if self.kind == "gaussian":
            if not self.kappa_width > 0:
                raise ConfigurationError("kappa_width must be positive", "source.kappa_width")
            if not 4 * self.kappa_width < km:
                raise ConfigurationError(
                    f"source support 4*kappa_width={4 * self.kappa_width:g} must lie inside the "
                    f"cone kappa_max={km:g}", "source.kappa_width")
        elif self.kind == "tabulated":
            if self.samples is None:
                raise ConfigurationError("tabulated source needs samples", "source.samples")
            s, v = (np.asarray(a, dtype=float) for a in self.samples)
            if s.ndim != 1 or s.shape != v.shape or s.size < 2 or np.any(np.diff(s) <= 0) or s[0] < 0:
                raise ConfigurationError("tabulated source needs increasing radii from >= 0",
                                         "source.samples")
            outside = s > 0.9 * km
            if np.any(np.abs(v[outside]) > 1e-8 * np.abs(v).max()):
                raise ConfigurationError("tabulated source amplitude extends past 0.9*kappa_max",
                                         "source.samples")
        else:
            raise ConfigurationError(f"unknown source kind {self.kind!r}", "source.kind")


def source_amplitudes(source, params, grid):
    """Forward mode amplitudes a_o(kappa_i) = i C profile(kappa_i) / (2 k beta^(1/2)).

    ``C`` is fixed by ``sum_i w_i |a_o|^2 = source.normalization``.
    """
    source.validate(params)
    b = beta(grid.nodes)
    raw = 1j * source.profile(grid.nodes) / (2 * params.k * np.sqrt(b))
    flux = float(grid.weights @ np.abs(raw) ** 2)
    if not flux > 0:
        raise ConfigurationError("source has no energy on the grid", "source")
    return raw * np.sqrt(source.normalization / flux)


def backward_amplitudes(source, params, grid):
    """Backward amplitudes b_o; equal to a_o for a point-in-range source (unused downstream)."""
    return source_amplitudes(source, params, grid)


def initial_intensity(source, params, grid):
    """I(kappa, 0) = |a_o(kappa)|^2 as an IntensityField."""
    from .transport.fields import IntensityField
    return IntensityField(grid, np.abs(source_amplitudes(source, params, grid)) ** 2, 0.0)


def mean_amplitude(a0, table, z):
    """Coherent amplitude exp(Q(kappa) z) a_o(kappa)."""
    if z < 0:
        raise ValueError("z must be nonnegative")
    a0 = np.asarray(a0, dtype=complex)
    if z == 0:
        return a0.copy()
    return np.exp(table.q_exponent * z) * a0


def homogeneous_field(a0, params, grid, x, z):
    """Plane-wave synthesis sum_i w_i a_o / beta^(1/2) exp(i k (kappa.x + beta z)).

    ``x`` has shape (..., d); returns a complex array of shape (...).
    """
    if not z > 0:
        raise ValueError("homogeneous_field is defined for z > 0 (forward region)")
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x[None]
    b = beta(grid.nodes)
    coef = grid.weights * np.asarray(a0, dtype=complex) / np.sqrt(b)
    phase = params.k * (x @ grid.nodes.T + b * z)
    return np.exp(1j * phase) @ coef
