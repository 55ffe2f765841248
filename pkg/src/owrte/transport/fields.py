"""Field containers shared by the transport solvers."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import GridMismatchError


@dataclass(frozen=True, eq=False)
class IntensityField:
    """Direction-resolved mean intensity I(kappa_i) at range ``z``.

    ``stderr`` is set for Monte Carlo estimates.
    """

    grid: object
    values: np.ndarray
    z: float = 0.0
    stderr: Optional[np.ndarray] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise GridMismatchError(f"values shape {v.shape} does not match grid with {self.grid.n} nodes")
        object.__setattr__(self, "values", v)

    @property
    def total(self):
        return float(self.grid.weights @ self.values)

    def mean(self):
        """Intensity-weighted mean wavevector, shape (d,)."""
        return self.grid.integrate(self.values[:, None] * self.grid.nodes) / self.total

    def covariance(self):
        """Intensity-weighted covariance of kappa, shape (d, d)."""
        c = self.grid.nodes - self.mean()
        return self.grid.integrate(self.values[:, None, None] * c[:, :, None] * c[:, None, :]) / self.total

    def variance(self):
        """Trace of the kappa covariance."""
        return float(np.trace(self.covariance()))

    def l1_distance(self, other):
        if not self.grid.same_as(other.grid):
            raise GridMismatchError("fields live on different grids")
        return float(self.grid.weights @ np.abs(self.values - other.values))

    def with_values(self, values, z):
        return IntensityField(self.grid, values, z)

    @classmethod
    def uniform(cls, grid, level=1.0, z=0.0):
        return cls(grid, np.full(grid.n, float(level)), z)

    @classmethod
    def gaussian_beam(cls, grid, width, center=None, total=1.0, z=0.0):
        """Gaussian profile exp(-|kappa - c|^2 / (2 width^2)) normalized to ``total``."""
        c = np.zeros(grid.d) if center is None else np.asarray(center, dtype=float)
        r2 = np.sum((grid.nodes - c) ** 2, axis=-1)
        v = np.exp(-0.5 * r2 / width ** 2)
        return cls(grid, total * v / (grid.weights @ v), z)

    @classmethod
    def single_mode(cls, grid, index, total=1.0, z=0.0):
        v = np.zeros(grid.n)
        v[index] = total / grid.weights[index]
        return cls(grid, v, z)


@dataclass(frozen=True, eq=False)
class WignerField:
    """Phase-space energy density W(kappa_i, x_j) on a periodic transverse box.

    ``values`` has shape ``(n_kappa,) + n_x`` with ``n_x`` of length ``d``.
    """

    grid: object
    x_domain: tuple
    values: np.ndarray
    z: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        dom = tuple(float(L) for L in np.atleast_1d(self.x_domain))
        if len(dom) != self.grid.d or v.ndim != 1 + self.grid.d or v.shape[0] != self.grid.n:
            raise GridMismatchError(f"values shape {v.shape} inconsistent with grid and x_domain")
        object.__setattr__(self, "x_domain", dom)
        object.__setattr__(self, "values", v)

    @property
    def n_x(self):
        return self.values.shape[1:]

    @property
    def cell_volume(self):
        return float(np.prod([L / n for L, n in zip(self.x_domain, self.n_x)]))

    @property
    def x_nodes(self):
        """Coordinates per axis, cell-centred on [-L/2, L/2)."""
        return [L * (np.arange(n) / n - 0.5) for L, n in zip(self.x_domain, self.n_x)]

    @property
    def total(self):
        return float(self.grid.weights @ self.values.reshape(self.grid.n, -1).sum(axis=1)) * self.cell_volume

    def marginal(self):
        """x-integrated intensity as an IntensityField."""
        v = self.values.reshape(self.grid.n, -1).sum(axis=1) * self.cell_volume
        return IntensityField(self.grid, v, self.z)

    @classmethod
    def from_profile(cls, intensity, x_domain, n_x, profile):
        """W(kappa, x) = I(kappa) * profile(x) with ``profile`` normalized to unit integral."""
        dom = tuple(float(L) for L in np.atleast_1d(x_domain))
        n_x = tuple(int(n) for n in np.atleast_1d(n_x))
        axes = [L * (np.arange(n) / n - 0.5) for L, n in zip(dom, n_x)]
        mesh = np.meshgrid(*axes, indexing="ij")
        p = np.asarray(profile(*mesh), dtype=float)
        p = p / (p.sum() * np.prod([L / n for L, n in zip(dom, n_x)]))
        vals = intensity.values.reshape((-1,) + (1,) * len(n_x)) * p[None]
        return cls(intensity.grid, dom, vals, intensity.z)


@dataclass(frozen=True)
class DiffusionCoeffs:
    """Diffusion tensor A (d, d) and drift B (d,) at ``kappa``; also stacks of them."""

    a_matrix: np.ndarray
    b_vector: np.ndarray
    kappa: np.ndarray
