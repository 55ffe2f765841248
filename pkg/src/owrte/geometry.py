"""
Propagating-mode geometry and quadrature over transverse wavevectors.

A mode with normalized transverse wavevector ``kappa`` (|kappa| < 1)
travels with longitudinal wavenumber ``k * beta(kappa)``.  Integrals over
modes use the measure ``k^d dkappa / (2 pi)^d``; an ``AngularGrid``
discretizes that measure on a disk (or interval) of radius ``kappa_max``.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigurationError, EvanescentModeError


def _as_kappa(kappa):
    kappa = np.asarray(kappa, dtype=float)
    if kappa.ndim == 0:
        kappa = kappa[None]
    return kappa


def beta(kappa):
    """sqrt(1 - |kappa|^2) for kappa with components on the last axis.

    A scalar is read as a one-dimensional wavevector.
    """
    kappa = _as_kappa(kappa)
    k2 = np.sum(kappa * kappa, axis=-1)
    if np.any(k2 >= 1.0):
        raise EvanescentModeError("|kappa| >= 1: evanescent modes are not part of the decomposition")
    return np.sqrt(1.0 - k2)


def grad_beta(kappa):
    """Gradient of beta, ``-kappa / beta(kappa)``; same shape as ``kappa``."""
    kappa = _as_kappa(kappa)
    return -kappa / beta(kappa)[..., None]


def group_velocity(kappa):
    """Transverse drift dx/dz = kappa / beta along a characteristic."""
    return -grad_beta(kappa)


def largest_cone_kappa(k_ell):
    """Largest |kappa| with k ell beta(kappa) > 1."""
    return float(np.sqrt(1.0 - 1.0 / k_ell ** 2))


@dataclass(frozen=True)
class TransportParams:
    """Physical configuration.

    Parameters
    ----------
    k : float
        Wavenumber (1/length).
    ell : float
        Correlation length.
    alpha : float
        Standard deviation of the fluctuations.
    d : int
        Transverse dimension, 1 or 2.
    kappa_max : float, optional
        Angular cutoff.  Defaults to 0.95 times the largest ``kappa`` with
        ``k ell beta(kappa) > 1``.
    """

    k: float
    ell: float
    alpha: float
    d: int = 1
    kappa_max: Optional[float] = None

    def __post_init__(self):
        if not self.k > 0:
            raise ConfigurationError("wavenumber k must be positive", "params.k")
        if not self.ell > 0:
            raise ConfigurationError("correlation length ell must be positive", "params.ell")
        if not self.alpha > 0:
            raise ConfigurationError("alpha must be positive", "params.alpha")
        if self.d not in (1, 2):
            raise ConfigurationError("transverse dimension d must be 1 or 2", "params.d")
        if not self.k * self.ell > 1:
            raise ConfigurationError(
                "k*ell must exceed 1 (forward-peaked regime, wavelength below correlation length)",
                "params.ell")
        if self.kappa_max is None:
            object.__setattr__(self, "kappa_max", 0.95 * largest_cone_kappa(self.k * self.ell))
        km = self.kappa_max
        if not 0 < km < 1:
            raise ConfigurationError(
                f"kappa_max={km} outside (0, 1): the angular cone must stay below 90 degrees "
                "(|kappa| < 1, no evanescent modes)", "params.kappa_max")
        if not self.k * self.ell * float(np.sqrt(1 - km * km)) > 1:
            raise ConfigurationError(
                f"cone cutoff violated: k*ell*beta(kappa_max) = "
                f"{self.k * self.ell * np.sqrt(1 - km * km):.4g} must exceed 1 so that "
                "backward and evanescent coupling is negligible", "params.kappa_max")

    @property
    def k_ell(self):
        return self.k * self.ell

    @property
    def wavelength(self):
        return 2 * np.pi / self.k

    @property
    def gamma(self):
        """Wavelength over correlation length, 2 pi / (k ell)."""
        return 2 * np.pi / self.k_ell

    @property
    def d_total(self):
        return self.d + 1

    def with_alpha(self, alpha):
        return TransportParams(self.k, self.ell, alpha, self.d, self.kappa_max)


@dataclass(frozen=True, eq=False)
class AngularGrid:
    """Quadrature nodes and weights for the measure k^d dkappa / (2 pi)^d.

    ``shape`` and ``spacing`` are set for uniform tensor (midpoint) grids,
    which the finite-difference diffusion solver requires.
    """

    d: int
    nodes: np.ndarray
    weights: np.ndarray
    kappa_max: float
    k: float
    rule: str = "gauss"
    shape: Optional[tuple] = None
    spacing: Optional[float] = None

    def __post_init__(self):
        for a in (self.nodes, self.weights):
            a.flags.writeable = False

    def __len__(self):
        return self.weights.size

    @property
    def n(self):
        return self.weights.size

    @property
    def radius(self):
        return np.linalg.norm(self.nodes, axis=-1)

    @property
    def measure(self):
        """Exact measure of the discretized region."""
        if self.rule == "midpoint":
            return (self.k / (2 * np.pi)) ** self.d * (2 * self.kappa_max) ** self.d
        vol = 2 * self.kappa_max if self.d == 1 else np.pi * self.kappa_max ** 2
        return (self.k / (2 * np.pi)) ** self.d * vol

    def integrate(self, values):
        """Quadrature of nodal values (leading axis over nodes)."""
        return np.tensordot(self.weights, np.asarray(values), axes=(0, 0))

    def mirror_index(self):
        """Index map i -> j with nodes[j] == -nodes[i]."""
        if self.rule == "midpoint" or self.d == 1:
            if self.d == 1 or self.shape is None:
                return np.arange(self.n)[::-1].copy()
            idx = np.arange(self.n).reshape(self.shape)
            return idx[::-1, ::-1].ravel()
        n_r, n_t = self.shape
        idx = np.arange(self.n).reshape(n_r, n_t)
        return np.roll(idx, -n_t // 2, axis=1).ravel()

    def same_as(self, other):
        return other is self or (
            self.d == other.d and self.n == other.n
            and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.weights, other.weights))


def _composite_gauss(a, b, n, panel_order):
    if n % panel_order:
        raise ConfigurationError(f"resolution {n} must be a multiple of panel order {panel_order}",
                                 "grid")
    x, w = np.polynomial.legendre.leggauss(panel_order)
    edges = np.linspace(a, b, n // panel_order + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * np.diff(edges)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def make_grid(params, resolution, *, panel_order=8, half_width=None, rule="gauss"):
    """Quadrature grid over {|kappa| <= kappa_max}.

    Parameters
    ----------
    params : TransportParams
    resolution : int or (int, int)
        ``n`` for d = 1, ``(n_r, n_theta)`` for d = 2 (``rule='gauss'``) or
        ``n`` per axis for d = 2 midpoint grids.
    panel_order : int
        Gauss-Legendre nodes per panel of the composite rule.
    half_width : float, optional
        Overrides ``params.kappa_max``.  The cone check is skipped, so the
        window may extend past |kappa| = 1 (paraxial kernels only).
    rule : {'gauss', 'midpoint'}
        Composite Gauss-Legendre (disk in polar form for d = 2) or a
        uniform cell-centred tensor grid on the square window.
    """
    d = params.d
    km = params.kappa_max if half_width is None else float(half_width)
    scale = (params.k / (2 * np.pi)) ** d
    if rule == "midpoint":
        n = int(np.atleast_1d(resolution)[0])
        if n < 8:
            raise ConfigurationError("need at least 8 points per dimension", "grid")
        h = 2 * km / n
        x = -km + h * (np.arange(n) + 0.5)
        x = 0.5 * (x - x[::-1])
        if d == 1:
            nodes = x[:, None]
            shape = (n,)
        else:
            gx, gy = np.meshgrid(x, x, indexing="ij")
            nodes = np.stack([gx.ravel(), gy.ravel()], axis=-1)
            shape = (n, n)
        weights = np.full(nodes.shape[0], scale * h ** d)
        return AngularGrid(d, nodes, weights, km, params.k, "midpoint", shape, h)
    if rule != "gauss":
        raise ConfigurationError(f"unknown grid rule {rule!r}", "grid.rule")
    if d == 1:
        n = int(np.atleast_1d(resolution)[0])
        if n < 8:
            raise ConfigurationError("need at least 8 points per dimension", "grid.n_kappa")
        x, w = _composite_gauss(-km, km, n, panel_order)
        # exact mirror symmetry
        x = 0.5 * (x - x[::-1])
        w = 0.5 * (w + w[::-1])
        return AngularGrid(1, x[:, None], scale * w, km, params.k, "gauss", (n,))
    try:
        n_r, n_t = (int(v) for v in resolution)
    except TypeError:
        raise ConfigurationError("d = 2 grids need (n_radial, n_angular)", "grid") from None
    if n_r < 8 or n_t < 8:
        raise ConfigurationError("need at least 8 points per dimension", "grid")
    if n_t % 2:
        raise ConfigurationError("n_angular must be even for kappa -> -kappa symmetry", "grid.n_angular")
    r, wr = _composite_gauss(0.0, km, n_r, panel_order)
    theta = 2 * np.pi * np.arange(n_t) / n_t
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    # antipodal nodes theta + pi get bitwise-negated coordinates
    half = n_t // 2
    cos_t[half:] = -cos_t[:half]
    sin_t[half:] = -sin_t[:half]
    nodes = np.stack([(r[:, None] * cos_t[None, :]).ravel(),
                      (r[:, None] * sin_t[None, :]).ravel()], axis=-1)
    weights = np.repeat(scale * wr * r * (2 * np.pi / n_t), n_t)
    return AngularGrid(2, nodes, weights, km, params.k, "gauss", (n_r, n_t))
