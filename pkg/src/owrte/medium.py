"""
Statistical models of the random medium.

The fluctuation process is described by its autocovariance ``R(r)`` on
``R^(d+1)`` (dimensionless offsets, lengths in units of the correlation
length).  Each model evaluates

* the autocovariance ``R(r)``,
* the power spectral density ``R~(q) = int R(r) exp(-i q.r) dr``,
* the partial transform in the transverse variables only,
  ``R^(q_t, zeta) = int R(r_t, zeta) exp(-i q_t.r_t) dr_t``,
* for isotropic models in two dimensions, the radial transform
  ``R_breve(q) = int_0^inf s R_iso(s) J0(q s) ds``.

Array conventions: vector arguments carry their components on the last
axis; the last component of a full ``(d+1)``-vector is the range
(longitudinal) direction.
"""

import csv
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import integrate, interpolate, special

from .errors import ConfigurationError, OutOfRangeError, UnsupportedModelError

# relative level below which the covariance is treated as decayed
DECAY_RTOL = 1e-12


def _j0_radial_integral(func, q, s_max, epsrel=1e-12):
    """int_0^s_max func(s) J0(q s) ds, split at the zeros of J0."""
    if q * s_max <= 2.0:
        val, _ = integrate.quad(lambda s: func(s) * special.j0(q * s), 0.0, s_max,
                                epsabs=0.0, epsrel=epsrel, limit=200)
        return val
    n_zeros = int(q * s_max / np.pi) + 1
    breaks = special.jn_zeros(0, n_zeros) / q
    breaks = np.concatenate([[0.0], breaks[breaks < s_max], [s_max]])
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        val, _ = integrate.quad(lambda s: func(s) * special.j0(q * s), a, b,
                                epsabs=0.0, epsrel=epsrel, limit=100)
        total += val
    return total


@dataclass(frozen=True)
class MediumSpectrum:
    """Base class of the isotropic medium models.

    Subclasses implement ``radial``, ``psd`` and ``partial_psd``; the
    generic methods here use those three.
    """

    d_total: int = 2

    isotropic = True

    def __post_init__(self):
        if self.d_total not in (2, 3):
            raise ConfigurationError(f"d_total must be 2 or 3, got {self.d_total}")

    #: relative accuracy below which range quadratures are not refined
    quadrature_floor = 0.0

    @property
    def d(self):
        """Transverse dimension."""
        return self.d_total - 1

    def _check_vector(self, r, n, name="r"):
        r = np.asarray(r, dtype=float)
        if r.ndim == 0 or r.shape[-1] != n:
            raise ValueError(f"{name} must have {n} components on its last axis, got shape {r.shape}")
        return r

    def autocovariance(self, r):
        r = self._check_vector(r, self.d_total)
        return self.radial(np.linalg.norm(r, axis=-1))

    def radial(self, s):
        raise NotImplementedError

    def psd(self, q):
        raise NotImplementedError

    def partial_psd(self, q_t, zeta):
        raise NotImplementedError

    def partial_psd_outer(self, q_t, zeta):
        """partial_psd for every pair of rows of ``q_t`` (m, d) and entries of ``zeta`` (p,)."""
        return self.partial_psd(np.asarray(q_t)[:, None, :], np.asarray(zeta)[None, :])

    def radial_extent(self):
        """Radius beyond which ``R_iso < DECAY_RTOL * R_iso(0)``."""
        raise NotImplementedError

    def zeta_extent(self):
        """Range offset beyond which the partial transform is negligible."""
        return self.radial_extent()

    def line_integral_iso(self):
        """int_{-inf}^{inf} R_iso(|t|) dt."""
        raise NotImplementedError

    def line_integral(self, v):
        """int_{-inf}^{inf} R(t v) dt for a (d+1)-vector ``v``."""
        v = self._check_vector(v, self.d_total, "v")
        return self.line_integral_iso() / np.linalg.norm(v, axis=-1)

    def breve_iso(self, q):
        """Radial (order-zero Hankel) transform of the isotropic covariance."""
        if self.d_total != 2:
            raise UnsupportedModelError("breve_iso is defined for d_total = 2 media only")
        q = np.asarray(q, dtype=float)
        s_max = self.radial_extent()
        out = np.array([_j0_radial_integral(lambda s: s * self.radial(s), qq, s_max)
                        for qq in np.abs(q).ravel()])
        return out.reshape(q.shape)

    # transverse derivatives of R(r_t, zeta), used by the diffusion coefficients

    def transverse_hessian(self, r_t, zeta, h=1e-2):
        """d^2 R / dr_j dr_l at (r_t, zeta), shape (..., d, d).

        Fourth-order central differences of ``autocovariance``.
        """
        r_t = np.asarray(r_t, dtype=float)
        zeta = np.asarray(zeta, dtype=float)
        d = self.d
        eye = np.eye(d)
        stencil = [(-2, 1.0 / 12), (-1, -2.0 / 3), (1, 2.0 / 3), (2, -1.0 / 12)]

        def grad(j, point):
            acc = 0.0
            for m, c in stencil:
                p = point + m * h * eye[j]
                acc = acc + c * self.autocovariance(np.concatenate([p, zeta[..., None]], axis=-1))
            return acc / h

        out = np.empty(r_t.shape[:-1] + (d, d))
        for j in range(d):
            for l in range(d):
                acc = 0.0
                for m, c in stencil:
                    acc = acc + c * grad(j, r_t + m * h * eye[l])
                out[..., j, l] = acc / h
        return out

    def transverse_third(self, r_t, zeta, h=1e-2):
        """d^3 R / dr_j dr_l dr_m at (r_t, zeta), shape (..., d, d, d)."""
        r_t = np.asarray(r_t, dtype=float)
        d = self.d
        eye = np.eye(d)
        stencil = [(-2, 1.0 / 12), (-1, -2.0 / 3), (1, 2.0 / 3), (2, -1.0 / 12)]
        out = np.empty(r_t.shape[:-1] + (d, d, d))
        for m_ax in range(d):
            acc = 0.0
            for m, c in stencil:
                acc = acc + c * self.transverse_hessian(r_t + m * h * eye[m_ax], zeta, h=h)
            out[..., m_ax] = acc / h
        return out


@dataclass(frozen=True)
class GaussianIsotropic(MediumSpectrum):
    """R(r) = variance_scale * exp(-|r|^2 / 2)."""

    variance_scale: float = 1.0

    def __post_init__(self):
        super().__post_init__()
        if not self.variance_scale > 0:
            raise ConfigurationError("variance_scale must be positive")

    def radial(self, s):
        s = np.asarray(s, dtype=float)
        return self.variance_scale * np.exp(-0.5 * s * s)

    def psd(self, q):
        q = self._check_vector(q, self.d_total, "q")
        q2 = np.sum(q * q, axis=-1)
        return self.variance_scale * (2 * np.pi) ** (self.d_total / 2) * np.exp(-0.5 * q2)

    def partial_psd(self, q_t, zeta):
        q_t = self._check_vector(q_t, self.d, "q_t")
        zeta = np.asarray(zeta, dtype=float)
        q2 = np.sum(q_t * q_t, axis=-1)
        return (self.variance_scale * (2 * np.pi) ** (self.d / 2)
                * np.exp(-0.5 * q2) * np.exp(-0.5 * zeta * zeta))

    def radial_extent(self):
        return float(np.sqrt(-2.0 * np.log(DECAY_RTOL)))

    def line_integral_iso(self):
        return self.variance_scale * np.sqrt(2 * np.pi)

    def transverse_hessian(self, r_t, zeta, h=None):
        r_t = np.asarray(r_t, dtype=float)
        zeta = np.asarray(zeta, dtype=float)
        rr = np.concatenate([r_t, np.broadcast_to(zeta, r_t.shape[:-1])[..., None]], axis=-1)
        R = self.autocovariance(rr)
        outer = r_t[..., :, None] * r_t[..., None, :]
        return (outer - np.eye(self.d)) * R[..., None, None]

    def transverse_third(self, r_t, zeta, h=None):
        r_t = np.asarray(r_t, dtype=float)
        zeta = np.asarray(zeta, dtype=float)
        rr = np.concatenate([r_t, np.broadcast_to(zeta, r_t.shape[:-1])[..., None]], axis=-1)
        R = self.autocovariance(rr)
        eye = np.eye(self.d)
        x = r_t
        t = (eye[:, :, None] * x[..., None, None, :]
             + eye[None, :, :] * x[..., :, None, None]
             + eye[:, None, :] * x[..., None, :, None]
             - x[..., :, None, None] * x[..., None, :, None] * x[..., None, None, :])
        return t * R[..., None, None, None]


@dataclass(frozen=True)
class Lorentzian2D(MediumSpectrum):
    """Two-dimensional medium with R_breve(q) = r0 / (1 + q^2) for q <= q_cutoff.

    The real-space covariance is the order-zero Macdonald profile
    ``r0 K0(s)``, regularized at the origin by the ultraviolet cutoff.  It
    is available only through a numeric inverse Hankel transform.
    """

    r0: float = 1.0
    q_cutoff: float = 1e3
    d_total: int = 2

    def __post_init__(self):
        if self.d_total != 2:
            raise ConfigurationError("Lorentzian2D is a d_total = 2 model")
        if not self.r0 > 0:
            raise ConfigurationError("r0 must be positive")
        if not self.q_cutoff > 1:
            raise ConfigurationError("q_cutoff must exceed 1")

    def breve_iso(self, q):
        q = np.abs(np.asarray(q, dtype=float))
        return np.where(q <= self.q_cutoff, self.r0 / (1.0 + q * q), 0.0)

    def psd(self, q):
        q = self._check_vector(q, 2, "q")
        return 2 * np.pi * self.breve_iso(np.linalg.norm(q, axis=-1))

    def radial(self, s):
        s = np.asarray(s, dtype=float)
        qc = self.q_cutoff
        out = np.empty(s.size)
        for i, ss in enumerate(s.ravel()):
            if ss == 0.0:
                out[i] = 0.5 * np.log1p(qc * qc)
            else:
                out[i] = _j0_radial_integral(lambda q: q / (1.0 + q * q), ss, qc)
        return self.r0 * out.reshape(s.shape)

    def partial_psd(self, q_t, zeta):
        q_t = self._check_vector(q_t, 1, "q_t")[..., 0]
        zeta = np.abs(np.asarray(zeta, dtype=float))
        q_t, zeta = np.broadcast_arrays(q_t, zeta)
        a = np.sqrt(1.0 + q_t * q_t)
        full = np.pi * np.exp(-a * zeta) / a
        # remove |q_z| > Q with Q^2 = qc^2 - q_t^2, using 1/(a^2+q^2) ~ 1/q^2 there
        Q = np.sqrt(np.maximum(self.q_cutoff ** 2 - q_t * q_t, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            si, _ = special.sici(Q * zeta)
            tail = np.cos(Q * zeta) / Q - zeta * (0.5 * np.pi - si)
        tail = np.where(Q > 0, tail, 0.0)
        out = self.r0 * (full - 2.0 * tail)
        return np.where(Q > 0, out, 0.0)

    def radial_extent(self):
        return float(-np.log(DECAY_RTOL))

    def line_integral_iso(self):
        return 2.0 * self.r0 * np.arctan(self.q_cutoff)

    def transverse_hessian(self, r_t, zeta, h=None):
        raise UnsupportedModelError(
            "Lorentzian2D covariance is not twice differentiable at the origin; "
            "diffusion coefficients are undefined")

    transverse_third = transverse_hessian


@dataclass(frozen=True)
class TabulatedIsotropic(MediumSpectrum):
    """Isotropic covariance given by samples of R_iso(s), s strictly increasing from 0.

    The covariance is a cubic spline through the samples (zero slope at
    the origin) and is taken to vanish beyond the last sample.
    """

    # cubic-spline data are only piecewise smooth
    quadrature_floor = 1e-8

    s: tuple = field(default=(0.0, 1.0))
    values: tuple = field(default=(1.0, 0.0))

    def __post_init__(self):
        super().__post_init__()
        s = np.asarray(self.s, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if s.ndim != 1 or s.shape != v.shape or s.size < 4:
            raise ConfigurationError("tabulated covariance needs at least 4 (s, R) samples")
        if s[0] != 0.0 or np.any(np.diff(s) <= 0):
            raise ConfigurationError("tabulated radii must start at 0 and increase strictly")
        if not v[0] > 0:
            raise ConfigurationError("R_iso(0) must be positive")
        object.__setattr__(self, "s", tuple(s))
        object.__setattr__(self, "values", tuple(v))

    @classmethod
    def from_csv(cls, path, d_total=2):
        s, v = [], []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                try:
                    s.append(float(row[0]))
                    v.append(float(row[1]))
                except ValueError:
                    continue  # header line
        return cls(d_total=d_total, s=tuple(s), values=tuple(v))

    @cached_property
    def _spline(self):
        return interpolate.CubicSpline(np.asarray(self.s), np.asarray(self.values),
                                       bc_type=((1, 0.0), "natural"))

    @property
    def s_max(self):
        return self.s[-1]

    def radial(self, s):
        s = np.asarray(s, dtype=float)
        if np.any(s > self.s_max * (1 + 1e-12)) or np.any(s < 0):
            raise OutOfRangeError(f"radius outside tabulated range [0, {self.s_max}]")
        return self._spline(np.clip(s, 0.0, self.s_max))

    def _radial_or_zero(self, s):
        inside = s <= self.s_max
        return np.where(inside, self._spline(np.clip(s, 0.0, self.s_max)), 0.0)

    def radial_extent(self):
        return self.s_max

    def line_integral_iso(self):
        return 2.0 * float(self._spline.integrate(0.0, self.s_max))

    @cached_property
    def _gl(self):
        n = 8
        panels = 256
        x, w = np.polynomial.legendre.leggauss(n)
        edges = np.linspace(0.0, self.s_max, panels + 1)
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * np.diff(edges)
        nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        weights = (half[:, None] * w[None, :]).ravel()
        return nodes, weights

    def _radial_transform(self, q):
        """Full-space transform of the isotropic covariance at radii q (vectorized)."""
        nodes, weights = self._gl
        Rs = self._radial_or_zero(nodes)
        q = np.asarray(q, dtype=float)
        out = np.empty(q.size)
        flat = q.ravel()
        for start in range(0, flat.size, 256):
            qq = flat[start:start + 256, None]
            if self.d_total == 2:
                ker = 2 * np.pi * nodes * special.j0(qq * nodes)
            else:
                ker = 4 * np.pi * nodes ** 2 * np.sinc(qq * nodes / np.pi)
            out[start:start + 256] = ker @ (weights * Rs)
        return out.reshape(q.shape)

    @cached_property
    def _psd_table(self):
        # oscillation scale 2 pi / s_max, resolved with ~32 samples per period
        q_max = 200.0
        n = int(32 * q_max * self.s_max / (2 * np.pi)) + 1
        qs = np.linspace(0.0, q_max, n)
        vals = self._radial_transform(qs)
        peak = vals[0]
        if vals.min() < -1e-8 * abs(peak):
            raise ConfigurationError(
                "tabulated covariance has negative spectral density: not an autocovariance")
        return qs, interpolate.CubicSpline(qs, vals), q_max

    def psd(self, q):
        q = self._check_vector(q, self.d_total, "q")
        qn = np.linalg.norm(q, axis=-1)
        qs, spl, q_max = self._psd_table
        out = np.where(qn <= q_max, spl(np.minimum(qn, q_max)), 0.0)
        far = qn > q_max
        if np.any(far):
            out = np.array(out, dtype=float)
            out[far] = self._radial_transform(qn[far])
        return np.maximum(out, 0.0)

    def partial_psd(self, q_t, zeta):
        q_t = self._check_vector(q_t, self.d, "q_t")
        qn = np.linalg.norm(q_t, axis=-1)
        zeta = np.asarray(zeta, dtype=float)
        qn, zeta = np.broadcast_arrays(qn, zeta)
        nodes, weights = self._gl
        out = np.empty(qn.size)
        qf, zf = qn.ravel(), zeta.ravel()
        for start in range(0, qf.size, 256):
            qq = qf[start:start + 256, None]
            zz = zf[start:start + 256, None]
            R = self._radial_or_zero(np.sqrt(nodes ** 2 + zz ** 2))
            if self.d == 1:
                ker = 2.0 * np.cos(qq * nodes)
            else:
                ker = 2 * np.pi * nodes * special.j0(qq * nodes)
            out[start:start + 256] = (ker * R) @ weights
        return out.reshape(qn.shape)

    def partial_psd_outer(self, q_t, zeta):
        # the covariance samples depend on zeta only, so all q share one matrix product
        q_t = self._check_vector(q_t, self.d, "q_t")
        qn = np.linalg.norm(q_t, axis=-1)
        zeta = np.asarray(zeta, dtype=float)
        nodes, weights = self._gl
        R = self._radial_or_zero(np.sqrt(nodes[None, :] ** 2 + zeta[:, None] ** 2)) * weights
        if self.d == 1:
            ker = 2.0 * np.cos(qn[:, None] * nodes)
        else:
            ker = 2 * np.pi * nodes * special.j0(qn[:, None] * nodes)
        return ker @ R.T


def autocovariance(spectrum, r):
    """R(r) for offsets ``r`` of shape (..., d+1)."""
    return spectrum.autocovariance(r)


def psd(spectrum, q):
    """Power spectral density at wavevectors ``q`` of shape (..., d+1)."""
    return spectrum.psd(q)


def partial_psd(spectrum, q_t, zeta):
    """Transverse-only Fourier transform at (q_t, zeta)."""
    return spectrum.partial_psd(q_t, zeta)


def breve_iso(spectrum, q):
    """Radial transform int_0^inf s R_iso(s) J0(q s) ds of a d_total = 2 isotropic model."""
    if not getattr(spectrum, "isotropic", False):
        raise UnsupportedModelError("breve_iso requires an isotropic model")
    return spectrum.breve_iso(q)


def spectrum_from_config(block, d_total):
    """Build a model from a config mapping ``{type: ..., params...}``."""
    kind = block.get("type")
    if kind == "gaussian":
        return GaussianIsotropic(d_total=d_total, variance_scale=float(block.get("variance_scale", 1.0)))
    if kind == "lorentzian2d":
        if d_total != 2:
            raise ConfigurationError("lorentzian2d requires a one-dimensional transverse space", "medium.type")
        return Lorentzian2D(r0=float(block.get("r0", 1.0)), q_cutoff=float(block.get("q_cutoff", 1e3)))
    if kind == "tabulated":
        if "path" not in block:
            raise ConfigurationError("tabulated medium needs a csv path", "medium.path")
        return TabulatedIsotropic.from_csv(block["path"], d_total=d_total)
    raise ConfigurationError(f"unknown medium type {kind!r}", "medium.type")
