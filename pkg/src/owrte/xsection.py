"""
Scattering cross sections, mean free paths and the complex mean-field exponent.

All kernels use the mode measure ``k^d dkappa / (2 pi)^d``; contracting
the differential cross section with grid weights gives rates in 1/length.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from .errors import ConfigurationError, QuadratureError, UnsupportedModelError
from .geometry import beta
from .medium import Lorentzian2D

_GL_ORDER = 8
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_ORDER)


def _prefactor(params):
    return params.k ** 2 * params.alpha ** 2 * params.ell ** (params.d + 1) / 4.0


def _mismatch(params, kappa, kappa_prime):
    """Scaled wavevector mismatch k ell (kappa - kappa', beta - beta') and the betas."""
    kappa = np.asarray(kappa, dtype=float)
    kappa_prime = np.asarray(kappa_prime, dtype=float)
    b, bp = beta(kappa), beta(kappa_prime)
    kl = params.k_ell
    dk = kl * (kappa - kappa_prime)
    db = kl * (b - bp)
    return dk, db, b, bp


def diff_xsection(params, spectrum, kappa, kappa_prime):
    """Differential scattering cross section Q(kappa, kappa').

    ``k^2 alpha^2 ell^(d+1) / (4 beta beta') * R~(k ell (kappa - kappa'), k ell (beta - beta'))``.
    Arguments broadcast over leading axes; components on the last axis.
    """
    dk, db, b, bp = _mismatch(params, kappa, kappa_prime)
    q = np.concatenate([dk, db[..., None]], axis=-1)
    return _prefactor(params) * spectrum.psd(q) / (b * bp)


def _kernel_matrix(params, spectrum, nodes_a, nodes_b):
    return diff_xsection(params, spectrum, nodes_a[:, None, :], nodes_b[None, :, :])


def sine_transform(spectrum, q_t, omega, rtol=1e-10):
    """int_0^inf R^(q_t, zeta) sin(omega zeta) dzeta, vectorized over matching shapes."""
    return range_transform(spectrum, q_t, omega, "sin", rtol)


def range_transform(spectrum, q_t, omega, kind="sin", rtol=1e-10):
    """One-sided range integral of the partial spectrum against sin or cos.

    ``int_0^inf R^(q_t, zeta) trig(omega zeta) dzeta`` by composite
    Gauss-Legendre panels on [0, zeta_extent], no wider than a quarter
    oscillation period.  The estimate is compared against the same rule on
    halved panels; ``QuadratureError`` is raised when the difference
    exceeds ``rtol`` relative to ``max(|value|, 1e-8 * peak)``.
    """
    val, err, peak = _range_transform_err(spectrum, q_t, omega, kind)
    scale = np.maximum(np.abs(val), 1e-8 * peak)
    worst = float(np.max(err / scale)) if err.size else 0.0
    if worst > rtol:
        raise QuadratureError("zeta quadrature of the partial spectrum did not converge", worst)
    return val


def _range_transform_err(spectrum, q_t, omega, kind):
    """(values, absolute error estimates, peak of the partial spectrum)."""
    q_t = np.asarray(q_t, dtype=float)
    omega = np.asarray(omega, dtype=float)
    shape = omega.shape
    peak = float(np.max(np.abs(spectrum.partial_psd(np.zeros((1, q_t.shape[-1])), [0.0]))))
    if isinstance(spectrum, Lorentzian2D):
        if kind == "sin":
            val = _lorentzian_sine_transform(spectrum, q_t, omega)
        else:
            val = 0.5 * spectrum.psd(np.concatenate([q_t, omega[..., None]], axis=-1))
        return val, np.zeros(shape), peak
    trig = {"sin": np.sin, "cos": np.cos}[kind]
    q_flat = q_t.reshape(-1, q_t.shape[-1])
    w_flat = omega.ravel()
    out = np.zeros(w_flat.size)
    err = np.zeros(w_flat.size)
    if w_flat.size == 0:
        return out.reshape(shape), err.reshape(shape), peak
    z_max = spectrum.zeta_extent()
    env = spectrum.partial_psd(q_flat, np.zeros(w_flat.size))
    live = np.abs(env) > 1e-17 * peak
    if kind == "sin":
        live &= w_flat != 0.0
    idx = np.flatnonzero(live)
    for start in range(0, idx.size, 2048):
        sel = idx[start:start + 2048]
        wmax = float(np.max(np.abs(w_flat[sel])))
        width = z_max / 16.0 if wmax == 0 else min(z_max / 16.0, 0.5 * np.pi / wmax)
        n_pan = int(np.ceil(z_max / width))
        coarse = _panel_sum(spectrum, q_flat[sel], w_flat[sel], z_max, n_pan, trig)
        fine = _panel_sum(spectrum, q_flat[sel], w_flat[sel], z_max, 2 * n_pan, trig)
        out[sel] = fine
        err[sel] = np.abs(fine - coarse)
    return out.reshape(shape), err.reshape(shape), peak


def _panel_sum(spectrum, q_t, omega, z_max, n_pan, trig):
    edges = np.linspace(0.0, z_max, n_pan + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1] - edges[0])
    zeta = (mid[:, None] + half * _GL_X[None, :]).ravel()
    wz = np.tile(half * _GL_W, n_pan)
    acc = np.zeros(omega.size)
    # chunk over zeta to bound memory
    for s in range(0, zeta.size, 256):
        zz = zeta[s:s + 256]
        R = spectrum.partial_psd_outer(q_t, zz)
        acc += (R * trig(omega[:, None] * zz[None, :])) @ wz[s:s + 256]
    return acc


def _lorentzian_sine_transform(spectrum, q_t, omega):
    # principal-value closed form of the cutoff Lorentzian: the cutoff makes the
    # zeta-integrand oscillate at q_cutoff, which panel quadrature cannot follow
    q_t = np.asarray(q_t, dtype=float)[..., 0]
    omega = np.asarray(omega, dtype=float)
    a2 = 1.0 + q_t * q_t
    a = np.sqrt(a2)
    Q = np.sqrt(np.maximum(spectrum.q_cutoff ** 2 - q_t * q_t, 0.0))
    w = np.abs(omega)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_term = np.where(w > 0, np.log(np.abs((Q + w) / (Q - w))) / np.where(w > 0, w, 1.0), 0.0)
        val = w / (a2 + w * w) * (2.0 * np.arctan(Q / a) / a + log_term)
    val = np.where(Q > 0, val, 0.0)
    return spectrum.r0 * np.sign(omega) * val


def q_exponent(params, spectrum, kappa, grid, imag=True, rtol=1e-10):
    """Complex exponent Q(kappa) of the mean mode amplitude.

    The real part is ``-1/2 sum_j w_j Q(kappa, kappa_j)`` (power spectral
    density route); the imaginary part uses the one-sided range integral of
    the partial spectrum against ``sin``.  ``kappa`` may be a single
    wavevector or an array (m, d); returns a complex scalar or (m,) array.
    """
    kappa = np.asarray(kappa, dtype=float)
    single = kappa.ndim <= 1
    kap = np.atleast_2d(kappa.reshape(-1, params.d) if kappa.ndim <= 1 else kappa)
    K = _kernel_matrix(params, spectrum, kap, grid.nodes)
    re = -0.5 * (K @ grid.weights)
    im = np.zeros_like(re)
    if imag:
        im = _imag_part(params, spectrum, kap, grid, rtol, re)
    out = re + 1j * im
    return out[0] if single else out


def _range_rows(params, spectrum, kap, grid, kind, rtol, scale):
    """Row sums of the one-sided range integrals; error checked against ``scale`` per row."""
    dk, db, b, bp = _mismatch(params, kap[:, None, :], grid.nodes[None, :, :])
    F, err, _ = _range_transform_err(spectrum, dk, db, kind)
    rtol = max(rtol, spectrum.quadrature_floor)
    pref = _prefactor(params)
    rows = pref * (F / (b * bp)) @ grid.weights
    row_err = pref * (err / (b * bp)) @ grid.weights
    worst = float(np.max(row_err / scale)) if rows.size else 0.0
    if worst > rtol:
        raise QuadratureError("zeta quadrature of the partial spectrum did not converge", worst)
    return rows


def _imag_part(params, spectrum, kap, grid, rtol, re=None):
    if re is None:
        re = -0.5 * (_kernel_matrix(params, spectrum, kap, grid.nodes) @ grid.weights)
    return _range_rows(params, spectrum, kap, grid, "sin", rtol, np.abs(re))


def q_exponent_direct(params, spectrum, kappa, grid, rtol=1e-10):
    """Q(kappa) with both parts from the one-sided range integral.

    An independent route to Re Q (cosine against the partial spectrum
    instead of the power spectral density), used to cross-check it.
    """
    kappa = np.asarray(kappa, dtype=float)
    single = kappa.ndim <= 1
    kap = kappa.reshape(-1, params.d)
    re_ref = np.abs(0.5 * (_kernel_matrix(params, spectrum, kap, grid.nodes) @ grid.weights))
    re = -_range_rows(params, spectrum, kap, grid, "cos", rtol, re_ref)
    im = _range_rows(params, spectrum, kap, grid, "sin", rtol, re_ref)
    out = re + 1j * im
    return out[0] if single else out


def mean_free_path(params, spectrum, kappa, grid):
    """Scattering mean free path S = -1 / Re Q; ``inf`` for a non-scattering medium."""
    re = np.real(q_exponent(params, spectrum, kappa, grid, imag=False))
    with np.errstate(divide="ignore"):
        return np.where(re < 0, -1.0 / np.where(re < 0, re, -1.0), np.inf)


def mfp_highfreq(params, spectrum, kappa):
    """Leading-order mean free path as k ell -> infinity.

    ``8 beta^2 / (k^2 alpha^2 ell int R(kappa zeta / beta, zeta) dzeta)``.
    """
    kappa = np.asarray(kappa, dtype=float)
    kap = kappa.reshape(-1, params.d) if kappa.ndim <= 1 else kappa
    b = beta(kap)
    v = np.concatenate([kap / b[:, None], np.ones((kap.shape[0], 1))], axis=-1)
    line = spectrum.line_integral(v)
    out = 8.0 * b ** 2 / (params.k ** 2 * params.alpha ** 2 * params.ell * line)
    return out[0] if kappa.ndim <= 1 else out


@dataclass(frozen=True, eq=False)
class CrossSectionTable:
    """Differential cross section on a grid with the derived rates.

    ``q_matrix[i, j] = Q(kappa_i, kappa_j)``; ``sigma = q_matrix @ w``;
    ``mfp = 2 / sigma``; ``q_exponent`` is complex with real part
    ``-sigma / 2`` and, when ``imag_computed``, the dispersive imaginary part.
    """

    grid: object
    q_matrix: np.ndarray
    sigma: np.ndarray
    mfp: np.ndarray
    q_exponent: np.ndarray
    imag_computed: bool = False
    params: Optional[object] = None
    kind: str = "full"

    def __post_init__(self):
        for a in (self.q_matrix, self.sigma, self.mfp, self.q_exponent):
            a.flags.writeable = False

    @classmethod
    def from_kernel(cls, grid, q_matrix, params=None, imag=None, kind="full"):
        q_matrix = np.asarray(q_matrix, dtype=float)
        q_matrix = 0.5 * (q_matrix + q_matrix.T)
        sigma = q_matrix @ grid.weights
        with np.errstate(divide="ignore"):
            mfp = np.where(sigma > 0, 2.0 / np.where(sigma > 0, sigma, 1.0), np.inf)
        qe = -0.5 * sigma + 0j
        computed = imag is not None
        if computed:
            qe = qe + 1j * np.asarray(imag, dtype=float)
        return cls(grid, q_matrix, sigma, mfp, qe, computed, params, kind)

    @classmethod
    def zeros(cls, grid):
        """Non-scattering table (pure free transport)."""
        return cls.from_kernel(grid, np.zeros((grid.n, grid.n)), imag=np.zeros(grid.n),
                               kind="zero")

    @property
    def n(self):
        return self.sigma.size

    @cached_property
    def collision_matrix(self):
        """Matrix L with (L I)_i = sum_j w_j Q_ij (I_j - I_i)."""
        L = self.q_matrix * self.grid.weights[None, :]
        L[np.diag_indices_from(L)] -= self.sigma
        L.flags.writeable = False
        return L

    @cached_property
    def symmetric_spectrum(self):
        """Eigen-decomposition of W^(1/2) L W^(-1/2) (symmetric), as (values, vectors)."""
        sw = np.sqrt(self.grid.weights)
        S = sw[:, None] * self.q_matrix * sw[None, :]
        S[np.diag_indices_from(S)] -= self.sigma
        vals, vecs = np.linalg.eigh(0.5 * (S + S.T))
        return vals, vecs

    @cached_property
    def alias(self):
        """Per-row alias tables (prob, alias) of the jump law w_j Q_ij / sigma_i."""
        from .montecarlo import build_alias_tables
        return build_alias_tables(self)

    def check_invariants(self, rtol=1e-12):
        """Return a dict of invariant residuals (all should be ~0)."""
        w = self.grid.weights
        finite = np.isfinite(self.mfp)
        return {
            "asymmetry": float(np.max(np.abs(self.q_matrix - self.q_matrix.T))),
            "min_entry": float(np.min(self.q_matrix)),
            "sigma_residual": float(np.max(np.abs(self.sigma - self.q_matrix @ w))),
            "mfp_sigma": float(np.max(np.abs(self.mfp[finite] * self.sigma[finite] - 2.0))) if finite.any() else 0.0,
            "re_q": float(np.max(np.abs(self.q_exponent.real + 0.5 * self.sigma))),
        }


def build_xsection_table(params, spectrum, grid, imag=True, threads=1, rtol=1e-10):
    """Materialize Q(kappa_i, kappa_j), Sigma, S and Q(kappa_i) on ``grid``.

    Rows are independent; ``threads > 1`` evaluates row blocks concurrently.
    """
    if grid.d != params.d:
        raise ConfigurationError("grid dimension does not match params.d", "grid")
    nodes = grid.nodes
    n = grid.n
    blocks = [slice(s, min(s + 256, n)) for s in range(0, n, 256)]

    def kernel_rows(sl):
        return _kernel_matrix(params, spectrum, nodes[sl], nodes)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        K = np.vstack(list(pool.map(kernel_rows, blocks)))
        re = -0.5 * (K @ grid.weights)

        def imag_rows(sl):
            return _imag_part(params, spectrum, nodes[sl], grid, rtol, re[sl])

        im = np.concatenate(list(pool.map(imag_rows, blocks))) if imag else None
    return CrossSectionTable.from_kernel(grid, K, params=params, imag=im)


# --- Henyey-Greenstein identification (d + 1 = 2) ---

def hg_anisotropy(k_ell):
    """Anisotropy factor g of the Lorentzian medium at k ell."""
    k_ell = np.asarray(k_ell, dtype=float)
    if np.any(k_ell <= 0):
        raise ValueError("k*ell must be positive")
    return 1.0 + 1.0 / (2 * k_ell ** 2) - np.sqrt(1.0 + 1.0 / (4 * k_ell ** 2)) / k_ell


def hg_params(params, r0=1.0):
    """(g, mu_s) of the Henyey-Greenstein law equivalent to a Lorentzian medium."""
    g = float(hg_anisotropy(params.k_ell))
    mu_s = (1 - g) / (1 + g) * np.pi * params.k ** 3 * params.ell ** 2 * params.alpha ** 2 * r0 / 2
    return g, float(mu_s)


def hg_phase(g, theta):
    """Henyey-Greenstein phase function on the circle, normalized over one period."""
    if not 0 <= g < 1:
        raise ValueError("anisotropy g must lie in [0, 1)")
    theta = np.asarray(theta, dtype=float)
    return (1 - g * g) / (2 * np.pi * (1 + g * g - 2 * g * np.cos(theta)))


def hg_identification_sides(params, theta, r0=1.0, spectrum=None):
    """Both sides of mu_s p(theta) = (k^3 ell^2 alpha^2 / 4) R_breve(k ell sqrt(2 (1 - cos theta)))."""
    if params.d != 1:
        raise UnsupportedModelError("the Henyey-Greenstein identification is a d = 1 statement")
    if spectrum is None:
        spectrum = Lorentzian2D(r0=r0)
    g, mu_s = hg_params(params, r0)
    theta = np.asarray(theta, dtype=float)
    lhs = mu_s * hg_phase(g, theta)
    arg = params.k_ell * np.sqrt(2.0 * (1.0 - np.cos(theta)))
    rhs = params.k ** 3 * params.ell ** 2 * params.alpha ** 2 / 4.0 * spectrum.breve_iso(arg)
    return lhs, rhs


def verify_hg_identification(params, r0, theta, spectrum=None):
    """Sup relative deviation between the two sides of the identification on ``theta``."""
    lhs, rhs = hg_identification_sides(params, theta, r0, spectrum)
    return float(np.max(np.abs(lhs - rhs) / np.abs(lhs)))


# --- reduction of the standard (3D) radiative transfer kernel ---

def rte3d_reduced_kernel(params, spectrum, kappa, kappa_prime, c0=1.0):
    """On-shell reduction of the 3D radiative transfer scattering kernel.

    The kernel ``pi c0^2 k^2 ell^3 alpha^2 / (2 (2 pi)^3) R~(ell (K - K')) delta(omega - omega')``
    is restricted to the forward shells ``K = k (kappa, beta)``; the Dirac
    factors are resolved and the transport operator's ``c0`` prefactor is
    divided out.
    """
    if params.d != 2 or spectrum.d_total != 3:
        raise UnsupportedModelError("the standard radiative transfer reduction needs d = 2")
    kappa = np.asarray(kappa, dtype=float)
    kappa_prime = np.asarray(kappa_prime, dtype=float)
    k, ell, alpha = params.k, params.ell, params.alpha
    b, bp = beta(kappa), beta(kappa_prime)
    K = k * np.concatenate([kappa, b[..., None]], axis=-1)
    Kp = k * np.concatenate([kappa_prime, bp[..., None]], axis=-1)
    sigma_pref = np.pi * c0 ** 2 * k ** 2 * ell ** 3 * alpha ** 2 / (2 * (2 * np.pi) ** 3)
    psd_val = spectrum.psd(ell * (K - Kp))
    delta_omega = 1.0 / (c0 * b)      # delta(omega - omega') -> delta(K_z - k beta) / (c0 beta)
    shell_prime = 1.0 / bp            # W' = delta(K'_z - k beta') / beta' * W
    measure = (2 * np.pi) ** 2        # d^2 K'_t = (2 pi)^2 d(k kappa') / (2 pi)^2
    rhs = sigma_pref * psd_val * delta_omega * shell_prime * measure
    return rhs / c0                   # grad_K omega . grad_x -> c0 delta(...) (d_z - grad beta . grad_x)


def verify_rte3d_reduction(params, spectrum, kappa, kappa_prime, c0=1.0):
    """Max relative deviation between the reduced 3D kernel and Q(kappa, kappa')."""
    red = rte3d_reduced_kernel(params, spectrum, kappa, kappa_prime, c0)
    ref = diff_xsection(params, spectrum, kappa, kappa_prime)
    return float(np.max(np.abs(red - ref) / np.abs(ref)))
