"""Small-wavelength limit of the collision operator: drift-diffusion in kappa."""

import warnings

import numpy as np

from ..errors import ConfigurationError, StepSizeError
from ..geometry import beta
from .angular import _check_targets, clamp_negative
from .fields import DiffusionCoeffs
from .paraxial import SupportLeakageWarning, boundary_mass_fraction

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


def _line_nodes(z_max, panels=64):
    edges = np.linspace(-z_max, z_max, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1] - edges[0])
    return (mid[:, None] + half * _GL_X[None, :]).ravel(), np.tile(half * _GL_W, panels)


def diffusion_coeffs(params, spectrum, kappa, *, fd_step=1e-2):
    """Diffusion tensor A(kappa) and drift B(kappa) of the kappa-diffusion model.

    ``A_jl = -(alpha^2 / 8 beta^2) int d^2 R / dr_j dr_l (kappa zeta / beta, zeta) dzeta``
    and ``B_j`` is the two-term expression combining the Hessian of beta
    with the third transverse derivatives of the covariance, the second
    derivatives of beta read as d^2 beta / dkappa_l dkappa_m.  Covariance derivatives are analytic for
    Gaussian media and fourth-order finite differences (step ``fd_step``)
    otherwise.  Both are integrated exactly along the line by composite
    Gauss-Legendre quadrature.

    Parameters
    ----------
    params : TransportParams
    spectrum : MediumSpectrum
    kappa : array_like, shape (d,) or (m, d)

    Returns
    -------
    DiffusionCoeffs
        ``a_matrix`` (…, d, d) and ``b_vector`` (…, d) matching ``kappa``.
    """
    kappa = np.asarray(kappa, dtype=float)
    d = params.d
    single = kappa.ndim <= 1
    kap = kappa.reshape(-1, d)
    b = beta(kap)
    extent = spectrum.radial_extent() - 3 * fd_step * np.sqrt(d)
    alpha2 = params.alpha ** 2
    A = np.empty((kap.shape[0], d, d))
    B = np.empty((kap.shape[0], d))
    for i, (kv, bv) in enumerate(zip(kap, b)):
        zeta, wz = _line_nodes(bv * extent)
        r_t = kv[None, :] * zeta[:, None] / bv
        H = spectrum.transverse_hessian(r_t, zeta, h=fd_step)
        T = spectrum.transverse_third(r_t, zeta, h=fd_step)
        intH = np.tensordot(wz, H, axes=(0, 0))
        intZT = np.tensordot(wz * zeta, T, axes=(0, 0))
        A[i] = -alpha2 / (8 * bv ** 2) * intH
        hess_beta = -np.eye(d) / bv - np.outer(kv, kv) / bv ** 3
        B[i] = (alpha2 / (8 * bv ** 2) * np.einsum("lm,jlm->j", hess_beta, intZT)
                - alpha2 / (4 * bv ** 4) * intH @ kv)
    A = 0.5 * (A + np.swapaxes(A, -1, -2))
    if single:
        return DiffusionCoeffs(A[0], B[0], kap[0])
    return DiffusionCoeffs(A, B, kap)


def diffusion_field(params, spectrum, grid, **kw):
    """diffusion_coeffs at every node of ``grid``."""
    return diffusion_coeffs(params, spectrum, grid.nodes, **kw)


def constant_coeffs(grid, a_matrix, b_vector=None):
    """Spatially uniform coefficients on ``grid`` (heat-equation tests)."""
    d = grid.d
    a = np.broadcast_to(np.asarray(a_matrix, dtype=float).reshape(d, d), (grid.n, d, d)).copy()
    b = np.zeros((grid.n, d)) if b_vector is None else np.broadcast_to(
        np.asarray(b_vector, dtype=float), (grid.n, d)).copy()
    return DiffusionCoeffs(a, b, np.array(grid.nodes))


def _operator(grid, coeffs, gamma, drift_power):
    """Right side of dI/dz in conservative (zero-flux) finite-volume form.

    Flux ``F_j = A_jl d_l I + (gamma^(p-1) B_j - d_l A_jl) I`` so that, when
    the drift equals the divergence of the diffusion tensor, the operator is
    ``gamma (A_jl d_jl + B_j d_j)`` and total intensity is conserved exactly.
    """
    if grid.rule != "midpoint" or grid.spacing is None:
        raise ConfigurationError("the diffusion solver needs a uniform midpoint grid", "grid.rule")
    d, h, shape = grid.d, grid.spacing, grid.shape
    A = np.asarray(coeffs.a_matrix, dtype=float).reshape(shape + (d, d))
    B = np.asarray(coeffs.b_vector, dtype=float).reshape(shape + (d,))
    divA = np.zeros(shape + (d,))
    for j in range(d):
        for l in range(d):
            divA[..., j] += np.gradient(A[..., j, l], h, axis=l, edge_order=2)
    c = (gamma ** (drift_power - 1) if drift_power != 1 else 1.0) * B - divA

    def face(arr, axis):
        lo = [slice(None)] * d
        hi = [slice(None)] * d
        lo[axis] = slice(None, -1)
        hi[axis] = slice(1, None)
        return 0.5 * (arr[tuple(lo)] + arr[tuple(hi)]), tuple(lo), tuple(hi)

    faces = []
    for j in range(d):
        Aj = [face(A[..., j, l], j)[0] for l in range(d)]
        cj, lo, hi = face(c[..., j], j)
        faces.append((Aj, cj, lo, hi))

    def rhs(flat):
        I = flat.reshape(shape)
        grads = [np.gradient(I, h, axis=l) for l in range(d)] if d > 1 else None
        out = np.zeros(shape)
        for j, (Aj, cj, lo, hi) in enumerate(faces):
            F = cj * 0.5 * (I[lo] + I[hi])
            F = F + Aj[j] * (I[hi] - I[lo]) / h
            for l in range(d):
                if l != j:
                    F = F + Aj[l] * 0.5 * (grads[l][lo] + grads[l][hi])
            pad = [(0, 0)] * d
            pad[j] = (1, 1)
            out += np.diff(np.pad(F, pad), axis=j) / h
        return gamma * out.ravel()

    a_bound = float(np.abs(A).sum(axis=-1).max())
    c_bound = float(np.abs(c).max())
    lam = gamma * (4 * d * a_bound / h ** 2 + 2 * c_bound / h)
    return rhs, lam


def solve_kappa_diffusion(coeffs, gamma, i0, z_targets, *, z_unit=1.0, drift_power=1,
                          dz=None, leak_tol=1e-6):
    """Explicit solve of dI/dz~ = gamma [A_jl d_jl + gamma^(p-1) B_j d_j] I.

    Parameters
    ----------
    coeffs : DiffusionCoeffs
        Coefficients sampled at the nodes of ``i0.grid`` (a uniform midpoint grid).
    gamma : float
        Wavelength over correlation length, 2 pi / (k ell).
    i0 : IntensityField
    z_targets : sequence of float
        Output ranges in the same length unit as ``z_unit``.
    z_unit : float
        Length of one scaled range unit ``z~``.  With the wavelength here
        the model reproduces the variance growth of the full kernel.
    drift_power : int
        Power of gamma multiplying B relative to A (1 keeps both at the
        same order, 2 delays the drift by one order).
    dz : float, optional
        Fixed step in scaled range; must satisfy the RK4 stability limit.

    Returns
    -------
    list of IntensityField
    """
    z = _check_targets(z_targets, i0.z)
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    if gamma == 0:
        return [i0.with_values(i0.values.copy(), float(zt)) for zt in z]
    rhs, lam = _operator(i0.grid, coeffs, gamma, drift_power)
    limit = 2.5 / lam if lam > 0 else np.inf
    if dz is not None and dz > limit:
        raise StepSizeError(f"dz={dz:.3e} exceeds the RK4 stability limit {limit:.3e} for this grid")
    h_max = 0.5 * limit if dz is None else dz
    y = i0.values.copy()
    zc = i0.z / z_unit
    out = []
    for zt in z:
        span = zt / z_unit - zc
        if span > 0:
            n = max(1, int(np.ceil(span / h_max)))
            dzs = span / n
            for _ in range(n):
                k1 = rhs(y)
                k2 = rhs(y + 0.5 * dzs * k1)
                k3 = rhs(y + 0.5 * dzs * k2)
                k4 = rhs(y + dzs * k3)
                y = y + dzs / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            y = clamp_negative(y, "diffusion intensity")
        zc = zt / z_unit
        f = i0.with_values(y.copy(), float(zt))
        frac = boundary_mass_fraction(f)
        if frac > leak_tol:
            warnings.warn(f"{frac:.2e} of the intensity at the kappa window edge at z={zt:g}",
                          SupportLeakageWarning, stacklevel=2)
        out.append(f)
    return out
