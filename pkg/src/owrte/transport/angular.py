"""Range-marching solver for the direction-resolved intensity."""

import numpy as np

from ..errors import GridMismatchError, InstabilityError, StepSizeError
from .fields import IntensityField

# negative values above -NEG_TOL * max are rounding and get clamped
NEG_TOL = 1e-14


def _check_grid(table, field):
    if not table.grid.same_as(field.grid):
        raise GridMismatchError("intensity field and cross-section table use different grids")


def collision_apply(table, field):
    """Collision integral sum_j w_j Q_ij (I_j - I_i) at every node.

    ``field`` may be an IntensityField or an array whose leading axis runs
    over the nodes.
    """
    if isinstance(field, IntensityField):
        _check_grid(table, field)
        values = field.values
    else:
        values = np.asarray(field, dtype=float)
        if values.shape[0] != table.n:
            raise GridMismatchError("leading axis does not match the table grid")
    gain = (table.q_matrix * table.grid.weights[None, :]) @ values
    loss = table.sigma.reshape((-1,) + (1,) * (values.ndim - 1)) * values
    return gain - loss


def clamp_negative(values, where="intensity"):
    """Zero out rounding-level negatives; raise on genuine ones."""
    vmin = values.min()
    if vmin >= 0:
        return values
    scale = max(np.abs(values).max(), np.finfo(float).tiny)
    if vmin < -NEG_TOL * scale:
        raise InstabilityError(f"negative {where} {vmin:.3e} (max {scale:.3e}) beyond rounding level")
    return np.maximum(values, 0.0)


def _check_targets(z_targets, z0):
    z = np.asarray(z_targets, dtype=float)
    if z.ndim != 1 or z.size == 0:
        raise ValueError("z_targets must be a non-empty list of ranges")
    if z[0] < z0 or np.any(np.diff(z) < 0):
        raise ValueError("z_targets must be nondecreasing and not before the initial range")
    return z


def rk4_steps(rhs, y, dz, n_steps, callback=None, z0=0.0):
    """Classic fourth-order Runge-Kutta with a clamp after each step."""
    for s in range(n_steps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * dz * k1)
        k3 = rhs(y + 0.5 * dz * k2)
        k4 = rhs(y + dz * k3)
        y = y + dz / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        y = clamp_negative(y)
        if callback is not None:
            callback(z0 + (s + 1) * dz, y)
    return y


def solve_angular(table, i0, z_targets, method="rk4", *, max_step=None, callback=None):
    """Integrate dI/dz = collision(I) from ``i0`` to each range in ``z_targets``.

    Parameters
    ----------
    table : CrossSectionTable
    i0 : IntensityField
    z_targets : sequence of float
        Nondecreasing ranges, not before ``i0.z``.
    method : {'rk4', 'matrix_exp'}
        Explicit RK4 with step ``<= 0.1 / max sigma``, or the exact
        exponential of the weighted collision matrix via its symmetric
        eigen-decomposition.
    max_step : float, optional
        Upper bound on the RK4 step (tighter than the default).
    callback : callable, optional
        ``callback(z, values)`` after every RK4 step.

    Returns
    -------
    list of IntensityField
    """
    _check_grid(table, i0)
    z = _check_targets(z_targets, i0.z)
    out = []
    if method == "matrix_exp":
        vals, vecs = table.symmetric_spectrum
        sw = np.sqrt(table.grid.weights)
        c0 = vecs.T @ (sw * i0.values)
        for zt in z:
            y = (vecs @ (np.exp(vals * (zt - i0.z)) * c0)) / sw
            out.append(i0.with_values(clamp_negative(y), float(zt)))
        return out
    if method != "rk4":
        raise ValueError(f"unknown method {method!r}")
    smax = float(table.sigma.max())
    h_max = 0.1 / smax if smax > 0 else np.inf
    if max_step is not None:
        if not max_step > 0:
            raise StepSizeError("max_step must be positive")
        h_max = min(h_max, max_step)
    L = table.collision_matrix
    rhs = L.__matmul__
    y = i0.values.copy()
    zc = i0.z
    for zt in z:
        span = zt - zc
        if span > 0:
            n = 1 if not np.isfinite(h_max) else int(np.ceil(span / h_max))
            if n > 10 ** 8:
                raise StepSizeError(f"{n} steps needed for span {span}: step-size underflow")
            y = rk4_steps(rhs, y, span / n, n, callback, zc)
        zc = zt
        out.append(i0.with_values(y.copy(), float(zt)))
    return out
