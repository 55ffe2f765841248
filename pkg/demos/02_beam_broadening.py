"""
Angular broadening of a narrow beam.

A beam launched near normal incidence spreads in direction as it
scatters.  The full transport kernel, its paraxial approximation and the
drift-diffusion limit are run side by side on the same grid.

Run with ``python demos/02_beam_broadening.py``.
"""

import numpy as np

from owrte import GaussianIsotropic, TransportParams, build_xsection_table, make_grid
from owrte import xsection as xs
from owrte.transport import (IntensityField, diffusion_coeffs, diffusion_field,
                             paraxial_table, solve_angular, solve_kappa_diffusion)

params = TransportParams(k=1.0, ell=20.0, alpha=0.1, d=1)
medium = GaussianIsotropic(d_total=2)

# uniform cell-centred grid, needed by the finite-volume diffusion solver
grid = make_grid(params, 256, rule="midpoint")
s0 = float(xs.mean_free_path(params, medium, [0.0], grid))
full = build_xsection_table(params, medium, grid, imag=False)
para = paraxial_table(params, medium, grid)

beam = IntensityField.gaussian_beam(grid, width=0.02)
z = np.linspace(0.0, 2 * s0, 9)

exact = solve_angular(full, beam, z)
paraxial = solve_angular(para, beam, z, method="matrix_exp")
coeffs = diffusion_field(params, medium, grid)
diffused = solve_kappa_diffusion(coeffs, params.gamma, beam, z, z_unit=params.wavelength)

print(f"S(0) = {s0:.3f}, gamma = {params.gamma:.4f}")
print(" z/S0   var_full    var_paraxial  var_diffusion  L1(full, paraxial)")
for a, b, c in zip(exact, paraxial, diffused):
    print(f"{a.z / s0:5.2f}  {a.variance():.4e}  {b.variance():.4e}    {c.variance():.4e}"
          f"     {a.l1_distance(b):.2e}")

# variance grows at 2 gamma A(0) per wavelength of range
a0 = float(diffusion_coeffs(params, medium, [0.0]).a_matrix[0, 0])
rate = np.polyfit(z, [f.variance() for f in exact], 1)[0] * params.wavelength
print(f"\nvariance rate {rate:.5e} vs 2 gamma A(0) = {2 * params.gamma * a0:.5e}")
print(f"total intensity drift {abs(exact[-1].total / beam.total - 1):.1e}")
