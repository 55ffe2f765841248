"""
Spatial spreading in phase space.

Evolves the energy density over transverse position and direction.  Each
direction drifts along its characteristic while scattering moves energy
between directions, so a collimated beam first translates and then
widens in space.

Run with ``python demos/04_phase_space.py``.
"""

import numpy as np

from owrte import GaussianIsotropic, TransportParams, build_xsection_table, make_grid
from owrte import xsection as xs
from owrte.transport import IntensityField, WignerField, solve_wigner, wigner_nonnegativity

params = TransportParams(k=1.0, ell=20.0, alpha=0.1, d=1)
medium = GaussianIsotropic(d_total=2)
grid = make_grid(params, 64)
table = build_xsection_table(params, medium, grid, imag=False)
s0 = float(xs.mean_free_path(params, medium, [0.0], grid))

# tilted beam, narrow in angle and in space
beam = IntensityField.gaussian_beam(grid, width=0.03, center=[0.1])
width = 0.5 * s0
w0 = WignerField.from_profile(beam, 40 * s0, 256, lambda x: np.exp(-0.5 * (x / width) ** 2))

print(" z/S0   mean x/S0   rms x/S0   energy       min W / max W")
for w in solve_wigner(table, w0, np.linspace(0.0, 4 * s0, 5)):
    x = w.x_nodes[0]
    px = w.values.T @ grid.weights
    m = np.sum(px * x) / px.sum()
    rms = np.sqrt(np.sum(px * (x - m) ** 2) / px.sum())
    print(f"{w.z / s0:5.1f}  {m / s0:9.4f}  {rms / s0:9.4f}  {w.total:.12f}  {wigner_nonnegativity(w):+.1e}")
