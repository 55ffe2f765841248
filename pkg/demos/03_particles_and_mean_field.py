"""
Particles, the deterministic solver and the mean field.

The transport equation is the forward equation of a jump process, so a
particle simulation on the same nodes reproduces the deterministic
intensity up to sampling error.  Particles that never scattered carry
the coherent part, which decays at twice the rate of the mean amplitude.

Run with ``python demos/03_particles_and_mean_field.py``.
"""

import numpy as np

from owrte import GaussianIsotropic, TransportParams, build_xsection_table, make_grid
from owrte import montecarlo as mc
from owrte.coherent import SourceModel, mean_amplitude, source_amplitudes
from owrte.transport import IntensityField, solve_angular

params = TransportParams(k=1.0, ell=20.0, alpha=0.1, d=1)
medium = GaussianIsotropic(d_total=2)
grid = make_grid(params, 64)
table = build_xsection_table(params, medium, grid)
centre = int(np.argmin(np.abs(grid.nodes[:, 0])))
s0 = float(table.mfp[centre])

source = SourceModel(kind="gaussian", kappa_width=0.05)
i0 = IntensityField(grid, np.abs(source_amplitudes(source, params, grid)) ** 2)

ens = mc.ParticleEnsemble.from_intensity(i0, 500_000, seed=1)
ens = mc.evolve(ens, table, s0)
est = mc.estimate_intensity(ens)
det = solve_angular(table, i0, [s0])[0]
z = np.abs(est.values - det.values) / est.stderr
print(f"z = S0 = {s0:.2f}: {np.mean(z <= 4) * 100:.1f}% of bins within 4 stderr, "
      f"max |z-score| {z.max():.2f}")
info = mc.summary(ens)
print(f"mean scatter count {info['mean_n_scatter']:.4f}, kappa variance {info['kappa_variance']:.3e}")

# coherent part: never-scattered particles against |A(z)|^2
a0 = source_amplitudes(source, params, grid)
print("\n z/S0  unscattered (MC)   |A|^2/|a0|^2   exp(-2 z/S)")
mono = mc.ParticleEnsemble.monoenergetic(grid, centre, 200_000, seed=2)
for frac in (0.25, 0.5, 1.0, 2.0):
    zr = frac * s0
    f, se = mc.estimate_coherent(mc.evolve(mono, table, zr))
    amp = mean_amplitude(a0, table, zr)[centre]
    print(f"{frac:5.2f}  {f:.5f} +- {se:.5f}   {abs(amp / a0[centre]) ** 2:.5f}       "
          f"{np.exp(-2 * frac):.5f}")
