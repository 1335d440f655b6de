"""
A Kerr quench and the question of thermalisation.

Prepare the coherent state of the pi-phase steady state at U = 0.5, then
switch to U = 6.5 and let the closed system evolve.  The relative phase
spreads almost uniformly, but the left cavity's Husimi function settles
on a ring rather than a thermal Gaussian, and its photon-number entropy
stays below the thermal value at the same mean occupation.

Run:  python demos/03_quench.py   (a few minutes on one core)
"""

import numpy as np

from jcdimer import ModelParams
from jcdimer.experiments import run_quench
from jcdimer.observables import photon_moments, thermal_reference
from jcdimer.phasespace import default_grid, husimi, husimi_angular_average

params = ModelParams(omega=2.0, omega0=2.0, g_scaled=0.5, excitations=30)
series, snaps, fp = run_quench(params, 0.5, 6.5, 200.0, 0.5,
                               snapshot_times=[50.0, 100.0, 150.0])
print(f"pre-quench state {fp.branch.name}, f={fp.f:.3f}, n_max={series.meta['n_max']}")

late = series.window(50.0)
fluct = np.mean(late["dpsi2_L"])  # already divided by the uniform value pi^2/3
print(f"normalised phase fluctuation after t=50: {fluct:.3f} (1 = uniform)")
print(f"time-averaged PE {np.mean(late['PE_L']):.4f}, KE {np.mean(late['KE_L']):.4f}")
nbar = np.mean(late["n_L"])
thermal = thermal_reference(nbar)
print(f"photon-number entropy {np.mean(late['S_ph_L']):.3f} vs thermal {thermal.entropy:.3f} "
      f"at <n> = {nbar:.2f}")


def ring_radii(r, qbar):
    """Radii of interior local maxima of the angular-averaged Husimi function."""
    return [r[i] for i in range(1, r.size - 1) if qbar[i] > qbar[i - 1] and qbar[i] >= qbar[i + 1]]


grid = default_grid(params.excitations)
for t, rho in sorted(snaps.items()):
    r, qbar = husimi_angular_average(husimi(rho, grid))
    radii = ", ".join(f"{x:.3f}" for x in ring_radii(r, qbar))
    print(f"t={t:5.1f}  <n>={photon_moments(rho)['n']:6.2f}  Qbar maxima at r = {radii}")

# A thermal state has no ring: its angular average has no interior maximum.
r, _ = husimi_angular_average(husimi(snaps[50.0], grid))
print(f"thermal reference maxima: {ring_radii(r, thermal.husimi_radial(r, params.excitations))}")
