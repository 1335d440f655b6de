"""
Steady states of the classical dimer and where they lose stability.

We start at g = 1 with weak Kerr coupling and list the steady states of
all four sign classes.  Raising U then softens the symmetric pi-phase
state until a self-trapped pair takes over.

Run:  python demos/01_steady_states.py
"""

import numpy as np

from jcdimer import ModelParams
from jcdimer import semiclassical as sc
from jcdimer.scans import bifurcation_scan, locate_stability_change

params = ModelParams(omega=2.0, omega0=2.0, g_scaled=1.0, u_scaled=1.0, excitations=30)

print("Steady states at g=1, U=1 (M=30)")
for xi1, xi2 in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
    for fp in sc.steady_states(params, xi1, xi2):
        tag = "stable" if fp.stable else "unstable"
        print(f"  {fp.branch.name:6s} f={fp.f:.4f}  Z_p={fp.photon_imbalance:+.4f}  "
              f"mu*={fp.mu_star:+.4f}  {tag}")

# The symmetric pi-phase state softens at a critical Kerr strength.  Locate
# it by bisection on the stability flag and compare with the closed form.
u_star = locate_stability_change(params, "FP-pi", "U", 2.0, 3.5, tol=1e-6)
u_c1 = sc.critical_lines(params)[2]
print(f"\nFP-pi loses stability at U = {u_star:.5f} (small-eta line {u_c1:.5f})")

# Softest normal mode on either side of the transition.
for du in (0.1, 0.01, 0.001):
    below = sc.find_fixed_point(params.with_(u_scaled=u_star - du), "FP-pi").omega0_min
    above = sc.find_fixed_point(params.with_(u_scaled=u_star + du), "ST1").omega0_min
    print(f"  |U-U*|={du:<6g} FP-pi mode {below:.4f}   ST1 mode {above:.4f}")

# Continue the (-1, +1) class in U: the self-trapped pair branches off the
# symmetric state at the pitchfork.
branches = bifurcation_scan(params, -1, 1, "U", np.linspace(0.5, 6.0, 23), mirror=True)
print("\nBranches of the (-1,+1) class along U")
for br in branches:
    rows = br.rows()
    stable = [r for r in rows if r[3]]
    span = f"U in [{rows[0][0]:.2f}, {rows[-1][0]:.2f}]"
    print(f"  {br.label.name:6s}{' (mirror)' if br.mirrored else '':9s} {span}, "
          f"{len(stable)}/{len(rows)} stable points, Z_p at end {rows[-1][2]:+.3f}")
