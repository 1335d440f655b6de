"""
Classical and quantum dynamics from the same initial condition.

A small Gaussian kick sets the pi-phase state oscillating.  For weak Kerr
coupling the quantum photon number follows the classical trajectory and
oscillates at the frequency of the softest normal mode.  Above the
critical line a self-trapped state keeps its imbalance in the classical
picture, while in the quantum picture it slowly tunnels away.

Run:  python demos/02_classical_vs_quantum.py   (about a minute)
"""

import numpy as np

from jcdimer import ModelParams
from jcdimer import semiclassical as sc
from jcdimer.experiments import Perturbation, prepare_initial, run_classical, run_quantum
from jcdimer.observables import dominant_frequency

base = ModelParams(omega=2.0, omega0=2.0, excitations=30)
kick = Perturbation("gaussian", 1e-2, seed=0)

# Part 1: small oscillations about FP-pi at (g, U) = (1, 1.5).
p = base.with_(g_scaled=1.0, u_scaled=1.5)
fp, start = prepare_initial(p, "FP-pi", kick)
dt, t_final = 0.05, 20.0
classical = run_classical(p, start, t_final, dt)
quantum, _ = run_quantum(p, start, t_final, dt, phase=False)

w_cl = dominant_frequency(classical["n_L"], dt)
w_q = dominant_frequency(quantum["n_L"], dt)
print(f"normal mode {fp.omega0_min:.4f}; classical peak {w_cl:.4f}; quantum peak {w_q:.4f}")
print("   t     n_L classical   <n_L>/M quantum")
for k in range(0, len(classical), 50):
    print(f"{classical.times[k]:5.1f}   {classical['n_L'][k]:.5f}       {quantum['n_L'][k] / p.excitations:.5f}")

# Part 2: the ST1 state at U = 5 in both pictures.
p = base.with_(g_scaled=1.0, u_scaled=5.0)
fp, start = prepare_initial(p, "ST1")
classical = run_classical(p, start, 100.0, 0.5)
quantum, _ = run_quantum(p, start, 100.0, 0.5, phase=False)
print(f"\nST1 at U=5: classical Z_p mean {np.mean(classical['Z_p']):+.3f}, "
      f"quantum Z_p mean {np.mean(quantum['Z_p']):+.3f} (start {fp.photon_imbalance:+.3f})")
print(f"quantum Z_p at t=0, 50, 100: "
      + ", ".join(f"{quantum['Z_p'][i]:+.3f}" for i in (0, 100, 200)))
print(f"left-subsystem entropy at t=100: {quantum['S_L'][-1]:.3f} (ln 2 = {np.log(2):.3f})")
