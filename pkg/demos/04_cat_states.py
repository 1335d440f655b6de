"""
Negativity of the Wigner function as a witness of coherence.

An even cat state and the incoherent mixture of its two components have
nearly identical Husimi functions, but only the cat shows interference
fringes with negative Wigner values between the two blobs.

Run:  python demos/04_cat_states.py
"""

import math

from jcdimer.phasespace import default_grid, husimi, make_cat_state, make_incoherent_mixture, wigner

M = 30
grid = default_grid(M, extent=1.6, points=121)
alpha = math.sqrt(10.0)

cat = make_cat_state(alpha, 63).density()
mix = make_incoherent_mixture(alpha, 63)
print(f"purity: cat {cat.purity():.3f}, mixture {mix.purity():.3f}")

for name, rho in (("cat", cat), ("mixture", mix)):
    w = wigner(rho, grid)
    q = husimi(rho, grid)
    print(f"{name:8s} Wigner min {w.values.min():+.4f}  max {w.values.max():+.4f}  "
          f"Husimi max {q.values.max():.4f}")

# Row through the fringes (p axis at x = 0) for the cat.
w = wigner(cat, grid)
mid = grid.x.size // 2
print("\nWigner of the cat along p at x=0:")
for i in range(mid - 12, mid + 13, 3):
    print(f"  p={grid.p[i]:+.3f}  W={w.values[i, mid]:+.4f}")
