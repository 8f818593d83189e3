"""Where the spectrum of the walk leaves the unit circle.

The one-step operator at momentum k has eigenvalues a +- sqrt(a^2 - 1). While
|a(k)| < 1 for every k they are unimodular and the quasi-energies are real.
Raising the gain/loss strength pushes max_k a(k) through one at the
exceptional point, after which a band of momenta carries one growing and one
decaying mode.
"""

import numpy as np

from ptwalk import WalkParams, eigensystem, ep_contour_grid, exceptional_point, regime

theta1, theta2 = np.pi / 4, -np.pi / 7
g_pt = exceptional_point(theta1, theta2)
print(f"exceptional point: gamma_PT = {g_pt:.6f}, e^gamma_PT = {np.exp(g_pt):.6f}")

print("\nquasi-energies at k = 0 as gamma crosses the threshold")
for eg in (1.0, 1.2, 1.34, 1.36, 1.5):
    p = WalkParams(theta1, theta2, np.log(eg))
    es = eigensystem(p, 0.0)
    print(
        f"  e^gamma={eg:4.2f}  {regime(p):9s}  a={es.a:+.5f}  "
        f"eps+={es.eps_plus.real:+.4f}{es.eps_plus.imag:+.4f}j  |lambda+|={abs(es.lambda_plus):.5f}"
    )

print("\nthreshold over a coarse grid of coin angles (nan: no transition)")
t1, t2, grid = ep_contour_grid((0.2, 2.9), (-2.9, -0.2), resolution=5)
print("theta1 \\ theta2 " + " ".join(f"{b:8.3f}" for b in t2))
for a, row in zip(t1, grid):
    print(f"{a:15.3f} " + " ".join(f"{v:8.4f}" for v in row))
