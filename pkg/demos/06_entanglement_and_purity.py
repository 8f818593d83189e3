"""Coin-position entanglement and purity.

Starting from a product state, the walker's coin becomes entangled with its
position; the von Neumann entropy of the reduced coin state measures this.
Below the exceptional point the metric-dressed full state stays pure, which
is what makes that entropy an entanglement measure at all.
"""

import numpy as np

from ptwalk import FullState, WalkParams, entanglement_series, evolve_full, purity

theta1, theta2 = np.pi / 4, -np.pi / 7
for eg in (1.0, 1.1, 1.2, 1.3):
    s = entanglement_series(WalkParams(theta1, theta2, np.log(eg)), "plus", 50)
    print(f"e^gamma = {eg:.1f}: mean EE over t = 30..50 is {s.values[30:].mean():.5f}")

p = WalkParams(theta1, theta2, 0.2)
full = FullState.origin("up", 32)
vals = [purity(evolve_full(p, full, t, "metric")) for t in range(0, 11, 2)]
print("\nfull-state purity on a 32-site ring, gamma = 0.2:", np.round(vals, 12))
