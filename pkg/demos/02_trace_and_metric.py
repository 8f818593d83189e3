"""Trace normalisation versus the metric formalism.

Under the bare non-Hermitian evolution the trace of the reduced coin state
is not conserved: below the exceptional point it wobbles around an
asymptote, above it it grows exponentially. Dressing each momentum block with
the metric G_c(k, t) gives a state whose trace is a constant of motion, so a
single time-independent rescaling normalises it.
"""

import numpy as np

from ptwalk import KGrid, WalkParams, evolve_metric, evolve_normalised, trace_series

theta1, theta2 = np.pi / 4, -np.pi / 7
grid = KGrid(512)

for eg in (1.2, 1.5):
    p = WalkParams(theta1, theta2, np.log(eg))
    raw = trace_series(p, "up", 50, grid, "raw").values
    met = trace_series(p, "up", 50, grid, "metric").values
    print(f"e^gamma = {eg}")
    print(f"  raw trace    t=0,10,25,50: {raw[0]:.4g} {raw[10]:.4g} {raw[25]:.4g} {raw[50]:.4g}")
    print(f"  metric trace spread over t<=50: {np.ptp(met):.2e} (value {met[0]:.6f})")

p = WalkParams(theta1, theta2, np.log(1.2))
print("\nreduced coin state at t = 20, e^gamma = 1.2")
print("  normalised:\n", np.round(evolve_normalised(p, "up", 20, grid).matrix, 5))
print("  metric:\n", np.round(evolve_metric(p, "up", 20, grid).matrix, 5))
