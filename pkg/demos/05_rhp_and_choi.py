"""Divisibility of the reduced dynamics.

The map L(t, 0) from the initial coin state to the state at t is a 4x4
matrix. Composing with the inverse of the previous map gives the step map
L(t, t-1); its Choi matrix has unit trace norm exactly when the step is
completely positive. The RHP measure sums the excess.

In the metric formalism every step map preserves the trace, including above
the exceptional point. There the map chain is ill-conditioned in double
precision, so it is evaluated with extended-precision arithmetic.
"""

import numpy as np

from ptwalk import WalkParams, rhp_series

theta1, theta2 = np.pi / 4, -np.pi / 7
print(" e^gamma  formalism    I(10)      I(50)   max|2trC-2|  bits  pinv")
for eg in (1.0, 1.2, 1.3, 1.4, 1.5):
    p = WalkParams(theta1, theta2, np.log(eg))
    for f in ("metric", "normalised"):
        s = rhp_series(p, 50, formalism=f)
        dev = np.abs(2 * s.extra["choi_trace"] - 2).max()
        print(
            f" {eg:6.2f}  {f:10s} {s.values[10]:9.4g} {s.values[50]:10.4g}  {dev:10.2e}  "
            f"{s.extra['precision_bits'][0]:4d}  {s.flags.count('pinv'):4d}"
        )
