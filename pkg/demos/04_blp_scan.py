"""Information back-flow across the exceptional point.

The BLP measure accumulates every increase of the trace distance between two
evolving coin states. Scanning the gain/loss strength shows a dip right at the
threshold and explosive growth beyond it, where the metric-dressed states
are dominated by the amplified modes.
"""

import numpy as np

from ptwalk import WalkParams, blp_series, exceptional_point, regime

theta1, theta2 = np.pi / 4, -np.pi / 7
print(f"e^gamma_PT = {np.exp(exceptional_point(theta1, theta2)):.5f}\n")
print(" e^gamma   regime      N(50) metric   N(50) normalised")
for eg in np.linspace(1.0, 1.6, 13):
    p = WalkParams(theta1, theta2, np.log(eg))
    nm = blp_series(p, "up", "plus", 50, formalism="metric").values[-1]
    nn = blp_series(p, "up", "plus", 50, formalism="normalised").values[-1]
    print(f" {eg:6.3f}   {regime(p):9s}  {nm:13.5g}  {nn:13.5g}")
