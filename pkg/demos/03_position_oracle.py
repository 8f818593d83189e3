"""Checking the momentum-space shortcut against an explicit lattice.

On a ring of N sites the Bloch momenta 2 pi m / N block-diagonalise the walk,
so averaging the coin blocks over exactly those momenta must reproduce the
partial trace of the full lattice evolution. This is the independent oracle
behind the Fourier route.
"""

import numpy as np

from ptwalk import Formalism, FullState, KGrid, WalkParams, evolve_metric, evolve_normalised, position_oracle

p = WalkParams(np.pi / 4, -np.pi / 7, 0.15)
for N in (32, 33):
    full = FullState.origin("plus", N)
    grid = KGrid.for_lattice(N)
    err_n = max(
        np.abs(evolve_normalised(p, "plus", t, grid).matrix - position_oracle(p, full, t).matrix).max()
        for t in range(12)
    )
    err_m = max(
        np.abs(evolve_metric(p, "plus", t, grid).matrix - position_oracle(p, full, t, Formalism.METRIC).matrix).max()
        for t in range(12)
    )
    print(f"N = {N}: max deviation normalised {err_n:.1e}, metric {err_m:.1e}")
