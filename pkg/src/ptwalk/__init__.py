"""Simulation and non-Markovianity diagnostics for PT-symmetric split-step quantum walks."""

__version__ = "0.1.0"

from .numerics import (  # noqa: E402
    EigenDecomp,
    NonDiagonalizable,
    NotPSD,
    NumericsError,
    Singular,
    eig,
    inv,
    pinv,
    sqrtm_psd,
    trace_norm,
)
from .walk import (  # noqa: E402
    ExceptionalPoint,
    KEigenSystem,
    KGrid,
    NoTransition,
    WalkParams,
    a_coefficient,
    coin_walk_operator,
    eigensystem,
    ep_contour_grid,
    exceptional_point,
    regime,
)
from .series import MeasureSeries  # noqa: E402
from .evolution import (  # noqa: E402
    CoinMetric,
    CoinState,
    Formalism,
    FullState,
    coin_metric,
    coin_state,
    evolve,
    evolve_full,
    evolve_metric,
    evolve_normalised,
    evolve_raw,
    partial_trace_position,
    position_oracle,
    trace_series,
)
from .measures import (  # noqa: E402
    ChoiMatrix,
    FormalismMismatch,
    MapMatrix,
    blp_series,
    choi_of_map,
    entanglement_entropy,
    entanglement_series,
    intermediate_map,
    map_matrix,
    map_series,
    purity,
    purity_series,
    rhp_from_maps,
    rhp_series,
    trace_distance,
    trace_distance_series,
)
