"""Reduced coin dynamics under trace normalisation and under the metric formalism.

The walk is block diagonal in momentum, so the reduced coin state after
``t`` steps is an average over a momentum grid of per-momentum blocks::

    raw:     rho_k(t)    = W_c(k)^t rho0 W_c(k)^{dagger t}
    metric:  rhobar_k(t) = W_c(k)^t rho0 W_c(k)^{dagger t} G_c(k, t)

with ``G_c(k, t) = (sum_i |lambda_i|^{2t} |phi_i><phi_i|)^-1`` built from the
unit-norm eigenvectors of the one-step operator. Writing ``V`` for the
eigenvector matrix, the metric block is the similarity transform
``V Lambda^t M Lambda^-t V^-1`` with ``M = V^-1 rho0 V^-dagger``; that form is
what gets evaluated, since it never forms the exponentially large and small
factors separately.

:func:`position_oracle` repeats the computation on an explicit periodic
lattice and is the independent check of the Fourier route.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .numerics import NonDiagonalizable
from .series import MeasureSeries
from .walk import KGrid, WalkParams, coin_operator, eigen_stack, coin_walk_operator, gain_loss

__all__ = [
    "Formalism",
    "CoinState",
    "CoinMetric",
    "FullState",
    "PRESETS",
    "coin_state",
    "coin_metric",
    "reduced_blocks",
    "reduced_series",
    "evolve_raw",
    "evolve_normalised",
    "evolve_metric",
    "evolve",
    "metric_norm",
    "full_walk_operator",
    "full_metric",
    "evolve_full",
    "partial_trace_position",
    "position_oracle",
    "trace_series",
]


class Formalism(str, Enum):
    RAW = "raw"
    NORMALISED = "normalised"
    METRIC = "metric"


PRESETS = {
    "up": np.array([1, 0], dtype=complex),
    "down": np.array([0, 1], dtype=complex),
    "plus": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "minus": np.array([1, -1], dtype=complex) / np.sqrt(2),
    "plus_i": np.array([1, 1j], dtype=complex) / np.sqrt(2),
}


@dataclass(frozen=True)
class CoinState:
    """2x2 coin density matrix tagged with the formalism that produced it."""

    matrix: np.ndarray
    formalism: Formalism = Formalism.RAW

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2) or not np.all(np.isfinite(m)):
            raise ValueError("coin state must be a finite 2x2 matrix")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "formalism", Formalism(self.formalism))

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))


def coin_state(spec) -> CoinState:
    """Build an initial coin state from a preset name, a 2-vector or a 2x2 matrix."""
    if isinstance(spec, CoinState):
        return spec
    if isinstance(spec, str):
        try:
            psi = PRESETS[spec]
        except KeyError:
            raise ValueError(f"unknown state preset {spec!r}; choose from {sorted(PRESETS)}") from None
        return CoinState(np.outer(psi, psi.conj()))
    arr = np.asarray(spec, dtype=complex)
    if arr.shape == (2,):
        arr = arr / np.linalg.norm(arr)
        return CoinState(np.outer(arr, arr.conj()))
    rho = CoinState(arr)
    if np.linalg.norm(arr - arr.conj().T) > 1e-10 or abs(np.trace(arr) - 1) > 1e-10:
        raise ValueError("initial coin state must be Hermitian with unit trace")
    if np.linalg.eigvalsh(0.5 * (arr + arr.conj().T)).min() < -1e-10:
        raise ValueError("initial coin state must be positive semi-definite")
    return rho


@dataclass(frozen=True)
class CoinMetric:
    k: float
    t: int
    matrix: np.ndarray


def _metric_from_eigen(lam, V, t):
    # V^-dagger diag(|lambda|^-2t) V^-1
    Vinv = np.linalg.inv(V)
    d = np.abs(lam) ** (-2.0 * t)
    return Vinv.conj().swapaxes(-1, -2) @ (d[..., :, None] * Vinv)


def coin_metric(p: WalkParams, k: float, t: int) -> CoinMetric:
    """Momentum-resolved coin metric after ``t`` steps.

    Raises :class:`~ptwalk.walk.ExceptionalPoint` when the eigenvectors at
    ``k`` coalesce.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    _, lam, V = eigen_stack(p, [k])
    G = _metric_from_eigen(lam[0], V[0], t)
    return CoinMetric(k=float(k), t=int(t), matrix=0.5 * (G + G.conj().T))


# -- Fourier route -----------------------------------------------------------


class _Blocks:
    """Per-momentum data shared by every time step."""

    def __init__(self, p: WalkParams, rho0: np.ndarray, grid: KGrid, metric: bool):
        self.ks = grid.points
        self.n = grid.n
        self.rho0 = rho0
        self.W = coin_walk_operator(p, self.ks)
        self.metric = metric
        if metric:
            _, lam, V = eigen_stack(p, self.ks)
            self.lam = lam
            self.V = V
            self.Vinv = np.linalg.inv(V)
            self.M = self.Vinv @ rho0 @ self.Vinv.conj().swapaxes(-1, -2)
            self.ratio = lam[:, :, None] / lam[:, None, :]
            # cyclic trace of each block is tr(M), exactly conserved
            self.trace0 = complex(np.trace(self.M, axis1=1, axis2=2).sum() / self.n)

    def metric_blocks(self, t):
        X = self.M * self.ratio**t
        return self.V @ X @ self.Vinv

    def raw_blocks_from_power(self, Wt):
        return Wt @ self.rho0 @ Wt.conj().swapaxes(-1, -2)


def _as_matrix(rho0) -> np.ndarray:
    return coin_state(rho0).matrix


def reduced_blocks(p: WalkParams, rho0, t: int, grid: KGrid, formalism=Formalism.RAW):
    """Per-momentum blocks at time ``t``, shape ``(grid.n, 2, 2)``, before averaging."""
    if t < 0:
        raise ValueError("t must be non-negative")
    formalism = Formalism(formalism)
    B = _Blocks(p, _as_matrix(rho0), grid, formalism is Formalism.METRIC)
    if B.metric:
        return B.metric_blocks(t)
    return B.raw_blocks_from_power(np.linalg.matrix_power(B.W, t))


def _average(blocks):
    # ordered pairwise reduction along k; deterministic for a fixed grid
    return blocks.sum(axis=0) / blocks.shape[0]


def reduced_series(p: WalkParams, rho0, T: int, grid: KGrid, formalism=Formalism.RAW):
    """Unrescaled reduced states for ``t = 0..T``.

    Returns
    -------
    states : ndarray, shape (T + 1, 2, 2)
    traces : ndarray, shape (T + 1,)
        Traces of the unrescaled states. In the metric formalism each block's
        trace is taken in its eigenframe, where it equals ``tr M_k`` for all t.
    """
    if T < 0:
        raise ValueError("T must be non-negative")
    formalism = Formalism(formalism)
    B = _Blocks(p, _as_matrix(rho0), grid, formalism is Formalism.METRIC)
    states = np.empty((T + 1, 2, 2), dtype=complex)
    traces = np.empty(T + 1, dtype=complex)
    if B.metric:
        for t in range(T + 1):
            states[t] = _average(B.metric_blocks(t))
            traces[t] = np.trace(_average(B.M * B.ratio**t))
    else:
        Wt = np.broadcast_to(np.eye(2, dtype=complex), B.W.shape).copy()
        for t in range(T + 1):
            if t:
                Wt = B.W @ Wt
            states[t] = _average(B.raw_blocks_from_power(Wt))
            traces[t] = np.trace(states[t])
    return states, traces


def metric_norm(p: WalkParams, rho0, grid: KGrid) -> float:
    """Time-independent trace of the unrescaled metric state, ``tr(rho0 <G_c(k, 0)>_k)``."""
    B = _Blocks(p, _as_matrix(rho0), grid, metric=True)
    return float(B.trace0.real)


def evolve_raw(p: WalkParams, rho0, t: int, grid: KGrid | None = None) -> CoinState:
    """Momentum average of ``W^t rho0 W^dagger^t`` without any normalisation."""
    grid = grid or KGrid()
    return CoinState(_average(reduced_blocks(p, rho0, t, grid, Formalism.RAW)), Formalism.RAW)


def evolve_normalised(p: WalkParams, rho0, t: int, grid: KGrid | None = None) -> CoinState:
    """Raw reduced state divided by its own trace."""
    grid = grid or KGrid()
    rho = _average(reduced_blocks(p, rho0, t, grid, Formalism.RAW))
    return CoinState(rho / np.trace(rho).real, Formalism.NORMALISED)


def evolve_metric(p: WalkParams, rho0, t: int, grid: KGrid | None = None) -> CoinState:
    """Metric-corrected reduced state, rescaled by its conserved trace.

    Raises :class:`~ptwalk.walk.ExceptionalPoint` if a grid momentum sits on
    ``|a(k)| = 1``; a half-step shifted grid usually avoids this.
    """
    grid = grid or KGrid()
    if t < 0:
        raise ValueError("t must be non-negative")
    B = _Blocks(p, _as_matrix(rho0), grid, metric=True)
    return CoinState(_average(B.metric_blocks(t)) / B.trace0.real, Formalism.METRIC)


def evolve(p: WalkParams, rho0, t: int, grid: KGrid | None = None, formalism=Formalism.NORMALISED):
    formalism = Formalism(formalism)
    fn = {
        Formalism.RAW: evolve_raw,
        Formalism.NORMALISED: evolve_normalised,
        Formalism.METRIC: evolve_metric,
    }[formalism]
    return fn(p, rho0, t, grid)


def trace_series(p: WalkParams, rho0, T: int, grid: KGrid | None = None, formalism=Formalism.RAW) -> MeasureSeries:
    """Trace of the unrescaled reduced state for ``t = 0..T``.

    The raw and normalised formalisms both report the pre-normalisation trace.
    """
    grid = grid or KGrid()
    formalism = Formalism(formalism)
    use = Formalism.METRIC if formalism is Formalism.METRIC else Formalism.RAW
    _, traces = reduced_series(p, rho0, T, grid, use)
    return MeasureSeries(f"trace[{use.value}]", np.arange(T + 1), traces.real)


# -- position-space oracle ---------------------------------------------------


@dataclass(frozen=True)
class FullState:
    """Density-like matrix on a periodic ring of ``lattice_size`` sites times the coin.

    Basis index is ``2 * x + c`` with site ``x`` in ``0..lattice_size-1``
    (site 0 is the origin) and coin ``c`` (0 = up).
    """

    lattice_size: int
    matrix: np.ndarray
    formalism: Formalism = Formalism.RAW

    @classmethod
    def origin(cls, coin, lattice_size: int) -> "FullState":
        """Walker localised at site 0 with the given coin state."""
        if lattice_size < 1:
            raise ValueError("lattice_size must be positive")
        rho_c = coin_state(coin).matrix
        pos = np.zeros((lattice_size, lattice_size))
        pos[0, 0] = 1.0
        return cls(lattice_size, np.kron(pos, rho_c))


def full_walk_operator(p: WalkParams, lattice_size: int) -> np.ndarray:
    """Dense one-step walk operator on the ring, same factor order as :func:`coin_walk_operator`."""
    N = lattice_size
    S = np.zeros((2 * N, 2 * N), dtype=complex)
    for x in range(N):
        S[2 * ((x + 1) % N), 2 * x] += 1.0
        S[2 * ((x - 1) % N) + 1, 2 * x + 1] += 1.0
    eye = np.eye(N)
    right = np.kron(eye, gain_loss(-p.gamma) @ coin_operator(p.theta2))
    left = np.kron(eye, gain_loss(p.gamma) @ coin_operator(p.theta1))
    return S @ right @ S @ left


def _cluster(values, tol):
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) < tol * max(1.0, abs(values[i])):
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _full_eigen(W):
    lam, V = np.linalg.eig(W)
    V = V / np.linalg.norm(V, axis=0)
    # orthonormal basis inside each degenerate eigenspace: the natural
    # momentum eigenvectors |k>|phi(k)> sharing an eigenvalue are orthogonal
    for idx in _cluster(lam, 1e-8):
        if len(idx) > 1:
            q, _ = np.linalg.qr(V[:, idx])
            V[:, idx] = q
    cond = np.linalg.cond(V)
    if not np.isfinite(cond) or cond > 1e10:
        raise NonDiagonalizable(f"full walk operator eigenvector condition {cond:.3g}")
    return lam, V


def full_metric(p: WalkParams, lattice_size: int, t: int) -> np.ndarray:
    """Metric ``(sum_n |lambda_n|^{2t} |n><n|)^-1`` of the full ring walk operator."""
    lam, V = _full_eigen(full_walk_operator(p, lattice_size))
    Vinv = np.linalg.inv(V)
    d = np.abs(lam) ** (-2.0 * t)
    return Vinv.conj().T @ (d[:, None] * Vinv)


def evolve_full(p: WalkParams, rho0_full: FullState, t: int, formalism=Formalism.RAW) -> FullState:
    """Evolve the full state on the ring by explicit matrix powers.

    The metric branch returns ``W^t rho0 W^dagger^t G(t)`` divided by its
    conserved trace ``tr(rho0 G(0))``; the normalised branch divides by the
    current trace.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    formalism = Formalism(formalism)
    N = rho0_full.lattice_size
    W = full_walk_operator(p, N)
    Wt = np.linalg.matrix_power(W, t)
    rho = Wt @ rho0_full.matrix @ Wt.conj().T
    if formalism is Formalism.NORMALISED:
        rho = rho / np.trace(rho).real
    elif formalism is Formalism.METRIC:
        lam, V = _full_eigen(W)
        Vinv = np.linalg.inv(V)
        G0 = Vinv.conj().T @ Vinv
        Gt = Vinv.conj().T @ ((np.abs(lam) ** (-2.0 * t))[:, None] * Vinv)
        rho = rho @ Gt / np.trace(rho0_full.matrix @ G0).real
    return FullState(N, rho, formalism)


def partial_trace_position(full: FullState) -> np.ndarray:
    N = full.lattice_size
    return np.einsum("xaxb->ab", full.matrix.reshape(N, 2, N, 2))


def position_oracle(p: WalkParams, rho0_full: FullState, t: int, formalism=Formalism.NORMALISED) -> CoinState:
    """Reduced coin state from explicit evolution on a periodic lattice.

    With the Bloch momenta of the ring as the grid (:meth:`KGrid.for_lattice`)
    this reproduces the Fourier route exactly.
    """
    full = evolve_full(p, rho0_full, t, formalism)
    return CoinState(partial_trace_position(full), Formalism(formalism))
