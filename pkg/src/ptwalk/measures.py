"""Non-Markovianity and entanglement diagnostics of the coin dynamics.

Vectorisation is row-major throughout: ``vec(X)[2*i + j] = X[i, j]``, so
``vec(A X B) = kron(A, B.T) @ vec(X)``. A map on 2x2 matrices is then a 4x4
matrix whose columns are the images of ``|0><0|, |0><1|, |1><0|, |1><1|``.

Choi matrices use the normalised maximally entangled state and put the map's
output on the first tensor factor::

    C = sum_ij Lambda(|i><j|) (x) |i><j| / 2

so a completely positive trace-preserving map has unit trace norm and
``g = ||C||_1 - 1`` vanishes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evolution import Formalism, _as_matrix, _Blocks, reduced_series
from .numerics import eig2_stack, pinv, trace_norm
from .series import MeasureSeries
from . import _extended as _ext
from .walk import KGrid, WalkParams, coin_walk_operator, eigen_stack, regime

__all__ = [
    "FormalismMismatch",
    "MeasureSeries",
    "MapMatrix",
    "ChoiMatrix",
    "vec",
    "devec",
    "SWAP_23",
    "trace_distance",
    "trace_distance_series",
    "blp_from_distances",
    "blp_series",
    "map_matrix",
    "map_series",
    "intermediate_map",
    "choi_of_map",
    "rhp_from_maps",
    "rhp_series",
    "auto_precision",
    "purity",
    "entanglement_entropy",
    "entanglement_series",
    "purity_series",
]


class FormalismMismatch(ValueError):
    pass


def vec(X) -> np.ndarray:
    return np.asarray(X, dtype=complex).reshape(-1)


def devec(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    d = int(round(np.sqrt(v.size)))
    return v.reshape(d, d)


_P = np.eye(4)[[0, 2, 1, 3]]
SWAP_23 = np.kron(np.kron(np.eye(2), _P), np.eye(2))
_PHI = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


@dataclass(frozen=True)
class MapMatrix:
    matrix: np.ndarray
    from_t: int
    to_t: int
    pseudo_inverted: bool = False

    def apply(self, rho) -> np.ndarray:
        return devec(self.matrix @ vec(rho))


@dataclass(frozen=True)
class ChoiMatrix:
    matrix: np.ndarray
    from_t: int
    to_t: int

    def partial_trace_out(self) -> np.ndarray:
        """Trace over the output (first) factor."""
        return np.einsum("aiaj->ij", self.matrix.reshape(2, 2, 2, 2))


# -- trace distance and BLP --------------------------------------------------


def _half_abs_eig(delta: np.ndarray, hermitian: bool) -> float:
    if hermitian:
        w = np.linalg.eigvalsh(0.5 * (delta + delta.conj().T))
    elif delta.shape == (2, 2):
        w = eig2_stack(delta)[0]
    else:
        w = np.linalg.eigvals(delta)
    return 0.5 * float(np.abs(w).sum())


def trace_distance(rho, sigma) -> float:
    """Half the (generalised) trace norm of ``rho - sigma``.

    Hermitian states use the ordinary trace norm. Metric-formalism states are
    Hermitian only under the generalised adjoint, for which the trace norm is
    the sum of absolute eigenvalues of the plain difference.
    Accepts :class:`CoinState` or :class:`FullState` pairs.
    """
    if rho.formalism != sigma.formalism:
        raise FormalismMismatch(f"{rho.formalism.value} vs {sigma.formalism.value}")
    delta = np.asarray(rho.matrix) - np.asarray(sigma.matrix)
    return _half_abs_eig(delta, hermitian=rho.formalism is not Formalism.METRIC)


def _state_series(p, rho0, T, grid, formalism):
    formalism = Formalism(formalism)
    if formalism is Formalism.METRIC:
        states, traces = reduced_series(p, rho0, T, grid, Formalism.METRIC)
        return states / traces[0].real
    states, traces = reduced_series(p, rho0, T, grid, Formalism.RAW)
    if formalism is Formalism.NORMALISED:
        return states / traces.real[:, None, None]
    return states


def trace_distance_series(p: WalkParams, rho0, sigma0, T: int, grid: KGrid | None = None,
                          formalism=Formalism.METRIC) -> MeasureSeries:
    grid = grid or KGrid()
    formalism = Formalism(formalism)
    R = _state_series(p, rho0, T, grid, formalism)
    S = _state_series(p, sigma0, T, grid, formalism)
    herm = formalism is not Formalism.METRIC
    D = np.array([_half_abs_eig(R[t] - S[t], herm) for t in range(T + 1)])
    return MeasureSeries(f"trace_distance[{formalism.value}]", np.arange(T + 1), D)


def blp_from_distances(D) -> np.ndarray:
    """Accumulate the positive increments of a trace-distance sequence, starting at 0."""
    D = np.asarray(D, dtype=float)
    inc = np.diff(D)
    return np.concatenate([[0.0], np.cumsum(np.where(inc > 0, inc, 0.0))])


def blp_series(p: WalkParams, rho0="up", sigma0="plus", T: int = 50, grid: KGrid | None = None,
               formalism=Formalism.METRIC) -> MeasureSeries:
    """Discrete BLP measure ``N(t)`` for a fixed pair of initial coin states."""
    if np.allclose(_as_matrix(rho0), _as_matrix(sigma0)):
        raise ValueError("the two initial states must differ")
    D = trace_distance_series(p, rho0, sigma0, T, grid, formalism)
    return MeasureSeries(
        f"blp[{Formalism(formalism).value}]",
        D.times,
        blp_from_distances(D.values),
        extra={"trace_distance": D.values},
    )


# -- maps and the RHP measure ------------------------------------------------


def _superop(A, B):
    # X -> A X B on a stack
    return np.einsum("...ij,...lk->...ikjl", A, B).reshape(A.shape[:-2] + (4, 4))


def auto_precision(p: WalkParams, T: int, grid: KGrid | None = None) -> int:
    """Working precision in bits needed for the map chain up to ``T`` steps.

    Double precision (53 bits) while the eigenvalue moduli stay on the unit
    circle; otherwise enough guard bits to absorb the ``|lambda_+|^{2T}``
    spread between growing and decaying modes.
    """
    grid = grid or KGrid()
    _, lam, _ = eigen_stack(p, grid.points)
    spread = float(np.max(np.abs(np.log(np.abs(lam)))))
    growth_bits = 2 * T * spread / np.log(2)
    if growth_bits < 12:
        return 53
    return int(128 + 2 * np.ceil(growth_bits))


class _Chain:
    """``Lt(t)`` for successive ``t`` in a chosen precision.

    ``Lt(t)`` is the momentum average of the per-block superoperator, before
    any normalisation; see :func:`map_series`.
    """

    def __init__(self, p, grid, formalism, bits):
        self.n = grid.n
        self.bits = bits
        self.formalism = Formalism(formalism)
        self.t = -1
        hp = bits > 53
        if self.formalism is Formalism.METRIC:
            _, lam, V = eigen_stack(p, grid.points)
            if hp:
                V = _ext.to_obj(V)
                Vi = _ext.inv2(V)
                lam = _ext.to_obj(lam)
                ratio = lam[:, :, None] / lam[:, None, :]
                pre = _ext.superop(Vi, _ext.conj(np.swapaxes(Vi, -1, -2)))
                post = _ext.superop(V, Vi)
            else:
                Vi = np.linalg.inv(V)
                ratio = lam[:, :, None] / lam[:, None, :]
                pre = _superop(Vi, Vi.conj().swapaxes(-1, -2))
                post = _superop(V, Vi)
            # L_k(t) = post_k diag(r_k^t) pre_k, flattened over (k, mode)
            self.P = post.transpose(1, 0, 2).reshape(4, 4 * self.n)
            self.Q = pre.reshape(4 * self.n, 4)
            self.r = ratio.reshape(4 * self.n)
            self.w = None
        else:
            W = coin_walk_operator(p, grid.points)
            self.W = _ext.to_obj(W) if hp else W
            self.Wt = None

    def step(self):
        self.t += 1
        if self.formalism is Formalism.METRIC:
            self.w = self.r**0 if self.w is None else self.w * self.r
            return (self.P * self.w) @ self.Q / self.n
        if self.Wt is None:
            eye = np.broadcast_to(np.eye(2, dtype=complex), self.W.shape).copy()
            self.Wt = _ext.to_obj(eye) if self.bits > 53 else eye
        else:
            self.Wt = self.W @ self.Wt
        if self.bits > 53:
            S = _ext.superop(self.Wt, _ext.conj(np.swapaxes(self.Wt, -1, -2)))
        else:
            S = _superop(self.Wt, self.Wt.conj().swapaxes(-1, -2))
        return S.sum(axis=0) / self.n


def _map_chain(p, T, grid, formalism, bits):
    """``L(t, 0)`` for ``t = 0..T`` in native form (ndarray or mpmath matrix)."""
    chain = _Chain(p, grid, formalism, bits)
    hp = bits > 53
    out = []
    L0inv = None
    for _ in range(T + 1):
        Lt = chain.step()
        if hp:
            Lt = _ext.to_mp(Lt)
        if chain.formalism is Formalism.METRIC:
            if L0inv is None:
                L0inv = Lt**-1 if hp else np.linalg.inv(Lt)
            Lt = Lt * L0inv if hp else Lt @ L0inv
        out.append(Lt)
    return out


def map_series(p: WalkParams, T: int, grid: KGrid | None = None, formalism=Formalism.METRIC,
               precision: int | None = None) -> list[MapMatrix]:
    """Map matrices ``L(t, 0)`` for ``t = 0..T``.

    Raw and normalised formalisms give the linear momentum average of
    ``X -> W^t X W^dagger^t``. The metric formalism gives
    ``Lt(t) Lt(0)^-1`` where ``Lt(t)`` is the momentum average of
    ``X -> W^t X W^dagger^t G_c(k, t)``; this makes ``L(0, 0)`` the identity,
    maps the metric state at 0 to the metric state at ``t``, and preserves
    its trace.

    ``precision`` is the working precision in bits (default: chosen by
    :func:`auto_precision`); results are returned in double precision.
    """
    grid = grid or KGrid()
    bits = auto_precision(p, T, grid) if precision is None else int(precision)
    if bits > 53:
        with _ext.Precision(bits):
            chain = [_ext.mp_to_complex(L) for L in _map_chain(p, T, grid, formalism, bits)]
    else:
        chain = _map_chain(p, T, grid, formalism, 53)
    return [MapMatrix(L, 0, t) for t, L in enumerate(chain)]


def map_matrix(p: WalkParams, t: int, grid: KGrid | None = None, formalism=Formalism.METRIC,
               precision: int | None = None) -> MapMatrix:
    if t < 0:
        raise ValueError("t must be non-negative")
    return map_series(p, t, grid, formalism, precision)[-1]


def intermediate_map(L_next: MapMatrix, L_curr: MapMatrix, rtol: float = 1e-10) -> MapMatrix:
    """``L_next @ L_curr^-1``, the map from ``L_curr.to_t`` to ``L_next.to_t``.

    Falls back to the pseudo-inverse, and sets ``pseudo_inverted``, when the
    smallest singular value of ``L_curr`` is below ``rtol`` times the largest.
    """
    if L_next.from_t != L_curr.from_t:
        raise ValueError("maps must share their starting time")
    s = np.linalg.svd(L_curr.matrix, compute_uv=False)
    if s[0] > 0 and s[-1] >= rtol * s[0]:
        M = L_next.matrix @ np.linalg.inv(L_curr.matrix)
        flagged = False
    else:
        M = L_next.matrix @ pinv(L_curr.matrix, rtol)
        flagged = True
    return MapMatrix(M, L_curr.to_t, L_next.to_t, pseudo_inverted=flagged)


def _intermediate_hp(L_next, L_curr, rtol):
    s = _ext.svdvals(L_curr)
    if s[0] > 0 and s[-1] >= rtol * s[0]:
        return _ext.mp_to_complex(L_next * L_curr**-1), False
    return _ext.mp_to_complex(L_next * _ext.pinv(L_curr, rtol)), True


def choi_of_map(L: MapMatrix) -> ChoiMatrix:
    """Choi matrix through the swap of the second and third qubit factors."""
    L4 = np.asarray(L.matrix, dtype=complex)
    phi = vec(np.outer(_PHI, _PHI.conj()))
    C = devec(SWAP_23 @ np.kron(L4, np.eye(4)) @ SWAP_23 @ phi)
    return ChoiMatrix(C, L.from_t, L.to_t)


def rhp_from_maps(steps: list[MapMatrix]) -> MeasureSeries:
    """RHP series from a chain of step maps ``L(1, 0), L(2, 1), ...``."""
    T = len(steps)
    g = np.zeros(T + 1)
    tr = np.ones(T + 1)
    tp_dev = np.zeros(T + 1)
    flags = [""] * (T + 1)
    for t, step in enumerate(steps, start=1):
        C = choi_of_map(step)
        g[t] = trace_norm(C.matrix) - 1.0
        tr[t] = np.trace(C.matrix).real
        tp_dev[t] = np.abs(C.partial_trace_out() - np.eye(2) / 2).max()
        if step.pseudo_inverted:
            flags[t] = "pinv"
    return MeasureSeries(
        "rhp",
        np.arange(T + 1),
        np.cumsum(g),
        flags=flags,
        extra={"g": g, "g_display": np.maximum(g, 0.0), "choi_trace": tr, "tp_deviation": tp_dev},
    )


def rhp_series(p: WalkParams, T: int = 50, grid: KGrid | None = None, formalism=Formalism.METRIC,
               rtol: float = 1e-10, precision: int | None = None) -> MeasureSeries:
    """Cumulative RHP measure ``I(t) = sum_{s=1..t} g(s)``.

    ``g(s) = ||C(s)||_1 - 1`` for the Choi matrix of the step map
    ``L(s, s-1)``. Raw ``g`` values are summed; ``extra["g_display"]`` holds
    them clipped at zero. Points whose step map needed a pseudo-inverse are
    flagged ``"pinv"``.

    ``rtol`` applies at double precision. When the chain runs in extended
    precision (see :func:`auto_precision`) the threshold shrinks with the
    working epsilon, so only maps singular at that precision are
    pseudo-inverted.
    """
    if T < 1:
        raise ValueError("T must be at least 1")
    grid = grid or KGrid()
    bits = auto_precision(p, T, grid) if precision is None else int(precision)
    steps = []
    if bits > 53:
        with _ext.Precision(bits):
            chain = _map_chain(p, T, grid, formalism, bits)
            rtol_eff = rtol * 2.0 ** (53 - bits)
            for t in range(1, T + 1):
                M, flagged = _intermediate_hp(chain[t], chain[t - 1], rtol_eff)
                steps.append(MapMatrix(M, t - 1, t, pseudo_inverted=flagged))
    else:
        chain = [MapMatrix(L, 0, t) for t, L in enumerate(_map_chain(p, T, grid, formalism, 53))]
        steps = [intermediate_map(chain[t], chain[t - 1], rtol) for t in range(1, T + 1)]
    out = rhp_from_maps(steps)
    out.label = f"rhp[{Formalism(formalism).value}]"
    out.extra["precision_bits"] = np.full(T + 1, bits)
    return out


# -- purity and entanglement -------------------------------------------------


def purity(state) -> float:
    """``tr(rho^2)`` for a coin state, full state or bare matrix."""
    M = np.asarray(getattr(state, "matrix", state), dtype=complex)
    val = np.einsum("ij,ji->", M, M)
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise ValueError(f"purity has imaginary part {val.imag:.3g}")
    return float(val.real)


def entanglement_entropy(rho_c) -> float:
    """``-sum |l| ln |l|`` over the eigenvalues of the coin state (``0 ln 0 = 0``)."""
    M = np.asarray(getattr(rho_c, "matrix", rho_c), dtype=complex)
    w = np.abs(eig2_stack(M)[0])
    nz = w[w > 0]
    return float(max(-(nz * np.log(nz)).sum(), 0.0))


def entanglement_series(p: WalkParams, rho0="plus", T: int = 50, grid: KGrid | None = None,
                        formalism=Formalism.METRIC) -> MeasureSeries:
    """Entanglement entropy of the reduced coin state for ``t = 0..T``.

    Beyond the exceptional point every point is flagged ``"beyond_ep"``; below
    it, eigenvalue moduli above ``1 + 1e-8`` are an error.
    """
    grid = grid or KGrid()
    states = _state_series(p, rho0, T, grid, formalism)
    beyond = regime(p) != "unbroken"
    ee = np.empty(T + 1)
    for t in range(T + 1):
        if not beyond:
            w = np.abs(eig2_stack(states[t])[0])
            if w.max() > 1 + 1e-8:
                raise ValueError(f"eigenvalue modulus {w.max():.6g} > 1 at t={t} below the exceptional point")
        ee[t] = entanglement_entropy(states[t])
    flags = ["beyond_ep" if beyond else ""] * (T + 1)
    return MeasureSeries(f"entanglement[{Formalism(formalism).value}]", np.arange(T + 1), ee, flags=flags)


def purity_series(p: WalkParams, rho0="up", T: int = 50, grid: KGrid | None = None,
                  formalism=Formalism.METRIC) -> MeasureSeries:
    grid = grid or KGrid()
    states = _state_series(p, rho0, T, grid, formalism)
    vals = np.array([np.einsum("ij,ji->", s, s).real for s in states])
    return MeasureSeries(f"purity[{Formalism(formalism).value}]", np.arange(T + 1), vals)
