import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ptwalk.evolution import (
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
    metric_norm,
    partial_trace_position,
    position_oracle,
    reduced_series,
    trace_series,
)
from ptwalk.walk import ExceptionalPoint, KGrid, WalkParams, coin_walk_operator, exceptional_point

TH1, TH2 = np.pi / 4, -np.pi / 7
GAMMA_PT = exceptional_point(TH1, TH2)
UP = np.diag([1.0, 0.0]).astype(complex)


def below_ep_params():
    # coin angles from the transition domain, gamma kept under 90% of the threshold
    return st.tuples(st.floats(0.2, np.pi - 0.2), st.floats(-np.pi + 0.2, -0.2), st.floats(0, 0.9)).map(
        lambda x: WalkParams(x[0], x[1], x[2] * exceptional_point(x[0], x[1]))
    )


def pure_states():
    return st.tuples(st.floats(0, np.pi), st.floats(0, 2 * np.pi)).map(
        lambda x: np.array([np.cos(x[0] / 2), np.exp(1j * x[1]) * np.sin(x[0] / 2)])
    )


# -- states ------------------------------------------------------------------


def test_presets_and_vectors():
    np.testing.assert_allclose(coin_state("up").matrix, UP)
    np.testing.assert_allclose(coin_state("plus").matrix, np.full((2, 2), 0.5))
    np.testing.assert_allclose(coin_state([2, 0]).matrix, UP)
    assert coin_state(coin_state("down")).trace == 1


@pytest.mark.parametrize(
    "bad",
    ["sideways", [[1, 1], [0, 0]], [[2, 0], [0, 0]], [[1.5, 0], [0, -0.5]], np.eye(3)],
)
def test_invalid_states(bad):
    with pytest.raises(ValueError):
        coin_state(bad)


# -- metric ------------------------------------------------------------------


@given(st.floats(-np.pi, np.pi), st.integers(0, 30))
def test_metric_identity_for_unitary_walk(k, t):
    np.testing.assert_allclose(coin_metric(WalkParams(TH1, TH2, 0), k, t).matrix, np.eye(2), atol=1e-12)


@given(below_ep_params(), st.floats(-np.pi, np.pi))
def test_metric_at_t0_is_hermitian_positive(p, k):
    try:
        G = coin_metric(p, k, 0).matrix
    except ExceptionalPoint:  # gamma_PT -> 0 as theta1 -> -theta2
        return
    np.testing.assert_allclose(G, G.conj().T, atol=1e-12)
    assert np.linalg.eigvalsh(G).min() > 0


def test_metric_recursion_example():
    p, k = WalkParams(TH1, TH2, 0.2), 0.5
    Winv = np.linalg.inv(coin_walk_operator(p, k))
    G2, G3 = coin_metric(p, k, 2).matrix, coin_metric(p, k, 3).matrix
    np.testing.assert_allclose(G3, Winv.conj().T @ G2 @ Winv, atol=1e-8)


@given(below_ep_params(), st.floats(-np.pi, np.pi), st.integers(0, 19))
def test_metric_recursion_property(p, k, t):
    Winv = np.linalg.inv(coin_walk_operator(p, k))
    try:
        G0, G1 = coin_metric(p, k, t).matrix, coin_metric(p, k, t + 1).matrix
    except ExceptionalPoint:
        return
    scale = max(1.0, np.linalg.norm(G1))
    np.testing.assert_allclose(G1, Winv.conj().T @ G0 @ Winv, atol=1e-8 * scale)


def test_metric_raises_on_exceptional_momentum():
    with pytest.raises(ExceptionalPoint):
        coin_metric(WalkParams(TH1, TH2, GAMMA_PT), 0.0, 1)


# -- Fourier route vs lattice oracle -----------------------------------------


def test_t0_returns_initial_state():
    p = WalkParams(TH1, TH2, 0.2)
    np.testing.assert_allclose(evolve_normalised(p, "plus", 0).matrix, np.full((2, 2), 0.5), atol=1e-15)
    np.testing.assert_allclose(evolve_metric(p.with_gamma(0), "plus", 0).matrix, np.full((2, 2), 0.5), atol=1e-15)
    full = FullState.origin("plus", 8)
    np.testing.assert_allclose(position_oracle(p, full, 0).matrix, np.full((2, 2), 0.5))


def test_normalised_matches_oracle_unitary():
    p = WalkParams(TH1, TH2, 0)
    full = FullState.origin("up", 64)
    for t in range(7):
        ref = position_oracle(p, full, t, Formalism.NORMALISED).matrix
        np.testing.assert_allclose(evolve_normalised(p, "up", t, KGrid(64)).matrix, ref, atol=1e-10)


def test_metric_matches_oracle():
    p = WalkParams(TH1, TH2, 0.1)
    full = FullState.origin("up", 32)
    ref = position_oracle(p, full, 4, Formalism.METRIC).matrix
    np.testing.assert_allclose(evolve_metric(p, "up", 4, KGrid.for_lattice(32)).matrix, ref, atol=1e-6)


@settings(max_examples=15)
@given(below_ep_params(), pure_states(), st.sampled_from([15, 16]), st.integers(0, 7))
def test_fourier_equivalence_property(p, psi, N, t):
    full = FullState.origin(psi, N)
    grid = KGrid.for_lattice(N)
    np.testing.assert_allclose(
        evolve_normalised(p, psi, t, grid).matrix, position_oracle(p, full, t).matrix, atol=1e-10
    )


def test_odd_lattice_metric_oracle():
    p = WalkParams(TH1, TH2, 0.15)
    full = FullState.origin("plus", 33)
    ref = position_oracle(p, full, 6, Formalism.METRIC).matrix
    np.testing.assert_allclose(evolve_metric(p, "plus", 6, KGrid.for_lattice(33)).matrix, ref, atol=1e-10)


def test_metric_state_matches_literal_oracle(golden):
    ref = np.array([a + 1j * b for a, b in golden["metric_state_exp_gamma_1p2_t7"]]).reshape(2, 2)
    got = evolve_metric(WalkParams(TH1, TH2, np.log(1.2)), "up", 7).matrix
    np.testing.assert_allclose(got, ref, atol=1e-12)


@pytest.mark.parametrize("state", ["up", "plus", "plus_i"])
def test_unitary_degeneracy_of_all_paths(state):
    p = WalkParams(TH1, TH2, 0)
    full = FullState.origin(state, 32)
    grid = KGrid.for_lattice(32)
    for t in (0, 3, 9):
        n = evolve_normalised(p, state, t, grid).matrix
        m = evolve_metric(p, state, t, grid).matrix
        o = position_oracle(p, full, t, Formalism.METRIC).matrix
        np.testing.assert_allclose(m, n, atol=1e-10)
        np.testing.assert_allclose(o, n, atol=1e-10)


def test_evolve_dispatch():
    p = WalkParams(TH1, TH2, 0.2)
    for f, fn in [("raw", evolve_raw), ("normalised", evolve_normalised), ("metric", evolve_metric)]:
        a, b = evolve(p, "up", 5, KGrid(64), f), fn(p, "up", 5, KGrid(64))
        assert a.formalism == b.formalism == Formalism(f)
        np.testing.assert_allclose(a.matrix, b.matrix)


def test_partial_trace_of_product_state():
    full = FullState.origin("plus_i", 5)
    np.testing.assert_allclose(partial_trace_position(full), coin_state("plus_i").matrix)


# -- traces ------------------------------------------------------------------


def test_trace_unitary_is_one():
    s = trace_series(WalkParams(TH1, TH2, 0), "up", 30)
    np.testing.assert_allclose(s.values, 1, atol=1e-12)


def test_raw_trace_grows_above_ep():
    s = trace_series(WalkParams(TH1, TH2, np.log(1.5)), "up", 50)
    tail = s.values[30:]
    assert np.all(np.diff(tail) > 0)
    assert s.values[50] > 1e3 * s.values[10]


def test_raw_trace_oscillates_below_ep():
    v = trace_series(WalkParams(TH1, TH2, 0.2), "up", 50).values
    d = np.diff(v[10:])
    assert np.any(d > 0) and np.any(d < 0)
    assert np.ptp(v[25:]) < 0.1 and 1.0 < v[25:].mean() < 1.2


@pytest.mark.parametrize("eg", [1.2, 1.5])
def test_metric_trace_constant(eg):
    s = trace_series(WalkParams(TH1, TH2, np.log(eg)), "up", 50, formalism="metric")
    assert np.ptp(s.values) < 1e-8
    assert s.values[0] == pytest.approx(metric_norm(WalkParams(TH1, TH2, np.log(eg)), "up", KGrid()))


@pytest.mark.parametrize(
    "p, state",
    [
        (WalkParams(TH1, TH2, 0.2), "up"),
        (WalkParams(TH1, TH2, 0.2), "down"),
        (WalkParams(TH1, TH2, 0.25), "up"),
        (WalkParams(TH1, TH2, 0.2), "plus_i"),
        (WalkParams(1.0, -0.5, 0.1), "plus_i"),
        (WalkParams(2.0, -1.0, 0.05), "plus_i"),
        (WalkParams(1.3, -0.9, 0.1), "plus_i"),
    ],
)
def test_metric_state_spectrum_real_below_ep(p, state):
    states, _ = reduced_series(p, state, 40, KGrid(), Formalism.METRIC)
    for s in states:
        assert np.abs(np.linalg.eigvals(s).imag).max() < 1e-8


@pytest.mark.parametrize(
    "p, state",
    [(WalkParams(TH1, TH2, 0.2), "plus"), (WalkParams(1.3, -0.9, 0.1), "up"), (WalkParams(2.0, -1.0, 0.05), "up")],
)
def test_metric_state_spectrum_not_always_real(p, state):
    # the momentum average of pseudo-Hermitian blocks need not be
    # pseudo-Hermitian, so a real spectrum is not guaranteed
    states, _ = reduced_series(p, state, 40, KGrid(), Formalism.METRIC)
    assert max(np.abs(np.linalg.eigvals(s).imag).max() for s in states) > 1e-3


# -- full states -------------------------------------------------------------


def test_full_metric_trace_and_purity_constant():
    p = WalkParams(TH1, TH2, 0.2)
    r0 = FullState.origin("up", 32)
    traces = [np.trace(evolve_full(p, r0, t, "metric").matrix) for t in range(8)]
    np.testing.assert_allclose(traces, 1, atol=1e-10)


def test_full_state_validation():
    with pytest.raises(ValueError):
        FullState.origin("up", 0)
    with pytest.raises(ValueError):
        evolve_full(WalkParams(TH1, TH2), FullState.origin("up", 4), -1)


def test_coinstate_rejects_nonfinite():
    with pytest.raises(ValueError):
        CoinState(np.full((2, 2), np.inf))
