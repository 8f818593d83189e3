import warnings

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from ptwalk.numerics import eig
from ptwalk.walk import (
    ExceptionalPoint,
    KGrid,
    NoTransition,
    WalkParams,
    a_coefficient,
    coin_operator,
    coin_walk_operator,
    eigen_stack,
    eigensystem,
    ep_contour_grid,
    exceptional_point,
    gain_loss,
    regime,
    shift_k,
)

TH1, TH2 = np.pi / 4, -np.pi / 7
GAMMA_PT = exceptional_point(TH1, TH2)

angle = st.floats(-np.pi, np.pi, allow_nan=False)
theta1_dom = st.floats(0.05, np.pi - 0.05)
theta2_dom = st.floats(-np.pi + 0.05, -0.05)
gammas = st.floats(0, 1.0)


def test_coin_operator_values():
    np.testing.assert_allclose(coin_operator(0), np.eye(2))
    np.testing.assert_allclose(coin_operator(np.pi / 2), [[0, 1j], [1j, 0]], atol=1e-16)
    r = 1 / np.sqrt(2)
    np.testing.assert_allclose(coin_operator(np.pi / 4), [[r, 1j * r], [1j * r, r]])


def test_gain_loss_values():
    np.testing.assert_allclose(gain_loss(0), np.eye(2))
    np.testing.assert_allclose(gain_loss(np.log(1.2)), np.diag([1.2, 1 / 1.2]))
    np.testing.assert_allclose(np.diag(gain_loss(0.29798)).real, [1.34714, 0.74231], atol=1e-5)


def test_shift_values():
    np.testing.assert_allclose(shift_k(0), np.eye(2))
    np.testing.assert_allclose(shift_k(np.pi / 2), np.diag([1j, -1j]), atol=1e-16)
    np.testing.assert_allclose(shift_k(np.pi), -np.eye(2), atol=1e-15)
    assert shift_k(np.zeros(5)).shape == (5, 2, 2)


@given(st.floats(-10, 10))
def test_walk_operator_pure_double_shift(k):
    W = coin_walk_operator(WalkParams(0, 0, 0), k)
    np.testing.assert_allclose(W, np.diag([np.exp(2j * k), np.exp(-2j * k)]), atol=1e-12)


def test_walk_operator_unitary_at_zero_gamma():
    W = coin_walk_operator(WalkParams(TH1, TH2, 0), 0.3)
    np.testing.assert_allclose(W @ W.conj().T, np.eye(2), atol=1e-14)


def test_trace_is_twice_a():
    p = WalkParams(TH1, TH2, 0.2)
    W = coin_walk_operator(p, 0.0)
    a = np.cos(TH1) * np.cos(TH2) - np.cosh(0.4) * np.sin(TH1) * np.sin(TH2)
    assert np.trace(W) == pytest.approx(2 * a, abs=1e-14)
    assert a_coefficient(p, 0.0) == pytest.approx(a, abs=1e-15)


@given(angle, angle, gammas, angle)
def test_unit_determinant(t1, t2, g, k):
    assert abs(np.linalg.det(coin_walk_operator(WalkParams(t1, t2, g), k)) - 1) < 1e-12


@given(angle, angle, gammas, st.floats(-np.pi, np.pi))
def test_trace_identity_everywhere(t1, t2, g, k):
    p = WalkParams(t1, t2, g)
    assert np.trace(coin_walk_operator(p, k)) == pytest.approx(2 * a_coefficient(p, k), abs=1e-12)


@given(angle, angle, gammas, angle)
def test_a_even_and_periodic(t1, t2, g, k):
    p = WalkParams(t1, t2, g)
    assert a_coefficient(p, k) == pytest.approx(a_coefficient(p, -k), abs=1e-12)
    assert a_coefficient(p, k) == pytest.approx(a_coefficient(p, k + 2 * np.pi), abs=1e-12)


@given(theta1_dom, theta2_dom, gammas, angle)
def test_spectral_regimes(t1, t2, g, k):
    p = WalkParams(t1, t2, g)
    a = a_coefficient(p, k)
    assume(abs(abs(a) - 1) > 1e-6)
    es = eigensystem(p, k)
    assert es.lambda_plus * es.lambda_minus == pytest.approx(1, abs=1e-10)
    if a < 1:
        assert abs(abs(es.lambda_plus) - 1) < 1e-10 and abs(abs(es.lambda_minus) - 1) < 1e-10
        assert abs(es.eps_plus.imag) < 1e-10 and abs(es.eps_minus.imag) < 1e-10
    else:
        assert abs(es.lambda_plus.imag) < 1e-10
        assert es.lambda_plus.real > 1 > es.lambda_minus.real > 0
        assert abs(es.eps_plus.real) < 1e-10 and abs(es.eps_minus.real) < 1e-10


@given(angle, angle, gammas, angle)
def test_closed_form_matches_numerics(t1, t2, g, k):
    p = WalkParams(t1, t2, g)
    a = a_coefficient(p, k)
    assume(abs(abs(a) - 1) > 1e-6)
    try:
        d = eig(coin_walk_operator(p, k))
    except Exception:
        return
    es = eigensystem(p, k)
    cf = np.array([es.lambda_plus, es.lambda_minus])
    err = min(np.abs(d.values - cf).max(), np.abs(d.values - cf[::-1]).max())
    assert err < 1e-8


def test_eigenvectors_are_unit_and_correct():
    p = WalkParams(TH1, TH2, 0.2)
    W = coin_walk_operator(p, 0.7)
    es = eigensystem(p, 0.7)
    for lam, phi in ((es.lambda_plus, es.phi_plus), (es.lambda_minus, es.phi_minus)):
        assert np.linalg.norm(phi) == pytest.approx(1)
        np.testing.assert_allclose(W @ phi, lam * phi, atol=1e-12)


def test_unitary_eigensystem():
    for k in np.linspace(-3, 3, 13):
        es = eigensystem(WalkParams(1.1, -0.4, 0), k)
        assert abs(abs(es.lambda_plus) - 1) < 1e-12
        assert abs(es.eps_plus.imag) < 1e-12 and abs(es.eps_minus.imag) < 1e-12


def test_exceptional_point_raises_at_a_equals_one():
    p = WalkParams(TH1, TH2, GAMMA_PT)
    assert a_coefficient(p, 0.0) == pytest.approx(1, abs=1e-15)
    with pytest.raises(ExceptionalPoint) as err:
        eigensystem(p, 0.0)
    assert err.value.gamma == pytest.approx(GAMMA_PT)
    assert err.value.k == 0.0


def test_above_ep_at_k0():
    p = WalkParams(TH1, TH2, 0.35)
    es = eigensystem(p, 0.0)
    a = np.cos(TH1) * np.cos(TH2) - np.cosh(0.7) * np.sin(TH1) * np.sin(TH2)
    assert es.a == pytest.approx(a) and a > 1
    assert es.lambda_plus.real == pytest.approx(a + np.sqrt(a * a - 1))
    assert es.lambda_plus * es.lambda_minus == pytest.approx(1)
    assert abs(es.eps_plus.real) < 1e-14 and es.eps_plus.imag > 0


def test_scalar_walk_operator_is_not_an_ep():
    # theta1 = theta2 = 0 at k = 0 gives W = I, where |a| = 1 is harmless
    a, lam, V = eigen_stack(WalkParams(0, 0, 0.3), [0.0])
    np.testing.assert_allclose(lam[0], [1, 1])


def test_ep_golden_values():
    assert np.exp(exceptional_point(np.pi / 4, -np.pi / 7)) == pytest.approx(1.34714, abs=1e-4)
    assert np.exp(exceptional_point(np.pi / 4, -np.pi / 6)) == pytest.approx(1.243, abs=1e-3)
    assert exceptional_point(np.pi / 4, -np.pi / 7) == pytest.approx(0.29798, abs=1e-5)


def test_ep_matches_spectral_scan(golden):
    # the oracle bisects on max_k |ln|lambda|| > 1e-8 with numpy eigvals
    val = np.exp(exceptional_point(np.pi / 3, -np.pi / 6))
    assert val == pytest.approx(golden["ep_exp_gamma_pi3_minus_pi6"], abs=1e-3)
    assert val == pytest.approx(1.468, abs=1e-3)


def test_ep_negative_cosine_product_uses_k_half_pi():
    t1, t2 = 2.2, -0.6
    g = exceptional_point(t1, t2)
    assert np.cos(t1) * np.cos(t2) < 0
    amax = max(np.abs(a_coefficient(WalkParams(t1, t2, g), np.linspace(-np.pi, np.pi, 4001))))
    assert amax == pytest.approx(1, abs=1e-9)


@given(theta1_dom, theta2_dom)
def test_ep_symmetry(t1, t2):
    try:
        g = exceptional_point(t1, t2)
    except NoTransition:
        return
    assert exceptional_point(-t2, -t1) == pytest.approx(g, abs=1e-12)
    if g > 1e-3:
        assert regime(WalkParams(t1, t2, g * 0.99)) == "unbroken"
        assert regime(WalkParams(t1, t2, g * 1.01)) == "broken"


def test_ep_no_transition():
    with pytest.raises(NoTransition):
        exceptional_point(np.pi / 4, np.pi / 7)
    with pytest.raises(NoTransition):
        exceptional_point(0.0, -1.0)


def test_ep_grid_single_cell_and_sentinel():
    t1, t2, grid = ep_contour_grid([np.pi / 4], [-np.pi / 7])
    assert grid[0, 0] == pytest.approx(0.29798, abs=1e-5)
    _, t2s, row = ep_contour_grid([np.pi / 4], [-1e-3, -1e-6, 0.0])
    assert row[0, 0] < row[0, 1] and np.isnan(row[0, 2])


def test_ep_grid_resolution_and_symmetric_cells():
    t1, t2, grid = ep_contour_grid((0.1, 3.0), (-3.0, -0.1), resolution=30)
    assert grid.shape == (30, 30)
    np.testing.assert_allclose(t1[[0, -1]], [0.1, 3.0])
    thetas = np.array([0.3, 0.7, 1.2, 2.0])
    _, _, sym = ep_contour_grid(thetas, -thetas)
    for i, th in enumerate(thetas):
        assert sym[i, i] == pytest.approx(exceptional_point(th, -th), abs=1e-12)


def test_negative_gamma_warns_and_folds():
    with pytest.warns(UserWarning):
        p = WalkParams(TH1, TH2, -0.1)
    assert p.gamma == 0.1
    with pytest.raises(ValueError):
        WalkParams(np.nan, 0)


def test_grid_points():
    g = KGrid(8)
    np.testing.assert_allclose(g.points, -np.pi + (np.arange(8) + 0.5) * np.pi / 4)
    assert 0.0 in KGrid(8, shifted=False).points
    assert not np.any(np.isclose(KGrid(512).points, 0.0))
    with pytest.raises(ValueError):
        KGrid(0)
    lat = KGrid.for_lattice(5).points
    np.testing.assert_allclose(np.sort(np.mod(lat, 2 * np.pi)), np.sort(np.mod(2 * np.pi * np.arange(5) / 5, 2 * np.pi)), atol=1e-12)


def test_regime_labels():
    assert regime(WalkParams(TH1, TH2, 0)) == "unbroken"
    assert regime(WalkParams(TH1, TH2, 0.2)) == "unbroken"
    assert regime(WalkParams(TH1, TH2, GAMMA_PT)) == "exceptional"
    assert regime(WalkParams(TH1, TH2, 0.35)) == "broken"
    # a shifted grid never reaches the maximum at k = 0
    assert regime(WalkParams(TH1, TH2, GAMMA_PT), KGrid(64).points) == "unbroken"


def test_minimum_gap_at_k0_just_below_ep():
    p = WalkParams(TH1, TH2, GAMMA_PT * 0.999)
    ks = np.linspace(-np.pi, np.pi, 2001)
    gap = 1 - np.abs(a_coefficient(p, ks))
    assert np.min(np.abs(ks[np.argsort(gap)[:2]] % np.pi)) < 1e-9 or np.isclose(np.abs(ks[np.argmin(gap)]), np.pi)
