"""PT-symmetric split-step walk operators in momentum space.

One step of the walk in the coin space at momentum ``k`` is::

    W_c(k) = S(k) G^-1 C(theta2) S(k) G C(theta1)

with ``S(k) = diag(e^{ik}, e^{-ik})``, ``G = diag(e^gamma, e^-gamma)`` and the
symmetric coin rotation ``C``. Its eigenvalues are ``a +- sqrt(a^2 - 1)`` where
``a = cos(2k) cos(theta1) cos(theta2) - cosh(2 gamma) sin(theta1) sin(theta2)``,
so the spectrum leaves the unit circle once ``a`` exceeds one.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .numerics import COND_LIMIT, NumericsError, eig2_stack

__all__ = [
    "ExceptionalPoint",
    "NoTransition",
    "WalkParams",
    "KGrid",
    "KEigenSystem",
    "coin_operator",
    "gain_loss",
    "shift_k",
    "coin_walk_operator",
    "a_coefficient",
    "eigensystem",
    "eigen_stack",
    "exceptional_point",
    "ep_contour_grid",
    "regime",
    "EP_TOL",
]

EP_TOL = 1e-10


class ExceptionalPoint(NumericsError):
    """Eigenvectors of the walk operator coalesce (``|a| = 1``)."""

    def __init__(self, msg, gamma=None, k=None):
        super().__init__(msg)
        self.gamma = gamma
        self.k = k


class NoTransition(ValueError):
    """The coin angles admit no PT-breaking transition."""


@dataclass(frozen=True)
class WalkParams:
    """Coin angles (radians) and gain/loss strength of the walk."""

    theta1: float
    theta2: float
    gamma: float = 0.0

    def __post_init__(self):
        for name in ("theta1", "theta2", "gamma"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.gamma < 0:
            # spectrum is even in gamma since G(-gamma) = G(gamma)^-1
            warnings.warn(f"negative gamma {self.gamma} replaced by {-self.gamma}", stacklevel=3)
            object.__setattr__(self, "gamma", -float(self.gamma))

    def with_gamma(self, gamma: float) -> "WalkParams":
        return WalkParams(self.theta1, self.theta2, gamma)


@dataclass(frozen=True)
class KGrid:
    """Uniform momentum grid on ``[-pi, pi)``.

    With ``shifted=True`` (the default) the points sit at half steps,
    ``k_j = -pi + (j + 1/2) * 2pi/n``, which avoids ``k = 0`` and ``k = +-pi``
    where the exceptional point first appears.
    """

    n: int = 512
    shifted: bool = True

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("grid size must be a positive integer")

    @property
    def delta(self) -> float:
        return 2 * np.pi / self.n

    @property
    def points(self) -> np.ndarray:
        j = np.arange(self.n)
        return -np.pi + (j + (0.5 if self.shifted else 0.0)) * self.delta

    @classmethod
    def for_lattice(cls, n_sites: int) -> "KGrid":
        """Grid of the Bloch momenta ``2 pi m / n_sites`` of a periodic ring."""
        return cls(n_sites, shifted=bool(n_sites % 2))


@dataclass(frozen=True)
class KEigenSystem:
    k: float
    lambda_plus: complex
    lambda_minus: complex
    eps_plus: complex
    eps_minus: complex
    phi_plus: np.ndarray
    phi_minus: np.ndarray
    a: float


def coin_operator(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, 1j * s], [1j * s, c]])


def gain_loss(gamma: float) -> np.ndarray:
    return np.diag([np.exp(gamma), np.exp(-gamma)]).astype(complex)


def shift_k(k):
    """Momentum-space shift ``diag(e^{ik}, e^{-ik})``; vectorised over ``k``."""
    k = np.asarray(k, dtype=float)
    out = np.zeros(k.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = np.exp(1j * k)
    out[..., 1, 1] = np.exp(-1j * k)
    return out


def coin_walk_operator(p: WalkParams, k):
    """One-step coin-space walk operator; returns a stack of shape ``k.shape + (2, 2)``."""
    S = shift_k(k)
    g = np.exp(p.gamma)
    G = np.diag([g, 1 / g]).astype(complex)
    Ginv = np.diag([1 / g, g]).astype(complex)
    right = Ginv @ coin_operator(p.theta2)
    left = G @ coin_operator(p.theta1)
    return S @ right @ S @ left


def a_coefficient(p: WalkParams, k):
    """Half trace of ``W_c(k)``."""
    k = np.asarray(k, dtype=float)
    return (
        np.cos(2 * k) * np.cos(p.theta1) * np.cos(p.theta2)
        - np.cosh(2 * p.gamma) * np.sin(p.theta1) * np.sin(p.theta2)
    )


def _closed_form(a):
    root = np.sqrt(np.asarray(a, dtype=complex) ** 2 - 1)
    return a + root, a - root


def eigen_stack(p: WalkParams, k):
    """Vectorised eigen-data over an array of momenta.

    Returns
    -------
    a : ndarray
    lam : ndarray, shape (n, 2)
        ``(lambda_plus, lambda_minus)`` from the closed form.
    V : ndarray, shape (n, 2, 2)
        Matching unit-norm eigenvectors as columns.

    Raises
    ------
    ExceptionalPoint
        If any ``|a(k)| = 1`` within ``EP_TOL`` while ``W_c(k)`` is not a
        multiple of the identity. At ``gamma = 0`` the operator is unitary, so
        a coalescence there is an ordinary degeneracy and is not reported.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    W = coin_walk_operator(p, k)
    a = a_coefficient(p, k)

    near = np.abs(np.abs(a) - 1) < EP_TOL
    scalar = np.linalg.norm(W - a[:, None, None] * np.eye(2), axis=(1, 2)) < 1e-12
    bad = near & ~scalar & (p.gamma > 0)
    if bad.any():
        k_bad = float(k[bad][0])
        raise ExceptionalPoint(
            f"exceptional point at gamma={p.gamma:.12g}, k={k_bad:.12g} (a={a[bad][0]:.15g})",
            gamma=p.gamma,
            k=k_bad,
        )

    lam_num, V_num, cond = eig2_stack(W)
    lp, lm = _closed_form(a)
    lam = np.stack([lp, lm], axis=-1)
    # pair closed-form roots with the numerically ordered eigenvectors
    direct = np.abs(lam_num[:, 0] - lp) + np.abs(lam_num[:, 1] - lm)
    crossed = np.abs(lam_num[:, 1] - lp) + np.abs(lam_num[:, 0] - lm)
    swap = crossed < direct
    V = np.where(swap[:, None, None], V_num[:, :, ::-1], V_num)
    lam_paired = np.where(swap[:, None], lam_num[:, ::-1], lam_num)
    away = np.abs(np.abs(a) - 1) > 1e-6
    err = np.abs(lam_paired - lam).max(axis=1)
    if np.any(away & (err > 1e-8)):
        raise NumericsError(f"closed-form eigenvalues disagree with numerics by {err.max():.3g}")
    if np.any(~scalar & (cond > COND_LIMIT)):
        i = int(np.argmax(np.where(scalar, 0, cond)))
        raise ExceptionalPoint(
            f"eigenvectors nearly parallel at gamma={p.gamma:.12g}, k={k[i]:.12g}",
            gamma=p.gamma,
            k=float(k[i]),
        )
    return a, lam, V


def eigensystem(p: WalkParams, k: float) -> KEigenSystem:
    """Eigenvalues, quasi-energies ``eps = i ln(lambda)`` and eigenvectors at one momentum."""
    a, lam, V = eigen_stack(p, [k])
    lp, lm = lam[0]
    return KEigenSystem(
        k=float(k),
        lambda_plus=complex(lp),
        lambda_minus=complex(lm),
        eps_plus=complex(1j * np.log(lp)),
        eps_minus=complex(1j * np.log(lm)),
        phi_plus=V[0, :, 0].copy(),
        phi_minus=V[0, :, 1].copy(),
        a=float(a[0]),
    )


def exceptional_point(theta1: float, theta2: float) -> float:
    """Smallest ``gamma`` at which ``max_k a(k)`` reaches one.

    For ``cos(theta1) cos(theta2) >= 0`` the maximum sits at ``k = 0 (mod pi)``
    and this is ``acosh[(cos t1 cos t2 - 1) / (sin t1 sin t2)] / 2``. When the
    cosine product is negative the maximum moves to ``k = pi/2`` and the
    cosine term enters with its absolute value.

    Raises
    ------
    NoTransition
        If ``sin(theta1) sin(theta2) >= 0``.
    """
    cc = np.cos(theta1) * np.cos(theta2)
    ss = np.sin(theta1) * np.sin(theta2)
    if not ss < 0:
        raise NoTransition(f"sin(theta1) sin(theta2) = {ss:.3g}; no PT transition")
    arg = (1 - abs(cc)) / (-ss)
    if arg < 1:
        # only reachable through rounding when |theta1| == |theta2|
        if arg > 1 - 1e-12:
            return 0.0
        raise NoTransition(f"acosh argument {arg:.6g} < 1")
    return 0.5 * float(np.arccosh(arg))


def ep_contour_grid(theta1_range, theta2_range, resolution: int | None = None):
    """Tabulate the exceptional point over a grid of coin angles.

    ``theta1_range`` and ``theta2_range`` are either explicit sequences of
    angles or, when ``resolution`` is given, ``(lo, hi)`` pairs sampled with
    ``resolution`` equally spaced points including both ends.

    Returns ``(theta1, theta2, grid)`` where ``grid[i, j]`` is the transition
    point at ``(theta1[i], theta2[j])`` and NaN marks cells without one.
    """
    if resolution is not None:
        t1 = np.linspace(theta1_range[0], theta1_range[1], resolution)
        t2 = np.linspace(theta2_range[0], theta2_range[1], resolution)
    else:
        t1 = np.atleast_1d(np.asarray(theta1_range, dtype=float))
        t2 = np.atleast_1d(np.asarray(theta2_range, dtype=float))
    grid = np.full((t1.size, t2.size), np.nan)
    for i, a in enumerate(t1):
        for j, b in enumerate(t2):
            try:
                grid[i, j] = exceptional_point(a, b)
            except NoTransition:
                pass
    return t1, t2, grid


def regime(p: WalkParams, ks: Sequence[float] | None = None) -> str:
    """Classify the walk as ``"unbroken"``, ``"exceptional"`` or ``"broken"``.

    Uses ``max |a(k)|`` over all momenta, or over ``ks`` when given. A unitary
    walk (``gamma == 0``) is always unbroken; ``|a| = 1`` there is a plain
    degeneracy.
    """
    if p.gamma == 0:
        return "unbroken"
    if ks is None:
        cc = np.cos(p.theta1) * np.cos(p.theta2)
        ss = np.sin(p.theta1) * np.sin(p.theta2)
        amax = abs(cc) + np.cosh(2 * p.gamma) * abs(ss)
    else:
        amax = float(np.max(np.abs(a_coefficient(p, ks))))
    if amax < 1 - EP_TOL:
        return "unbroken"
    if amax > 1 + EP_TOL:
        return "broken"
    return "exceptional"
