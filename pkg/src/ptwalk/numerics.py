"""Dense complex matrix kernel for the 2x2 coin and 4x4 superoperator spaces.

Everything here works on plain ``numpy`` arrays of shape ``(2, 2)`` or
``(4, 4)``. The helpers validate shape and finiteness up front so that the
physics modules can assume well formed inputs.

Eigenvalue order is deterministic: descending modulus, then descending real
part, then descending imaginary part, with near ties (relative ``1e-12``)
resolved by the next key.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cmp_to_key

import numpy as np

__all__ = [
    "NumericsError",
    "NonDiagonalizable",
    "Singular",
    "NotPSD",
    "EigenDecomp",
    "as_cmat",
    "eig",
    "eig2_stack",
    "inv",
    "pinv",
    "sqrtm_psd",
    "trace_norm",
    "COND_LIMIT",
]

COND_LIMIT = 1e12
_TIE_RTOL = 1e-12
_FLOOR = 1e-14


class NumericsError(ArithmeticError):
    """Base class for kernel failures."""


class NonDiagonalizable(NumericsError):
    """Eigenvector matrix is too ill conditioned (near an exceptional point)."""


class Singular(NumericsError):
    """Matrix is numerically singular."""


class NotPSD(NumericsError):
    """Matrix has a significantly negative eigenvalue."""


@dataclass(frozen=True)
class EigenDecomp:
    """Eigenvalues with unit-norm eigenvectors stored as the columns of ``vectors``."""

    values: np.ndarray
    vectors: np.ndarray
    condition: float

    def reconstruct(self) -> np.ndarray:
        V = self.vectors
        return V @ np.diag(self.values) @ np.linalg.inv(V)


def as_cmat(A, dims=(2, 4)) -> np.ndarray:
    """Return ``A`` as a complex square array, checking dimension and finiteness."""
    M = np.asarray(A, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] not in dims:
        raise ValueError(f"expected a square matrix of dimension {dims}, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def _norm(M) -> float:
    return max(float(np.linalg.norm(M, 2)), _FLOOR)


def _compare(x: complex, y: complex) -> int:
    # -1 means x sorts first
    scale = max(abs(x), abs(y), _FLOOR)
    tol = _TIE_RTOL * scale
    for kx, ky in ((abs(x), abs(y)), (x.real, y.real), (x.imag, y.imag)):
        if kx - ky > tol:
            return -1
        if ky - kx > tol:
            return 1
    return 0


def _fix_phase(V):
    # largest component of each column made real positive, for reproducibility
    idx = np.argmax(np.abs(V), axis=-2)
    pick = np.take_along_axis(V, idx[..., None, :], axis=-2)
    phase = pick / np.abs(pick)
    return V / phase


def eig2_stack(A):
    """Closed-form eigendecomposition of a stack of 2x2 matrices.

    Parameters
    ----------
    A : ndarray, shape (..., 2, 2)

    Returns
    -------
    values : ndarray, shape (..., 2)
        Sorted eigenvalues.
    vectors : ndarray, shape (..., 2, 2)
        Unit-norm eigenvectors as columns, matching ``values``.
    cond : ndarray, shape (...)
        2-norm condition number of the eigenvector matrix (``inf`` when the
        eigenvectors coalesce).
    """
    A = np.asarray(A, dtype=complex)
    a, b = A[..., 0, 0], A[..., 0, 1]
    c, d = A[..., 1, 0], A[..., 1, 1]
    half_tr = 0.5 * (a + d)
    det = a * d - b * c
    disc = np.sqrt(0.25 * (a - d) ** 2 + b * c)
    # larger-modulus root first, the other from the determinant (no cancellation)
    big = np.where(np.abs(half_tr + disc) >= np.abs(half_tr - disc), half_tr + disc, half_tr - disc)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        small = np.where(np.abs(big) > _FLOOR, det / big, half_tr - (big - half_tr))
    lam = np.stack([big, small], axis=-1)

    # deterministic order with tolerance on ties
    l1, l2 = lam[..., 0], lam[..., 1]
    scale = np.maximum(np.maximum(np.abs(l1), np.abs(l2)), _FLOOR)
    tol = _TIE_RTOL * scale
    swap = np.zeros(l1.shape, dtype=bool)
    decided = np.zeros(l1.shape, dtype=bool)
    for k1, k2 in ((np.abs(l1), np.abs(l2)), (l1.real, l2.real), (l1.imag, l2.imag)):
        gt = (k2 - k1 > tol) & ~decided
        lt = (k1 - k2 > tol) & ~decided
        swap |= gt
        decided |= gt | lt
    lam = np.where(swap[..., None], lam[..., ::-1], lam)

    anorm = np.maximum(np.linalg.norm(A, axis=(-2, -1)), _FLOOR)
    vecs = []
    for i in range(2):
        li = lam[..., i]
        v1 = np.stack([b, li - a], axis=-1)
        v2 = np.stack([li - d, c], axis=-1)
        n1 = np.linalg.norm(v1, axis=-1)
        n2 = np.linalg.norm(v2, axis=-1)
        v = np.where((n1 >= n2)[..., None], v1, v2)
        n = np.maximum(n1, n2)
        # scalar matrix: every vector is an eigenvector, take the basis vector
        basis = np.zeros(v.shape, dtype=complex)
        basis[..., i] = 1.0
        degenerate = n <= 1e-13 * anorm
        v = np.where(degenerate[..., None], basis, v / np.where(degenerate, 1.0, n)[..., None])
        vecs.append(v)
    V = _fix_phase(np.stack(vecs, axis=-1))
    s = np.linalg.svd(V, compute_uv=False)
    with np.errstate(divide="ignore"):
        cond = np.where(s[..., -1] > 0, s[..., 0] / s[..., -1], np.inf)
    return lam, V, cond


def eig(A) -> EigenDecomp:
    """Eigendecomposition of a 2x2 or 4x4 complex matrix.

    The 2x2 case uses the characteristic polynomial directly; the 4x4 case
    defers to LAPACK.

    Raises
    ------
    NonDiagonalizable
        If the eigenvector matrix has condition number above ``COND_LIMIT``,
        or if the returned pairs fail ``A v = lambda v`` to ``1e-8 ||A||``.
    """
    M = as_cmat(A)
    scale = float(np.abs(M).max())
    # entries this far below the norm are invisible to any backward-stable
    # solver, but a huge dynamic range can still derail LAPACK's balancing
    M = np.where(np.abs(M) < 1e-3 * np.finfo(float).eps * scale, 0, M)
    if M.shape[0] == 2:
        lam, V, cond = eig2_stack(M)
        cond = float(cond)
    else:
        lam, V = np.linalg.eig(M)
        order = sorted(range(len(lam)), key=cmp_to_key(lambda i, j: _compare(lam[i], lam[j])))
        lam = lam[order]
        V = _fix_phase(V[:, order] / np.linalg.norm(V[:, order], axis=0))
        cond = float(np.linalg.cond(V))
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise NonDiagonalizable(f"eigenvector condition number {cond:.3g} exceeds {COND_LIMIT:g}")
    resid = float(np.abs(M @ V - V * lam).max()) if scale > 0 else 0.0
    if resid > 1e-8 * max(scale, _FLOOR):
        raise NonDiagonalizable(f"eigenpair residual {resid:.3g} relative to norm {scale:.3g}")
    return EigenDecomp(values=lam, vectors=V, condition=cond)


def inv(A) -> np.ndarray:
    """Matrix inverse; raises :class:`Singular` if ``s_min < 1e-12 * s_max``."""
    M = as_cmat(A)
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] <= _FLOOR or s[-1] < 1e-12 * s[0]:
        raise Singular(f"smallest singular value {s[-1]:.3g} vs largest {s[0]:.3g}")
    return np.linalg.inv(M)


def pinv(A, rtol: float = 1e-10) -> np.ndarray:
    """Moore-Penrose pseudo-inverse, dropping singular values below ``rtol * s_max``."""
    if rtol <= 0:
        raise ValueError("rtol must be positive")
    M = as_cmat(A)
    U, s, Vh = np.linalg.svd(M)
    keep = s > rtol * s[0] if s[0] > 0 else np.zeros_like(s, dtype=bool)
    s_inv = np.zeros_like(s)
    s_inv[keep] = 1.0 / s[keep]
    return (Vh.conj().T * s_inv) @ U.conj().T


def sqrtm_psd(A) -> np.ndarray:
    """Principal square root of a Hermitian positive semi-definite matrix."""
    M = as_cmat(A)
    nrm = _norm(M)
    if np.linalg.norm(M - M.conj().T, 2) > 1e-10 * nrm:
        raise NotPSD("matrix is not Hermitian")
    w, U = np.linalg.eigh(0.5 * (M + M.conj().T))
    if w.min() < -1e-8 * nrm:
        raise NotPSD(f"eigenvalue {w.min():.3g} is negative")
    w = np.clip(w, 0.0, None)
    return (U * np.sqrt(w)) @ U.conj().T


def trace_norm(A) -> float:
    """Sum of singular values, ``tr sqrt(A^dagger A)``."""
    M = as_cmat(A)
    return float(np.linalg.svd(M, compute_uv=False).sum())
