"""Extended-precision helpers for the map chain above the exceptional point.

Beyond the exceptional point the map matrices mix modes growing like
``|lambda_+|^{2t}`` with bounded ones, so inverting them in double precision
loses every significant digit after a few tens of steps. The momentum sums run
on ``numpy`` object arrays of ``gmpy2.mpc``; the 4x4 inversions and singular
values go through ``mpmath`` at the same working precision.
"""

from __future__ import annotations

import gmpy2
import mpmath
import numpy as np

_to_mpc = np.frompyfunc(gmpy2.mpc, 1, 1)
_to_py = np.frompyfunc(complex, 1, 1)


class Precision:
    """Context manager fixing the gmpy2 and mpmath working precision in bits."""

    def __init__(self, bits: int):
        self.bits = int(bits)

    def __enter__(self):
        self._g = gmpy2.context(gmpy2.get_context(), precision=self.bits)
        self._g.__enter__()
        self._m = mpmath.workprec(self.bits)
        self._m.__enter__()
        return self

    def __exit__(self, *exc):
        self._m.__exit__(*exc)
        self._g.__exit__(*exc)


def to_obj(a) -> np.ndarray:
    return _to_mpc(np.asarray(a, dtype=complex))


def to_complex(o) -> np.ndarray:
    return _to_py(o).astype(complex)


def inv2(V):
    """Exact-form inverse of a stack of 2x2 object matrices."""
    a, b, c, d = V[..., 0, 0], V[..., 0, 1], V[..., 1, 0], V[..., 1, 1]
    det = a * d - b * c
    out = np.empty_like(V)
    out[..., 0, 0] = d / det
    out[..., 0, 1] = -b / det
    out[..., 1, 0] = -c / det
    out[..., 1, 1] = a / det
    return out


def conj(o):
    return np.frompyfunc(lambda z: z.conjugate(), 1, 1)(o)


def superop(A, B):
    """Stack of row-major superoperators of ``X -> A X B``."""
    out = A[..., :, None, :, None] * np.swapaxes(B, -1, -2)[..., None, :, None, :]
    return out.reshape(A.shape[:-2] + (4, 4))


def _mp(x):
    return mpmath.mpc(mpmath.mpf(str(x.real)), mpmath.mpf(str(x.imag)))


def to_mp(o) -> mpmath.matrix:
    n, m = o.shape
    return mpmath.matrix([[_mp(o[i, j]) for j in range(m)] for i in range(n)])


def mp_to_complex(M) -> np.ndarray:
    return np.array([[complex(M[i, j]) for j in range(M.cols)] for i in range(M.rows)])


def svdvals(M) -> list:
    s = mpmath.svd_c(M, compute_uv=False)
    return sorted((abs(s[i]) for i in range(s.rows)), reverse=True)


def pinv(M, rtol):
    U, s, V = mpmath.svd_c(M)
    smax = max(abs(s[i]) for i in range(s.rows))
    n = s.rows
    Sinv = mpmath.zeros(n, n)
    for i in range(n):
        if abs(s[i]) > rtol * smax:
            Sinv[i, i] = 1 / s[i]
    return V.H * Sinv * U.H
