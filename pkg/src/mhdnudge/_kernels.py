"""Hot inner kernels with optional numba acceleration.

Set MHDNUDGE_NO_NUMBA=1 to force the pure-numpy path (used by the
benchmark and by CI images without a working numba).  Both paths must
agree to ~1e-13; results are deterministic for a fixed backend.
"""

from __future__ import annotations

import os

import numpy as np

_want_numba = os.environ.get("MHDNUDGE_NO_NUMBA", "0") not in ("1", "true", "yes")

try:  # pragma: no cover - exercised implicitly by backend selection
    if _want_numba:
        from numba import njit

        HAVE_NUMBA = True
    else:
        HAVE_NUMBA = False
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"


def _mode_solve_np(mats: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    # mats: (m,4,4) complex, rhs: (m,4) complex
    return np.einsum("mij,mj->mi", mats, rhs)


def _advect_np(a1, a2, g1x, g1y, g2x, g2y):
    return a1 * g1x + a2 * g1y, a1 * g2x + a2 * g2y


if HAVE_NUMBA:

    @njit(cache=True)
    def _mode_solve_nb(mats, rhs):  # pragma: no cover - jitted
        m = mats.shape[0]
        out = np.empty_like(rhs)
        for p in range(m):
            for i in range(4):
                acc = 0.0 + 0.0j
                for j in range(4):
                    acc += mats[p, i, j] * rhs[p, j]
                out[p, i] = acc
        return out

    @njit(cache=True)
    def _advect_nb(a1, a2, g1x, g1y, g2x, g2y):  # pragma: no cover - jitted
        n0, n1 = a1.shape
        o1 = np.empty_like(a1)
        o2 = np.empty_like(a1)
        for i in range(n0):
            for j in range(n1):
                o1[i, j] = a1[i, j] * g1x[i, j] + a2[i, j] * g1y[i, j]
                o2[i, j] = a1[i, j] * g2x[i, j] + a2[i, j] * g2y[i, j]
        return o1, o2

    mode_solve = _mode_solve_nb
    advect_products = _advect_nb
else:
    mode_solve = _mode_solve_np
    advect_products = _advect_np
