"""Word-level matrix products.

The packed algorithms all reduce to an ordinary product of word matrices;
no modular reduction happens inside these loops.  ``matmul_reference`` is a
plain cache-blocked triple loop over Python ints and is always available.
``matmul_blocked`` is the same loop compiled with numba for ``uint64``
(wrapping) and ``float64`` words.
"""

from __future__ import annotations

import numba
import numpy as np

from .pack import word_dtype

BLOCK = 128


def matmul_reference(x, y, block: int = BLOCK) -> np.ndarray:
    x = np.asarray(x, dtype=object)
    y = np.asarray(y, dtype=object)
    m, k = x.shape
    k2, n = y.shape
    if k != k2:
        raise ValueError(f"inner dimensions differ: {x.shape} x {y.shape}")
    xs = x.tolist()
    ys = y.tolist()
    out = [[0] * n for _ in range(m)]
    for i0 in range(0, m, block):
        for l0 in range(0, k, block):
            for j0 in range(0, n, block):
                jhi = min(j0 + block, n)
                for i in range(i0, min(i0 + block, m)):
                    row = out[i]
                    xi = xs[i]
                    for l in range(l0, min(l0 + block, k)):
                        a = xi[l]
                        if not a:
                            continue
                        yl = ys[l]
                        for j in range(j0, jhi):
                            row[j] += a * yl[j]
    res = np.empty((m, n), dtype=object)
    for i in range(m):
        res[i, :] = out[i]
    return res


@numba.njit(cache=True)
def _blocked(x, y, out, block):
    m, k = x.shape
    n = y.shape[1]
    for i0 in range(0, m, block):
        ihi = min(i0 + block, m)
        for l0 in range(0, k, block):
            lhi = min(l0 + block, k)
            for j0 in range(0, n, block):
                jhi = min(j0 + block, n)
                for i in range(i0, ihi):
                    for l in range(l0, lhi):
                        a = x[i, l]
                        for j in range(j0, jhi):
                            out[i, j] += a * y[l, j]
    return out


def matmul_blocked(x: np.ndarray, y: np.ndarray, block: int = BLOCK) -> np.ndarray:
    if x.shape[1] != y.shape[0]:
        raise ValueError(f"inner dimensions differ: {x.shape} x {y.shape}")
    if x.dtype != y.dtype:
        raise TypeError(f"word dtypes differ: {x.dtype} vs {y.dtype}")
    out = np.zeros((x.shape[0], y.shape[1]), dtype=x.dtype)
    return _blocked(np.ascontiguousarray(x), np.ascontiguousarray(y), out, block)


def word_matmul(x: np.ndarray, y: np.ndarray, backend: str) -> np.ndarray:
    dtype = word_dtype(backend)
    if backend == "python":
        return matmul_reference(x, y)
    return matmul_blocked(x.astype(dtype, copy=False), y.astype(dtype, copy=False))
