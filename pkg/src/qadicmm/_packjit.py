"""Single-pass numba loops behind the array packing routines.

Every argument shares the word dtype (uint64 or float64); numba would
otherwise promote mixed signed/unsigned arithmetic to float.
"""

import numba
import numpy as np


@numba.njit(cache=True)
def pack_rows(a, q, slots, reverse, out):
    rows, cols = a.shape
    groups = out.shape[1]
    for i in range(rows):
        for g in range(groups):
            w = out[i, g]
            for s in range(slots - 1, -1, -1):
                col = g * slots + (slots - 1 - s if reverse else s)
                w = w * q
                if col < cols:
                    w = w + a[i, col]
            out[i, g] = w
    return out


@numba.njit(cache=True)
def pack_cols(a, q, slots, out):
    rows, cols = a.shape
    groups = out.shape[0]
    for g in range(groups):
        for s in range(slots - 1, -1, -1):
            r = g * slots + s
            for j in range(cols):
                if r < rows:
                    out[g, j] = out[g, j] * q + a[r, j]
                else:
                    out[g, j] = out[g, j] * q
    return out


@numba.njit(cache=True)
def extract_shift(words, shift, mask, p, out):
    rows, cols = words.shape
    for i in range(rows):
        for j in range(cols):
            out[i, j] = ((words[i, j] >> shift) & mask) % p
    return out


@numba.njit(cache=True)
def extract_reciprocal(words, inv_qd, mask, p, out):
    rows, cols = words.shape
    for i in range(rows):
        for j in range(cols):
            out[i, j] = (np.uint64(np.floor(words[i, j] * inv_qd)) & mask) % p
    return out
