"""Q-adic packing of residue vectors into words and the way back.

Scalar routines work on Python ints (floats are accepted where the word
could come from a binary64 accumulator).  The ``*_array`` routines do the
same thing over numpy arrays for the three word backends:

``"int64"``
    ``uint64`` words with wrap-around arithmetic.  Results are exact modulo
    ``2**64``, which is all the low digits need.
``"float64"``
    binary64 words, exact while every value stays below ``2**53``.
``"python"``
    object arrays of Python ints; unbounded and exact, used as reference.

Q is always a power of two, so digits come out by shift and mask.
"""

from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np

from . import _packjit
from .errors import DigitOverflow, PlanMismatch, SlotOverflow

BACKENDS = {"int64": np.uint64, "float64": np.float64, "python": object}
BACKEND_BITS = {"int64": 64, "float64": 53, "python": None}
DEFAULT_BACKEND = "int64"


def word_dtype(backend: str):
    try:
        return BACKENDS[backend]
    except KeyError:
        raise ValueError(f"unknown word backend {backend!r}; "
                         f"choose from {sorted(BACKENDS)}") from None


def check_backend(backend: str, bits: int) -> None:
    """Refuse a backend that cannot hold ``bits``-bit words exactly."""
    word_dtype(backend)
    limit = BACKEND_BITS[backend]
    if limit is not None and bits > limit:
        raise PlanMismatch(f"{backend} words hold {limit} exact bits, "
                           f"plan needs {bits}")


def _check_residues(v: Sequence[int], plan) -> None:
    if len(v) > plan.e:
        raise SlotOverflow(f"{len(v)} residues do not fit in {plan.e} slots")
    for x in v:
        if not 0 <= x < plan.p:
            raise ValueError(f"{x} is not a residue mod {plan.p}")


def compress_forward(v: Sequence[int], plan) -> int:
    """Pack ``v`` as ``sum(v[i] * Q**i)``; short vectors leave high digits zero."""
    _check_residues(v, plan)
    r = 0
    for x in reversed(v):
        r = (r << plan.t) + int(x)
    return r


def compress_reverse(v: Sequence[int], plan) -> int:
    """Pack ``v`` with its digits reversed over the full ``e`` slots.

    A short vector is zero padded at the end before reversal, so the result
    is shifted up by ``e - len(v)`` digits.
    """
    _check_residues(v, plan)
    r = 0
    for x in v:
        r = (r << plan.t) + int(x)
    return r << (plan.t * (plan.e - len(v)))


def extract_coefficient(w, plan, additive: bool | None = None) -> int:
    """Degree-d digit of ``w`` reduced mod p.

    Float words follow the reciprocal route: multiply by ``1/Q**d``, floor,
    mask with ``Q-1``.  Integer words are shifted.  Digits above ``d`` are
    discarded either way.
    """
    additive = plan.additive if additive is None else additive
    td = plan.t * plan.d
    if isinstance(w, (float, np.floating)):
        if w < 0:
            raise ValueError("packed words are nonnegative")
        if additive:
            top = int(float(w) + float(1 << (td + plan.t * (plan.d + 1))))
            return ((top >> td) & plan.mask) % plan.p
        return (int(math.floor(float(w) * plan.inv_qd)) & plan.mask) % plan.p
    w = int(w)
    if w < 0:
        raise ValueError("packed words are nonnegative")
    if additive:
        w += 1 << (plan.t * (2 * plan.d + 1))
    return ((w >> td) & plan.mask) % plan.p


def extract_all(w, plan, slots: int | None = None) -> list[int]:
    """Split ``w`` into its base-Q digits, lowest first (no reduction)."""
    slots = plan.e if slots is None else slots
    w = int(w)
    if w < 0 or w >> (plan.t * slots):
        raise DigitOverflow(f"{w} does not fit in {slots} digits of 2^{plan.t}")
    return [(w >> (plan.t * i)) & plan.mask for i in range(slots)]


def redq(w, plan, slots: int | None = None) -> int:
    """Reduce every base-Q digit of ``w`` mod p in one pass."""
    r = 0
    for c in reversed(extract_all(w, plan, slots)):
        r = (r << plan.t) + c % plan.p
    return r


def reduce_and_compress(row: Sequence[int], plan) -> list[int]:
    residues = [extract_coefficient(x, plan) for x in row]
    return [compress_forward(residues[i:i + plan.e], plan)
            for i in range(0, len(residues), plan.e)]


# -- array forms ----------------------------------------------------------


def pack_array(a: np.ndarray, axis: int, t: int, slots: int, *,
               reverse: bool = False, backend: str = DEFAULT_BACKEND) -> np.ndarray:
    """Pack a 2-D residue array along ``axis`` in groups of ``slots``.

    The packed axis shrinks to ``ceil(len / slots)``; a short final group is
    zero padded at its end (for ``reverse`` that pushes the group up by the
    missing number of digits).
    """
    dtype = word_dtype(backend)
    a = np.asarray(a)
    if backend != "python" and a.ndim == 2 and axis in (0, 1):
        q = dtype(1 << t)
        src = np.ascontiguousarray(a, dtype=dtype)
        if axis == 1:
            out = np.zeros((a.shape[0], -(-a.shape[1] // slots)), dtype=dtype)
            return _packjit.pack_rows(src, q, slots, reverse, out)
        if not reverse:
            out = np.zeros((-(-a.shape[0] // slots), a.shape[1]), dtype=dtype)
            return _packjit.pack_cols(src, q, slots, out)
    moved = np.moveaxis(a, axis, -1)
    length = moved.shape[-1]
    groups = -(-length // slots)
    padded = np.zeros(moved.shape[:-1] + (groups * slots,), dtype=np.int64)
    padded[..., :length] = moved
    grouped = padded.reshape(moved.shape[:-1] + (groups, slots))
    if reverse:
        grouped = grouped[..., ::-1]
    grouped = grouped.astype(dtype)
    if backend == "python":
        q = 1 << t
    else:
        q = dtype(1 << t)
    w = np.zeros(grouped.shape[:-1], dtype=dtype)
    for i in reversed(range(slots)):
        w = w * q + grouped[..., i]
    return np.moveaxis(w, -1, axis)


def _as_uint(words: np.ndarray) -> np.ndarray:
    if words.dtype == np.float64:
        return words.astype(np.uint64)
    return words


def extract_digit_array(words: np.ndarray, plan, *,
                        additive: bool | None = None) -> np.ndarray:
    """Vectorised :func:`extract_coefficient`; returns int64 residues."""
    additive = plan.additive if additive is None else additive
    t, d, mask, p = plan.t, plan.d, plan.mask, plan.p
    if words.dtype == object:
        f = np.frompyfunc(lambda w: extract_coefficient(w, plan, additive), 1, 1)
        return f(words).astype(np.int64)
    if words.ndim == 2 and not additive:
        out = np.empty(words.shape, dtype=np.int64)
        if words.dtype == np.float64:
            return _packjit.extract_reciprocal(words, plan.inv_qd, np.uint64(mask),
                                               np.uint64(p), out)
        return _packjit.extract_shift(words, np.uint64(t * d), np.uint64(mask),
                                      np.uint64(p), out)
    if words.dtype == np.float64:
        if additive:
            if t * (d + 1) > 52:
                raise PlanMismatch("additive extraction needs t*(d+1) <= 52")
            x = words + float(1 << (t * (2 * d + 1)))
            mant = x.view(np.uint64) & np.uint64((1 << 52) - 1)
            digit = (mant >> np.uint64(52 - t * (d + 1))) & np.uint64(mask)
        else:
            digit = np.floor(words * plan.inv_qd).astype(np.uint64) & np.uint64(mask)
    else:
        w = words
        if additive:
            w = w + np.uint64((1 << (t * (2 * d + 1))) % (1 << 64))
        digit = (w >> np.uint64(t * d)) & np.uint64(mask)
    return (digit % np.uint64(p)).astype(np.int64)


def digits_array(words: np.ndarray, t: int, slots: int) -> np.ndarray:
    """Base-2**t digits of every word, on a new trailing axis (lowest first)."""
    if words.dtype == object:
        mask = (1 << t) - 1
        out = np.empty(words.shape + (slots,), dtype=np.int64)
        flat = out.reshape(-1, slots)
        for idx, w in enumerate(words.ravel()):
            w = int(w)
            if w >> (t * slots):
                raise DigitOverflow(f"{w} does not fit in {slots} digits of 2^{t}")
            flat[idx] = [(w >> (t * i)) & mask for i in range(slots)]
        return out
    w = _as_uint(words)
    if t * slots < 64 and np.any(w >> np.uint64(t * slots)):
        raise DigitOverflow(f"word does not fit in {slots} digits of 2^{t}")
    shifts = np.arange(slots, dtype=np.uint64) * np.uint64(t)
    return ((w[..., None] >> shifts) & np.uint64((1 << t) - 1)).astype(np.int64)


def combine_digits(digits: np.ndarray, t: int, backend: str) -> np.ndarray:
    """Inverse of :func:`digits_array` (digits must be < 2**t)."""
    dtype = word_dtype(backend)
    slots = digits.shape[-1]
    d = digits.astype(dtype)
    q = (1 << t) if backend == "python" else dtype(1 << t)
    w = np.zeros(digits.shape[:-1], dtype=dtype)
    for i in reversed(range(slots)):
        w = w * q + d[..., i]
    return w


def redq_array(words: np.ndarray, plan, slots: int | None = None,
               backend: str | None = None) -> np.ndarray:
    """Vectorised :func:`redq` keeping the word dtype."""
    slots = plan.e if slots is None else slots
    if backend is None:
        backend = {np.dtype(object): "python",
                   np.dtype(np.float64): "float64"}.get(words.dtype, "int64")
    reduced = digits_array(words, plan.t, slots) % plan.p
    return combine_digits(reduced, plan.t, backend)
