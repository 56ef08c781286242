"""Compressed matrix products over GF(p).

Residue matrices are 2-D ``int64`` numpy arrays with entries in [0, p-1].
Packed matrices are :class:`CompressedMatrix` objects carrying the word
array together with enough metadata to unpack it again.

Four packed products are provided, differing in which dimension shares a
word:

* common (:func:`mul_common_compressed`): the inner dimension ``k``.  Rows
  of A are packed reversed, columns of B forward, and each output entry is
  the middle digit of a word product.
* right (:func:`mul_right_compressed`): the columns of B.
* left (:func:`mul_left_compressed`): the rows of A.
* full (:func:`mul_full_compressed`): rows of A in base Q and columns of B
  in base Q**(dq+1) at the same time.

All accumulate without intermediate reduction and are checked against
:func:`naive_gemm`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import pack
from .errors import DimensionMismatch, PlanMismatch, UnsupportedAlgorithm
from .fieldcore import PrimeModulus, as_modulus
from .kernels import matmul_blocked, matmul_reference, word_matmul
from .pack import DEFAULT_BACKEND
from .plan import (DEFAULT_BETA, CompressionPlan, FullPlan, choose_panel,
                   plan_compression, plan_full)

ALGORITHMS = ("naive", "common", "right", "left", "full", "blocked")


class Direction(enum.Enum):
    FORWARD = "forward"
    REVERSED = "reversed"


class Axis(enum.Enum):
    ROW = "row"        # each row is packed; the column count shrinks
    COLUMN = "column"  # each column is packed; the row count shrinks


@dataclass(frozen=True)
class PackOrientation:
    direction: Direction
    axis: Axis
    slots: int


@dataclass(frozen=True, eq=False)
class CompressedMatrix:
    logical_rows: int
    logical_cols: int
    orientation: PackOrientation
    plan: CompressionPlan
    data: np.ndarray
    backend: str = DEFAULT_BACKEND

    @property
    def stored_rows(self) -> int:
        return self.data.shape[0]

    @property
    def stored_cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self):
        return self.logical_rows, self.logical_cols

    def unpack(self) -> np.ndarray:
        """Digits laid back out at their logical positions (not reduced)."""
        return uncompress(self)


def as_residue_matrix(a, m: PrimeModulus | int) -> np.ndarray:
    m = as_modulus(m)
    a = np.asarray(a)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    if a.dtype == object or not np.issubdtype(a.dtype, np.integer):
        a = a.astype(np.int64)
    if a.size and (a.min() < 0 or a.max() >= m.p):
        raise ValueError(f"matrix entries must lie in [0, {m.p - 1}]")
    return a.astype(np.int64, copy=False)


def _check_inner(a_shape, b_shape):
    if a_shape[1] != b_shape[0]:
        raise DimensionMismatch(
            f"cannot multiply {a_shape[0]}x{a_shape[1]} by {b_shape[0]}x{b_shape[1]}")


def _check_k(k: int, plan: CompressionPlan):
    if k > plan.kmax:
        raise PlanMismatch(
            f"common dimension {k} exceeds kmax={plan.kmax} for Q=2^{plan.t} "
            f"(k*(p-1)^2 must stay below Q); use blocked multiplication")


def naive_gemm(a, b, m: PrimeModulus | int) -> np.ndarray:
    """Classical triple-loop product, every entry reduced mod p."""
    m = as_modulus(m)
    a = as_residue_matrix(a, m)
    b = as_residue_matrix(b, m)
    _check_inner(a.shape, b.shape)
    k = a.shape[1]
    if k * m.pm1sq < 1 << 64:
        c = matmul_blocked(a.astype(np.uint64), b.astype(np.uint64))
        return (c % np.uint64(m.p)).astype(np.int64)
    c = matmul_reference(a, b)
    return (c % m.p).astype(np.int64)


# -- packing whole matrices -----------------------------------------------


def compress_rows_reversed(a, plan: CompressionPlan, backend: str = DEFAULT_BACKEND,
                           check: bool = True) -> CompressedMatrix:
    """Left operand of the common algorithm: each row in reversed groups."""
    a = as_residue_matrix(a, plan.modulus)
    if check:
        _check_k(a.shape[1], plan)
    data = pack.pack_array(a, 1, plan.t, plan.e, reverse=True, backend=backend)
    return CompressedMatrix(a.shape[0], a.shape[1],
                            PackOrientation(Direction.REVERSED, Axis.ROW, plan.e),
                            plan, data, backend)


def compress_cols_forward(b, plan: CompressionPlan, backend: str = DEFAULT_BACKEND,
                          check: bool = True) -> CompressedMatrix:
    """Pack each column in forward groups down the rows.

    This is the right operand of the common algorithm (k packed) and the
    left operand of left compression (m packed).  ``check`` compares the
    packed length against ``kmax``, which only applies when it is ``k``.
    """
    b = as_residue_matrix(b, plan.modulus)
    if check:
        _check_k(b.shape[0], plan)
    data = pack.pack_array(b, 0, plan.t, plan.e, backend=backend)
    return CompressedMatrix(b.shape[0], b.shape[1],
                            PackOrientation(Direction.FORWARD, Axis.COLUMN, plan.e),
                            plan, data, backend)


def compress_rows_forward(b, plan: CompressionPlan,
                          backend: str = DEFAULT_BACKEND) -> CompressedMatrix:
    """Right operand of right compression: each row packed along n."""
    b = as_residue_matrix(b, plan.modulus)
    data = pack.pack_array(b, 1, plan.t, plan.e, backend=backend)
    return CompressedMatrix(b.shape[0], b.shape[1],
                            PackOrientation(Direction.FORWARD, Axis.ROW, plan.e),
                            plan, data, backend)


def uncompress(cm: CompressedMatrix) -> np.ndarray:
    o = cm.orientation
    digits = pack.digits_array(cm.data, cm.plan.t, o.slots)
    if o.direction is Direction.REVERSED:
        digits = digits[..., ::-1]
    r, c = cm.data.shape
    if o.axis is Axis.ROW:
        out = digits.reshape(r, c * o.slots)
    else:
        out = digits.transpose(0, 2, 1).reshape(r * o.slots, c)
    return np.ascontiguousarray(out[:cm.logical_rows, :cm.logical_cols])


# -- common dimension -----------------------------------------------------


def _check_common_backend(plan: CompressionPlan, backend: str):
    pack.word_dtype(backend)
    if backend == "int64" and plan.t * plan.e > 64:
        raise PlanMismatch(f"int64 words cannot hold digits up to 2^{plan.t * plan.e}")
    if backend == "float64":
        # The word product carries 2d+1 digits; binary64 is exact only if
        # all of them fit in the mantissa.
        need = plan.t * (2 * plan.d + 1) + (1 if plan.additive else 0)
        if need > 53:
            raise PlanMismatch(
                f"float64 words are inexact for this plan: the accumulated "
                f"product needs {need} bits; use the int64 backend")


def multiply_compressed(ca: CompressedMatrix, cb: CompressedMatrix,
                        repack: bool = False):
    """Product of pre-packed operands (the caller did the compression).

    Returns the reduced m x n residue matrix, or with ``repack`` the result
    packed forward along its rows.
    """
    if ca.orientation.direction is not Direction.REVERSED or ca.orientation.axis is not Axis.ROW:
        raise PlanMismatch("left operand must be packed reversed along its rows")
    if cb.orientation.direction is not Direction.FORWARD or cb.orientation.axis is not Axis.COLUMN:
        raise PlanMismatch("right operand must be packed forward down its columns")
    if ca.plan != cb.plan:
        raise PlanMismatch("operands were packed with different plans")
    if ca.backend != cb.backend:
        raise PlanMismatch("operands use different word backends")
    _check_inner(ca.shape, cb.shape)
    plan = ca.plan
    _check_k(ca.logical_cols, plan)
    _check_common_backend(plan, ca.backend)
    words = word_matmul(ca.data, cb.data, ca.backend)
    c = pack.extract_digit_array(words, plan)
    if repack:
        return reduce_and_compress_matrix(c, plan, ca.backend)
    return c


def reduce_and_compress_matrix(c: np.ndarray, plan: CompressionPlan,
                               backend: str = DEFAULT_BACKEND) -> CompressedMatrix:
    c = np.asarray(c, dtype=np.int64) % plan.p
    return compress_rows_forward(c, plan, backend)


def mul_common_compressed(a, b, plan: CompressionPlan, repack: bool = False,
                          backend: str = DEFAULT_BACKEND):
    a = as_residue_matrix(a, plan.modulus)
    b = as_residue_matrix(b, plan.modulus)
    _check_inner(a.shape, b.shape)
    _check_k(a.shape[1], plan)
    _check_common_backend(plan, backend)
    ca = compress_rows_reversed(a, plan, backend)
    cb = compress_cols_forward(b, plan, backend)
    return multiply_compressed(ca, cb, repack)


# -- one external dimension -----------------------------------------------


def _bits(plan: CompressionPlan, slots: int | None = None) -> int:
    return plan.t * (plan.e if slots is None else slots)


def mul_right_compressed(a, cb: CompressedMatrix) -> CompressedMatrix:
    """``A x CB`` with B packed along n, then one REDQ per output word.

    ``a`` may be a residue matrix or a :class:`CompressedMatrix`, which is
    uncompressed first.
    """
    o = cb.orientation
    if o.direction is not Direction.FORWARD or o.axis is not Axis.ROW:
        raise PlanMismatch("right operand must be packed forward along its rows")
    plan = cb.plan
    if isinstance(a, CompressedMatrix):
        a = uncompress(a)
    a = as_residue_matrix(a, plan.modulus)
    _check_inner(a.shape, cb.shape)
    _check_k(a.shape[1], plan)
    pack.check_backend(cb.backend, _bits(plan))
    words = word_matmul(a.astype(pack.word_dtype(cb.backend)), cb.data, cb.backend)
    words = pack.redq_array(words, plan, backend=cb.backend)
    return CompressedMatrix(a.shape[0], cb.logical_cols, o, plan, words, cb.backend)


def mul_left_compressed(ca: CompressedMatrix, b) -> CompressedMatrix:
    """``CA x B`` with A packed down its columns (m compressed)."""
    o = ca.orientation
    if o.direction is not Direction.FORWARD or o.axis is not Axis.COLUMN:
        raise PlanMismatch("left operand must be packed forward down its columns")
    plan = ca.plan
    b = as_residue_matrix(b, plan.modulus)
    _check_inner(ca.shape, b.shape)
    _check_k(b.shape[0], plan)
    pack.check_backend(ca.backend, _bits(plan))
    words = word_matmul(ca.data, b.astype(pack.word_dtype(ca.backend)), ca.backend)
    words = pack.redq_array(words, plan, backend=ca.backend)
    return CompressedMatrix(ca.logical_rows, b.shape[1], o, plan, words, ca.backend)


# -- both external dimensions ---------------------------------------------


def full_compressed_words(a, b, fplan: FullPlan,
                          backend: str = DEFAULT_BACKEND) -> np.ndarray:
    """Raw (unreduced) words of the fully compressed product.

    Entry (g, h) holds ``C[g*(dq+1)+i][h*(dtheta+1)+j]`` at base-Q digit
    ``i + j*(dq+1)``.
    """
    a = as_residue_matrix(a, fplan.modulus)
    b = as_residue_matrix(b, fplan.modulus)
    _check_inner(a.shape, b.shape)
    _check_k(a.shape[1], fplan.base)
    pack.check_backend(backend, fplan.t * fplan.slots)
    ca = pack.pack_array(a, 0, fplan.t, fplan.dq + 1, backend=backend)
    cb = pack.pack_array(b, 1, fplan.theta_exponent, fplan.dtheta + 1, backend=backend)
    return word_matmul(ca, cb, backend)


def unpack_full(words: np.ndarray, fplan: FullPlan, m: int, n: int) -> np.ndarray:
    qs, ts = fplan.dq + 1, fplan.dtheta + 1
    g, h = words.shape
    digits = pack.digits_array(words, fplan.t, fplan.slots)
    # digit index i + j*qs -> (j, i)
    digits = digits.reshape(g, h, ts, qs).transpose(0, 3, 1, 2)
    return np.ascontiguousarray(digits.reshape(g * qs, h * ts)[:m, :n])


def mul_full_compressed(a, b, fplan: FullPlan,
                        backend: str = DEFAULT_BACKEND) -> np.ndarray:
    words = full_compressed_words(a, b, fplan, backend)
    words = pack.redq_array(words, fplan.base, slots=fplan.slots, backend=backend)
    m, n = np.shape(a)[0], np.shape(b)[1]
    return unpack_full(words, fplan, m, n)


# -- long common dimension ------------------------------------------------


def blocked_accumulate(a, b, plan: CompressionPlan, kpanel: int,
                       backend: str = DEFAULT_BACKEND) -> np.ndarray:
    """Split k into panels of width ``kpanel`` and sum the reduced panel products."""
    a = as_residue_matrix(a, plan.modulus)
    b = as_residue_matrix(b, plan.modulus)
    _check_inner(a.shape, b.shape)
    if kpanel < 1:
        raise ValueError("kpanel must be >= 1")
    _check_k(kpanel, plan)
    k = a.shape[1]
    c = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    for lo in range(0, k, kpanel):
        hi = min(lo + kpanel, k)
        c += mul_common_compressed(a[:, lo:hi], b[lo:hi], plan, backend=backend)
        c %= plan.p
    return c


# -- dispatch -------------------------------------------------------------


def multiply(a, b, m: PrimeModulus | int, algorithm: str = "common", *,
             beta: int = DEFAULT_BETA, backend: str = DEFAULT_BACKEND,
             kpanel: int | None = None) -> np.ndarray:
    """Plan and run one algorithm end to end, returning the residue matrix.

    For ``blocked`` a missing ``kpanel`` is chosen by :func:`choose_panel`.
    """
    m = as_modulus(m)
    a = as_residue_matrix(a, m)
    b = as_residue_matrix(b, m)
    _check_inner(a.shape, b.shape)
    rows, k = a.shape
    cols = b.shape[1]
    if algorithm == "naive":
        return naive_gemm(a, b, m)
    if algorithm == "common":
        return mul_common_compressed(a, b, plan_compression(m, k, beta), backend=backend)
    if algorithm == "right":
        plan = plan_compression(m, k, beta, packed_length=cols)
        return uncompress(mul_right_compressed(a, compress_rows_forward(b, plan, backend)))
    if algorithm == "left":
        plan = plan_compression(m, k, beta, packed_length=rows)
        ca = compress_cols_forward(a, plan, backend, check=False)
        return uncompress(mul_left_compressed(ca, b))
    if algorithm == "full":
        return mul_full_compressed(a, b, plan_full(m, k, beta), backend)
    if algorithm == "blocked":
        if kpanel is None:
            kpanel, plan = choose_panel(m, k, beta)
        else:
            plan = plan_compression(m, kpanel, beta)
        return blocked_accumulate(a, b, plan, kpanel, backend)
    raise UnsupportedAlgorithm(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")
