import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qadicmm import gemm
from qadicmm.errors import DimensionMismatch, PlanMismatch, UnsupportedAlgorithm
from qadicmm.gemm import (Axis, CompressedMatrix, Direction, blocked_accumulate,
                          compress_cols_forward, compress_rows_forward,
                          compress_rows_reversed, full_compressed_words,
                          mul_common_compressed, mul_full_compressed,
                          mul_left_compressed, mul_right_compressed, multiply,
                          multiply_compressed, naive_gemm, uncompress)
from qadicmm.plan import FullPlan, plan_compression, plan_full

from helpers import make_plan

A2 = [[1, 2], [0, 1]]
B2 = [[2, 0], [1, 1]]
C2 = [[1, 2], [1, 1]]
Q32 = make_plan(3, 5, 2)
FULL_Q32 = FullPlan(base=Q32, dq=1, dtheta=1)


def triple_loop(a, b, p):
    a, b = np.asarray(a).tolist(), np.asarray(b).tolist()
    return [[sum(a[i][l] * b[l][j] for l in range(len(b))) % p
             for j in range(len(b[0]))] for i in range(len(a))]


class TestNaive:
    def test_example(self):
        assert triple_loop(A2, B2, 3) == C2
        assert naive_gemm(A2, B2, 3).tolist() == C2

    def test_identity_and_zero(self, rng):
        b = rng.integers(0, 7, size=(5, 4))
        assert (naive_gemm(np.eye(5, dtype=int), b, 7) == b).all()
        assert not naive_gemm(np.zeros((3, 5), dtype=int), b, 7).any()

    def test_against_triple_loop(self, rng):
        for p in (2, 3, 11, 65521):
            a = rng.integers(0, p, size=(6, 9))
            b = rng.integers(0, p, size=(9, 4))
            assert naive_gemm(a, b, p).tolist() == triple_loop(a, b, p)

    def test_huge_modulus_uses_exact_path(self, rng):
        p = 2**31 - 1
        a = rng.integers(p - 5, p, size=(3, 40))
        b = rng.integers(p - 5, p, size=(40, 2))
        assert naive_gemm(a, b, p).tolist() == triple_loop(a, b, p)

    def test_mismatch(self):
        with pytest.raises(DimensionMismatch):
            naive_gemm([[1, 2]], [[1, 2]], 3)

    def test_rejects_non_residues(self):
        with pytest.raises(ValueError):
            naive_gemm([[3]], [[1]], 3)


class TestPacking:
    def test_rows_reversed(self, backend):
        assert int(compress_rows_reversed([[1, 2]], Q32, backend).data[0, 0]) == 34
        assert int(compress_rows_reversed([[1]], Q32, backend).data[0, 0]) == 32
        z = compress_rows_reversed(np.zeros((2, 4), dtype=int), Q32, backend)
        assert z.data.shape == (2, 2) and not z.data.astype(float).any()

    def test_cols_forward(self, backend):
        assert int(compress_cols_forward([[2], [1]], Q32, backend).data[0, 0]) == 34
        eye = compress_cols_forward(np.eye(2, dtype=int), Q32, backend)
        assert [int(x) for x in eye.data[0]] == [1, 32]
        one = compress_cols_forward([[2, 1]], Q32, backend)
        assert [int(x) for x in one.data[0]] == [2, 1]

    def test_compressed_shape(self, rng):
        plan = plan_compression(3, 255)
        a = rng.integers(0, 3, size=(11, 23))
        ca = compress_rows_reversed(a, plan)
        assert (ca.stored_rows, ca.stored_cols) == (11, 5)
        assert ca.orientation.direction is Direction.REVERSED
        assert ca.orientation.axis is Axis.ROW and ca.orientation.slots == 5
        assert (uncompress(ca) == a).all()
        cb = compress_cols_forward(a, plan)
        assert (cb.stored_rows, cb.stored_cols) == (3, 23)
        assert (cb.unpack() == a).all()

    def test_plan_mismatch(self):
        plan = make_plan(3, 5, 2)  # kmax = 7
        with pytest.raises(PlanMismatch):
            compress_rows_reversed(np.zeros((1, 8), dtype=int), plan)
        with pytest.raises(PlanMismatch):
            mul_common_compressed(np.zeros((1, 8), dtype=int),
                                  np.zeros((8, 1), dtype=int), plan)


class TestCommon:
    def test_example(self, backend):
        assert mul_common_compressed(A2, B2, Q32, backend=backend).tolist() == C2

    def test_identity(self, backend):
        # float64 words must hold the whole 2d+1 digit product
        plan = plan_compression(5, 9, max_slots=3 if backend == "float64" else None)
        eye = np.eye(9, dtype=int)
        assert (mul_common_compressed(eye, eye, plan, backend=backend) == eye).all()

    @pytest.mark.parametrize("p", [2, 3, 5, 7])
    def test_extreme_magnitude(self, p):
        plan = plan_compression(p, 100)
        k = plan.kmax
        a = np.full((1, k), p - 1)
        b = np.full((k, 1), p - 1)
        want = k * (p - 1) ** 2 % p
        assert mul_common_compressed(a, b, plan)[0, 0] == want
        assert mul_common_compressed(a, b, plan, backend="python")[0, 0] == want

    def test_repack(self, backend):
        cc = mul_common_compressed(A2, B2, Q32, repack=True, backend=backend)
        assert isinstance(cc, CompressedMatrix)
        assert cc.orientation.axis is Axis.ROW
        assert [int(x) for x in cc.data[:, 0]] == [1 + 2 * 32, 1 + 32]
        assert cc.unpack().tolist() == C2

    def test_precompressed_entry(self, rng):
        plan = plan_compression(7, 40)
        a = rng.integers(0, 7, size=(9, 40))
        b = rng.integers(0, 7, size=(40, 6))
        ca, cb = compress_rows_reversed(a, plan), compress_cols_forward(b, plan)
        assert (multiply_compressed(ca, cb) == naive_gemm(a, b, 7)).all()
        with pytest.raises(PlanMismatch):
            multiply_compressed(cb, ca)

    def test_float_backend_rejected_when_inexact(self):
        plan = plan_compression(3, 255)  # t=10, e=5: product needs 90 bits
        with pytest.raises(PlanMismatch):
            mul_common_compressed(np.zeros((1, 5), dtype=int),
                                  np.zeros((5, 1), dtype=int), plan, backend="float64")

    def test_float_backend_exact_plan(self, rng):
        plan = plan_compression(3, 7, max_slots=3)  # 5 * 5 = 25 bits
        a = np.full((4, 7), 2)
        b = np.full((7, 4), 2)
        got = mul_common_compressed(a, b, plan, backend="float64")
        assert (got == naive_gemm(a, b, 3)).all()


class TestRight:
    def test_example(self, backend):
        cb = compress_rows_forward(B2, Q32, backend)
        cc = mul_right_compressed(A2, cb)
        assert uncompress(cc).tolist() == C2
        # digits of row 0: (ae+bg) + Q(af+bh)
        assert int(cc.data[0, 0]) == 1 + 2 * 32

    def test_identity_keeps_cb(self, backend, rng):
        plan = plan_compression(3, 6, packed_length=10)
        b = rng.integers(0, 3, size=(6, 10))
        cb = compress_rows_forward(b, plan, backend)
        cc = mul_right_compressed(np.eye(6, dtype=int), cb)
        assert [int(x) for x in cc.data.ravel()] == [int(x) for x in cb.data.ravel()]

    def test_single_column(self, rng):
        plan = plan_compression(5, 12)
        a = rng.integers(0, 5, size=(4, 12))
        b = rng.integers(0, 5, size=(12, 1))
        cc = mul_right_compressed(a, compress_rows_forward(b, plan))
        assert (uncompress(cc) == naive_gemm(a, b, 5)).all()

    def test_accepts_compressed_left(self, rng):
        plan = plan_compression(3, 20)
        a = rng.integers(0, 3, size=(5, 20))
        b = rng.integers(0, 3, size=(20, 7))
        ca = compress_rows_reversed(a, plan)
        cc = mul_right_compressed(ca, compress_rows_forward(b, plan))
        assert (uncompress(cc) == naive_gemm(a, b, 3)).all()

    def test_wrong_orientation(self):
        with pytest.raises(PlanMismatch):
            mul_right_compressed(A2, compress_cols_forward(B2, Q32))

    def test_mismatch(self):
        with pytest.raises(DimensionMismatch):
            mul_right_compressed([[1, 2, 0]], compress_rows_forward(B2, Q32))


class TestLeft:
    def test_example(self, backend):
        ca = compress_cols_forward(A2, Q32, backend)
        assert [int(x) for x in ca.data[0]] == [1, 2 + 32]
        cc = mul_left_compressed(ca, B2)
        assert [int(x) for x in cc.data[0]] == [1 + 32, 2 + 32]
        assert uncompress(cc).tolist() == C2

    def test_identity(self, backend, rng):
        plan = plan_compression(7, 5, packed_length=9)
        a = rng.integers(0, 7, size=(9, 5))
        ca = compress_cols_forward(a, plan, backend, check=False)
        cc = mul_left_compressed(ca, np.eye(5, dtype=int))
        assert (uncompress(cc) == a).all()

    def test_single_row(self, rng):
        plan = plan_compression(3, 30)
        a = rng.integers(0, 3, size=(1, 30))
        b = rng.integers(0, 3, size=(30, 4))
        cc = mul_left_compressed(compress_cols_forward(a, plan), b)
        assert (uncompress(cc) == naive_gemm(a, b, 3)).all()


class TestFull:
    def test_example(self, backend):
        words = full_compressed_words(A2, B2, FULL_Q32, "python")
        # digits (ae+bg), (ce+dg), (af+bh), (cf+dh) in base 32
        assert int(words[0, 0]) == 4 + 1 * 32 + 2 * 32**2 + 1 * 32**3
        assert mul_full_compressed(A2, B2, FULL_Q32, backend).tolist() == C2

    def test_zero(self, backend):
        fp = plan_full(3, 8)
        got = mul_full_compressed(np.zeros((5, 8), dtype=int), np.ones((8, 7), dtype=int), fp, backend)
        assert got.shape == (5, 7) and not got.any()

    def test_dot_product(self, rng):
        fp = plan_full(11, 30)
        a = rng.integers(0, 11, size=(1, 30))
        b = rng.integers(0, 11, size=(30, 1))
        words = full_compressed_words(a, b, fp, "python")
        assert int(words[0, 0]) == int((a @ b)[0, 0])
        assert mul_full_compressed(a, b, fp)[0, 0] == int((a @ b)[0, 0]) % 11

    def test_digit_independence(self, rng):
        fp = plan_full(3, 7)
        qs, ts = fp.dq + 1, fp.dtheta + 1
        a = rng.integers(0, 3, size=(7, 7))
        b = rng.integers(0, 3, size=(7, 8))
        base = full_compressed_words(a, b, fp, "python")
        a2 = a.copy()
        a2[4, 2] = (a2[4, 2] + 1) % 3
        changed = full_compressed_words(a2, b, fp, "python")
        for g in range(base.shape[0]):
            for h in range(base.shape[1]):
                for idx in range(fp.slots):
                    d0 = (int(base[g, h]) >> (fp.t * idx)) & (fp.q - 1)
                    d1 = (int(changed[g, h]) >> (fp.t * idx)) & (fp.q - 1)
                    if d0 != d1:
                        assert g == 4 // qs and idx % qs == 4 % qs

    def test_plan_mismatch(self):
        fp = plan_full(3, 7)
        with pytest.raises(PlanMismatch):
            mul_full_compressed(np.zeros((2, 8), dtype=int), np.zeros((8, 2), dtype=int), fp)


class TestBlocked:
    def test_two_panels(self, rng):
        plan = plan_compression(3, 63)
        k = 2 * plan.kmax
        a = rng.integers(0, 3, size=(8, k))
        b = rng.integers(0, 3, size=(k, 5))
        assert (blocked_accumulate(a, b, plan, plan.kmax) == naive_gemm(a, b, 3)).all()

    def test_single_panel_matches_common(self, rng):
        plan = plan_compression(5, 20)
        a = rng.integers(0, 5, size=(6, 20))
        b = rng.integers(0, 5, size=(20, 6))
        assert (blocked_accumulate(a, b, plan, 20) == mul_common_compressed(a, b, plan)).all()

    def test_rank_one_slices(self, rng):
        plan = plan_compression(7, 1)
        a = rng.integers(0, 7, size=(4, 9))
        b = rng.integers(0, 7, size=(9, 3))
        want = np.zeros((4, 3), dtype=np.int64)
        for l in range(9):
            want = (want + np.outer(a[:, l], b[l])) % 7
        assert (blocked_accumulate(a, b, plan, 1) == want).all()

    def test_panel_too_wide(self):
        plan = make_plan(3, 5, 2)
        with pytest.raises(PlanMismatch):
            blocked_accumulate(np.zeros((1, 20), dtype=int), np.zeros((20, 1), dtype=int), plan, 8)


def test_bound_tightness_all_algorithms():
    p = 3
    plan = plan_compression(p, 255)
    k = plan.kmax
    a = np.full((3, k), p - 1)
    b = np.full((k, 4), p - 1)
    want = k * (p - 1) ** 2 % p
    for algo in ("common", "right", "left", "full", "blocked"):
        assert (multiply(a, b, p, algo) == want).all(), algo


@st.composite
def product_case(draw):
    p = draw(st.sampled_from([2, 3, 5, 7, 11]))
    m, k, n = (draw(st.integers(1, 24)) for _ in range(3))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    return p, rng.integers(0, p, size=(m, k)), rng.integers(0, p, size=(k, n))


@settings(max_examples=60)
@given(product_case(), st.sampled_from(["common", "right", "left", "full", "blocked"]),
       st.sampled_from(["int64", "float64", "python"]))
def test_oracle_equivalence(case, algo, backend):
    p, a, b = case
    if backend == "float64" and algo in ("common", "blocked"):
        backend = "int64"
    kpanel = max(1, a.shape[1] // 2) if algo == "blocked" else None
    got = multiply(a, b, p, algo, backend=backend, kpanel=kpanel)
    assert (got == naive_gemm(a, b, p)).all()


@pytest.mark.parametrize("algo", gemm.ALGORITHMS)
def test_partial_compression(algo, rng):
    # e divides none of m, k, n
    p = 3
    a = rng.integers(0, p, size=(13, 17))
    b = rng.integers(0, p, size=(17, 11))
    assert (multiply(a, b, p, algo, kpanel=7) == naive_gemm(a, b, p)).all()


def test_determinism(rng):
    a = rng.integers(0, 5, size=(30, 40))
    b = rng.integers(0, 5, size=(40, 20))
    for algo in gemm.ALGORITHMS:
        first = multiply(a, b, 5, algo)
        assert (first == multiply(a.copy(), b.copy(), 5, algo)).all()
        assert (first == multiply(a, b, 5, algo, backend="python")).all()


def test_unknown_algorithm():
    with pytest.raises(UnsupportedAlgorithm):
        multiply(A2, B2, 3, "winograd")


def test_integer_beta63_plan(rng):
    a = rng.integers(0, 3, size=(10, 50))
    b = rng.integers(0, 3, size=(50, 10))
    for algo in ("common", "right", "left", "full", "blocked"):
        assert (multiply(a, b, 3, algo, beta=63) == naive_gemm(a, b, 3)).all()
    with pytest.raises(PlanMismatch):
        multiply(a, b, 3, "right", beta=63, backend="float64")
