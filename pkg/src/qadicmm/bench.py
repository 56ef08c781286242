"""Seeded benchmark driver with separate multiply and conversion timings.

"Convert" covers everything that is not the word product itself: packing
the operands, extraction or REDQ, and unpacking.  Random residues are drawn
as 64-bit words reduced mod p; the bias is irrelevant for p << 2**64.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import time
from dataclasses import dataclass

import numpy as np

from . import gemm, pack
from .fieldcore import as_modulus
from .kernels import matmul_blocked, word_matmul
from .pack import DEFAULT_BACKEND
from .plan import DEFAULT_BETA, choose_panel, plan_compression, plan_full

CSV_FIELDS = ("algorithm", "p", "m", "k", "n", "t", "e",
              "seconds_multiply", "seconds_convert", "checksum")


@dataclass(frozen=True)
class TimingRecord:
    algorithm: str
    p: int
    m: int
    k: int
    n: int
    t: int
    e: int
    seconds_multiply: float
    seconds_convert: float
    checksum: int

    def row(self) -> list:
        return [getattr(self, f) for f in CSV_FIELDS]


def random_matrix(rng: np.random.Generator, rows: int, cols: int, p: int) -> np.ndarray:
    words = rng.integers(0, 2**64, size=(rows, cols), dtype=np.uint64)
    return (words % np.uint64(p)).astype(np.int64)


def seeded_operands(seed: int, m: int, k: int, n: int, p: int):
    rng = np.random.default_rng(seed)
    return random_matrix(rng, m, k, p), random_matrix(rng, k, n, p)


def checksum(c: np.ndarray) -> int:
    return int(np.asarray(c, dtype=np.int64).sum()) % 2**32


class _Clock:
    def __init__(self):
        self.multiply = 0.0
        self.convert = 0.0

    def run(self, phase: str, fn, *args, **kwargs):
        t0 = time.perf_counter()
        out = fn(*args, **kwargs)
        setattr(self, phase, getattr(self, phase) + time.perf_counter() - t0)
        return out


def _common(clock, a, b, plan, backend):
    ca = clock.run("convert", gemm.compress_rows_reversed, a, plan, backend)
    cb = clock.run("convert", gemm.compress_cols_forward, b, plan, backend)
    gemm._check_common_backend(plan, backend)
    words = clock.run("multiply", word_matmul, ca.data, cb.data, backend)
    return clock.run("convert", pack.extract_digit_array, words, plan)


def _run_once(algo, a, b, p, beta, backend, slots, kpanel):
    clock = _Clock()
    m = as_modulus(p)
    rows, k = a.shape
    cols = b.shape[1]
    if algo == "naive":
        au, bu = a.astype(np.uint64), b.astype(np.uint64)
        words = clock.run("multiply", matmul_blocked, au, bu)
        c = clock.run("convert", lambda w: (w % np.uint64(p)).astype(np.int64), words)
        return clock, c, 0, 1
    if algo == "common":
        plan = plan_compression(m, k, beta, max_slots=slots)
        return clock, _common(clock, a, b, plan, backend), plan.t, plan.e
    if algo == "right":
        plan = plan_compression(m, k, beta, packed_length=cols, max_slots=slots)
        cb = clock.run("convert", gemm.compress_rows_forward, b, plan, backend)
        pack.check_backend(backend, plan.t * plan.e)
        words = clock.run("multiply", word_matmul,
                          a.astype(pack.word_dtype(backend)), cb.data, backend)

        def finish(w):
            w = pack.redq_array(w, plan, backend=backend)
            return gemm.uncompress(dataclasses.replace(cb, logical_rows=rows, data=w))

        return clock, clock.run("convert", finish, words), plan.t, plan.e
    if algo == "left":
        plan = plan_compression(m, k, beta, packed_length=rows, max_slots=slots)
        ca = clock.run("convert", gemm.compress_cols_forward, a, plan, backend, False)
        pack.check_backend(backend, plan.t * plan.e)
        words = clock.run("multiply", word_matmul,
                          ca.data, b.astype(pack.word_dtype(backend)), backend)

        def finish(w):
            w = pack.redq_array(w, plan, backend=backend)
            return gemm.uncompress(dataclasses.replace(ca, logical_cols=cols, data=w))

        return clock, clock.run("convert", finish, words), plan.t, plan.e
    if algo == "full":
        fplan = plan_full(m, k, beta)
        pack.check_backend(backend, fplan.t * fplan.slots)
        ca = clock.run("convert", pack.pack_array, a, 0, fplan.t, fplan.dq + 1,
                       backend=backend)
        cb = clock.run("convert", pack.pack_array, b, 1, fplan.theta_exponent,
                       fplan.dtheta + 1, backend=backend)
        words = clock.run("multiply", word_matmul, ca, cb, backend)

        def finish(w):
            w = pack.redq_array(w, fplan.base, slots=fplan.slots, backend=backend)
            return gemm.unpack_full(w, fplan, rows, cols)

        return clock, clock.run("convert", finish, words), fplan.t, fplan.slots
    if algo == "blocked":
        if kpanel is None:
            kpanel, plan = choose_panel(m, k, beta)
        else:
            plan = plan_compression(m, kpanel, beta, max_slots=slots)
        c = np.zeros((rows, cols), dtype=np.int64)
        for lo in range(0, k, kpanel):
            hi = min(lo + kpanel, k)
            c += _common(clock, a[:, lo:hi], b[lo:hi], plan, backend)
            c %= p
        return clock, c, plan.t, plan.e
    raise gemm.UnsupportedAlgorithm(f"unknown algorithm {algo!r}")


def run_bench(p: int, m: int, k: int, n: int, algo: str = "common", reps: int = 1,
              seed: int = 0, beta: int = DEFAULT_BETA, backend: str = DEFAULT_BACKEND,
              slots: int | None = None, kpanel: int | None = None) -> list[TimingRecord]:
    """Time ``reps`` runs of one algorithm on seeded m x k and k x n operands."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    a, b = seeded_operands(seed, m, k, n, p)
    # Compile the numba kernels outside the timed region.
    _run_once(algo, a[:1, :1], b[:1, :1], p, beta, backend, slots, None)
    records = []
    for _ in range(reps):
        clock, c, t, e = _run_once(algo, a, b, p, beta, backend, slots, kpanel)
        records.append(TimingRecord(algo, p, m, k, n, t, e, clock.multiply,
                                    clock.convert, checksum(c)))
    return records


def records_to_csv(records, header: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(CSV_FIELDS)
    for r in records:
        w.writerow(r.row())
    return buf.getvalue()
