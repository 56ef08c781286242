"""Command-line front end: ``plan``, ``gemm``, ``verify`` and ``bench``.

Exit codes: 0 success, 1 verification failure, 2 usage or parse error,
3 infeasible plan.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import gemm
from .bench import random_matrix, records_to_csv, run_bench
from .errors import (DimensionMismatch, InvalidModulus, NoCompression,
                     PlanMismatch, QadicError)
from .fieldcore import PrimeModulus
from .matrixfile import MatrixFormatError, read_matrix, write_matrix
from .pack import BACKENDS, DEFAULT_BACKEND
from .plan import DEFAULT_BETA, choose_panel, plan_compression, plan_full

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_PLAN = 0, 1, 2, 3
COMPRESSED = ("common", "right", "left", "full", "blocked")


def _fail(msg: str, code: int) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def cmd_plan(args) -> int:
    try:
        m = PrimeModulus(args.p)
        if args.k < 1:
            return _fail(f"k must be >= 1, got {args.k}", EXIT_USAGE)
        if args.full:
            fp = plan_full(m, args.k, args.bits)
            print(f"p={m.p} k={args.k} beta={args.bits}")
            print(f"t={fp.t} Q=2^{fp.t} kmax={fp.kmax}")
            print(f"dq={fp.dq} dq+1={fp.dq + 1} dtheta={fp.dtheta} "
                  f"dtheta+1={fp.dtheta + 1} Theta=2^{fp.theta_exponent} "
                  f"slots={fp.slots}")
            return EXIT_OK
        if args.panel:
            kpanel, plan = choose_panel(m, args.k, args.bits)
            print(f"p={m.p} k={args.k} beta={args.bits} kpanel={kpanel} "
                  f"panels={-(-args.k // kpanel)}")
        else:
            plan = plan_compression(m, args.k, args.bits)
            print(f"p={m.p} k={args.k} beta={args.bits}")
        print(f"t={plan.t} Q=2^{plan.t} d={plan.d} e={plan.e} "
              f"e_raw={plan.e_raw} kmax={plan.kmax}")
        return EXIT_OK
    except InvalidModulus as exc:
        return _fail(str(exc), EXIT_USAGE)
    except NoCompression as exc:
        return _fail(f"NoCompression: {exc}", EXIT_PLAN)


def cmd_gemm(args) -> int:
    try:
        pa, a = read_matrix(args.a_file)
        pb, b = read_matrix(args.b_file)
    except (OSError, MatrixFormatError, InvalidModulus) as exc:
        return _fail(str(exc), EXIT_USAGE)
    p = args.p if args.p is not None else pa
    if not pa == pb == p:
        return _fail(f"moduli disagree: A has p={pa}, B has p={pb}, requested p={p}",
                     EXIT_USAGE)
    if a.shape[1] != b.shape[0]:
        return _fail(f"dimension mismatch: A is {a.shape[0]}x{a.shape[1]}, "
                     f"B is {b.shape[0]}x{b.shape[1]}", EXIT_USAGE)
    try:
        c = gemm.multiply(a, b, p, args.algo, beta=args.bits, backend=args.backend,
                          kpanel=args.kpanel)
    except (NoCompression, PlanMismatch) as exc:
        return _fail(f"{type(exc).__name__}: {exc}", EXIT_PLAN)
    except DimensionMismatch as exc:
        return _fail(str(exc), EXIT_USAGE)
    write_matrix(args.out, c, p)
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        m = PrimeModulus(args.p)
    except InvalidModulus as exc:
        return _fail(str(exc), EXIT_USAGE)
    if args.max_dim < 1 or args.seeds < 1:
        return _fail("max-dim and seeds must be >= 1", EXIT_USAGE)
    algos = args.algos or COMPRESSED
    stats = {a: {"checked": 0, "skipped": 0, "failure": None} for a in algos}
    for seed in range(args.seeds):
        rng = np.random.default_rng(seed)
        rows, k, cols = (int(x) for x in rng.integers(1, args.max_dim + 1, size=3))
        a = random_matrix(rng, rows, k, m.p)
        b = random_matrix(rng, k, cols, m.p)
        kpanel = int(rng.integers(1, k + 1))
        ref = gemm.naive_gemm(a, b, m)
        for algo in algos:
            s = stats[algo]
            if s["failure"] is not None:
                continue
            try:
                c = gemm.multiply(a, b, m, algo, beta=args.bits, backend=args.backend,
                                  kpanel=kpanel if algo == "blocked" else None)
            except (NoCompression, PlanMismatch):
                s["skipped"] += 1
                continue
            s["checked"] += 1
            bad = np.argwhere(c != ref)
            if len(bad):
                i, j = (int(x) for x in bad[0])
                s["failure"] = (seed, rows, k, cols, i, j, int(c[i, j]), int(ref[i, j]))
    failed = False
    for algo in algos:
        s = stats[algo]
        if s["failure"] is None:
            print(f"{algo}: pass ({s['checked']} checked, {s['skipped']} skipped)")
        else:
            failed = True
            seed, rows, k, cols, i, j, got, want = s["failure"]
            print(f"{algo}: FAIL seed={seed} dims={rows}x{k}x{cols} "
                  f"at ({i},{j}): got {got}, expected {want}")
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_bench(args) -> int:
    try:
        PrimeModulus(args.p)
        records = run_bench(args.p, args.m, args.k, args.n, args.algo, args.reps,
                            args.seed, args.bits, args.backend, args.slots,
                            args.kpanel)
    except InvalidModulus as exc:
        return _fail(str(exc), EXIT_USAGE)
    except (NoCompression, PlanMismatch) as exc:
        return _fail(f"{type(exc).__name__}: {exc}; try --algo blocked", EXIT_PLAN)
    except (QadicError, ValueError) as exc:
        return _fail(str(exc), EXIT_USAGE)
    sys.stdout.write(records_to_csv(records, header=not args.no_header))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qadicmm",
        description="Compressed matrix multiplication over small prime fields.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--bits", type=int, default=DEFAULT_BETA,
                        help="exactly representable bits per word (default 53)")

    def backend(sp):
        sp.add_argument("--backend", choices=sorted(BACKENDS), default=DEFAULT_BACKEND)

    sp = sub.add_parser("plan", help="show Q, d, e and kmax for p and k")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    common(sp)
    mode = sp.add_mutually_exclusive_group()
    mode.add_argument("--full", action="store_true", help="plan full compression")
    mode.add_argument("--panel", action="store_true",
                      help="propose a panel width for blocked multiplication")
    sp.set_defaults(func=cmd_plan)

    sp = sub.add_parser("gemm", help="multiply two matrix files")
    sp.add_argument("--algo", choices=gemm.ALGORITHMS, default="common")
    sp.add_argument("a_file")
    sp.add_argument("b_file")
    sp.add_argument("-o", "--out", required=True)
    sp.add_argument("--p", type=int, default=None,
                    help="expected modulus (defaults to the files' header)")
    sp.add_argument("--kpanel", type=int, default=None)
    common(sp)
    backend(sp)
    sp.set_defaults(func=cmd_gemm)

    sp = sub.add_parser("verify", help="check every algorithm against the naive product")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--max-dim", type=int, default=32)
    sp.add_argument("--seeds", type=int, default=100)
    sp.add_argument("--algos", nargs="+", choices=COMPRESSED)
    common(sp)
    backend(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("bench", help="emit timing rows as CSV")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--algo", choices=gemm.ALGORITHMS, default="common")
    sp.add_argument("--reps", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--slots", type=int, default=None,
                    help="cap residues per word (1 gives the unpacked layout)")
    sp.add_argument("--kpanel", type=int, default=None)
    sp.add_argument("--no-header", action="store_true")
    common(sp)
    backend(sp)
    sp.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
