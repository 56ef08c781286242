"""Choosing the Q-adic base and the number of residues per word.

Two bounds drive everything here.  The common dimension ``k`` fixes a lower
bound on ``Q = 2**t``: every digit of an accumulated product is a sum of at
most ``k`` products of residues, so ``k*(p-1)**2 < Q`` keeps digits from
carrying into their neighbours.  The word width ``beta`` fixes an upper bound:
``Q**e < 2**beta`` so that the ``e`` digits fit exactly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import NoCompression, UnsupportedAlgorithm
from .fieldcore import PrimeModulus, as_modulus

DEFAULT_BETA = 53


def min_exponent(m: PrimeModulus, k: int) -> int:
    """Smallest t with 2**t > k*(p-1)**2."""
    return (k * m.pm1sq).bit_length()


def kmax_for(m: PrimeModulus, t: int) -> int:
    return ((1 << t) - 1) // m.pm1sq


def slot_capacity(t: int, beta: int) -> int:
    # Largest e with Q**e < 2**beta, i.e. t*e <= beta - 1.
    return (beta - 1) // t


@dataclass(frozen=True)
class CompressionPlan:
    modulus: PrimeModulus
    t: int
    d: int
    e: int
    beta: int
    kmax: int
    e_raw: int
    additive: bool = False

    @property
    def p(self) -> int:
        return self.modulus.p

    @property
    def q(self) -> int:
        return 1 << self.t

    @property
    def mask(self) -> int:
        return (1 << self.t) - 1

    @property
    def inv_qd(self) -> float:
        """Reciprocal of Q**d; exact in binary64 because Q is a power of two."""
        return math.ldexp(1.0, -self.t * self.d)

    def check_k(self, k: int) -> bool:
        return k <= self.kmax

    def __str__(self):
        return (f"p={self.p} t={self.t} Q=2^{self.t} d={self.d} e={self.e} "
                f"kmax={self.kmax} beta={self.beta}")


def _additive_kmax(kmax: int, e: int) -> int:
    # floor(kmax / 2**(1/e)) computed exactly: largest j with 2*j**e <= kmax**e.
    j = int(kmax / 2 ** (1.0 / e))
    while j > 0 and 2 * j**e > kmax**e:
        j -= 1
    while 2 * (j + 1) ** e <= kmax**e:
        j += 1
    return j


def plan_compression(m: PrimeModulus | int, k: int, beta: int = DEFAULT_BETA, *,
                     max_slots: int | None = None,
                     packed_length: int | None = None,
                     additive: bool = False) -> CompressionPlan:
    """Plan packing for a product with common dimension ``k``.

    ``t`` is the smallest exponent satisfying the digit bound, which maximises
    the number of slots.  The slot count is capped by ``k`` (extra slots would
    only hold zeros) and optionally by ``max_slots``; ``max_slots=1`` yields
    the unpacked layout used as a benchmarking baseline.  When the packed
    axis is not the common one (right or left compression) pass its length as
    ``packed_length`` so the cap uses it instead of ``k``.

    With ``additive`` the extraction adds ``Q**(2d+1)`` instead of multiplying
    by ``1/Q**d``; this doubles the accumulated magnitude, so the usable
    common dimension shrinks by ``2**(1/e)`` and ``t`` may have to grow.
    """
    m = as_modulus(m)
    if k < 1:
        raise ValueError(f"common dimension must be >= 1, got {k}")
    if beta < 2:
        raise ValueError(f"beta must be >= 2, got {beta}")
    if max_slots is not None and max_slots < 1:
        raise ValueError("max_slots must be >= 1")

    t = min_exponent(m, k)
    while True:
        e_raw = slot_capacity(t, beta)
        if e_raw < 2:
            raise NoCompression(
                f"p={m.p}, k={k}: Q=2^{t} leaves room for {e_raw} residue(s) "
                f"in {beta} bits")
        e = min(e_raw, k if packed_length is None else packed_length)
        if max_slots is not None:
            e = min(e, max_slots)
        kmax = kmax_for(m, t)
        if additive:
            kmax = _additive_kmax(kmax, e)
            if kmax < k:
                t += 1
                continue
        return CompressionPlan(modulus=m, t=t, d=e - 1, e=e, beta=beta,
                               kmax=kmax, e_raw=e_raw, additive=additive)


@dataclass(frozen=True)
class FullPlan:
    """Packing in two bases: Q along the rows of A, Theta = Q**(dq+1) along B."""

    base: CompressionPlan
    dq: int
    dtheta: int

    @property
    def modulus(self) -> PrimeModulus:
        return self.base.modulus

    @property
    def p(self) -> int:
        return self.base.p

    @property
    def t(self) -> int:
        return self.base.t

    @property
    def q(self) -> int:
        return self.base.q

    @property
    def beta(self) -> int:
        return self.base.beta

    @property
    def kmax(self) -> int:
        return self.base.kmax

    @property
    def theta_exponent(self) -> int:
        return self.t * (self.dq + 1)

    @property
    def theta(self) -> int:
        return 1 << self.theta_exponent

    @property
    def slots(self) -> int:
        return (self.dq + 1) * (self.dtheta + 1)

    def __str__(self):
        return (f"p={self.p} t={self.t} Q=2^{self.t} dq={self.dq} "
                f"dtheta={self.dtheta} Theta=2^{self.theta_exponent} "
                f"kmax={self.kmax} beta={self.beta}")


def plan_full(m: PrimeModulus | int, k: int, beta: int = DEFAULT_BETA) -> FullPlan:
    m = as_modulus(m)
    if k < 1:
        raise ValueError(f"common dimension must be >= 1, got {k}")
    if beta < 2:
        raise ValueError(f"beta must be >= 2, got {beta}")
    t = min_exponent(m, k)
    cap = slot_capacity(t, beta)
    if cap < 4:
        raise NoCompression(
            f"p={m.p}, k={k}: Q=2^{t} gives {cap} slot(s); full compression "
            f"needs at least 2 per axis")
    q_slots = math.isqrt(cap)
    theta_slots = cap // q_slots
    base = CompressionPlan(modulus=m, t=t, d=q_slots - 1, e=q_slots, beta=beta,
                           kmax=kmax_for(m, t), e_raw=cap)
    return FullPlan(base=base, dq=q_slots - 1, dtheta=theta_slots - 1)


def choose_panel(m: PrimeModulus | int, k: int,
                 beta: int = DEFAULT_BETA) -> tuple[int, CompressionPlan]:
    """Pick a panel width for splitting a long common dimension.

    Smaller ``t`` means more slots per word but a shorter legal panel.  Every
    ``t`` from 1 up to the single-panel exponent is scored by its effective
    slot count; the best one wins, ties going to the wider panel (fewer
    intermediate reductions).
    """
    m = as_modulus(m)
    best = None
    for t in range(1, min_exponent(m, k) + 1):
        kpanel = min(k, kmax_for(m, t))
        if kpanel < 1 or slot_capacity(t, beta) < 2:
            continue
        e = min(slot_capacity(t, beta), kpanel)
        key = (e, kpanel)
        if best is None or key > best[0]:
            best = (key, kpanel)
    if best is None:
        raise NoCompression(f"p={m.p}: no panel width admits two slots in {beta} bits")
    kpanel = best[1]
    return kpanel, plan_compression(m, kpanel, beta)


class Algorithm(enum.Enum):
    COMMON = "common"
    RIGHT = "right"
    LEFT = "left"
    FULL = "full"


def as_algorithm(algorithm) -> Algorithm:
    if isinstance(algorithm, Algorithm):
        return algorithm
    try:
        return Algorithm(str(algorithm).lower())
    except ValueError:
        raise UnsupportedAlgorithm(f"unknown algorithm {algorithm!r}") from None


@dataclass(frozen=True)
class GainEstimate:
    algorithm: Algorithm
    e: int
    omega: Fraction
    op_count: Fraction | float
    baseline_op_count: Fraction | float
    reductions: Fraction | float
    reduction_kind: str
    conversions: Fraction
    conversion_kind: str

    @property
    def ratio(self):
        return self.baseline_op_count / self.op_count


def _pow(base: Fraction, exp: Fraction):
    if exp.denominator == 1:
        return base ** int(exp)
    return float(base) ** float(exp)


def _axis_slots(plan):
    """Slots along the (m, n) axes for full compression."""
    if isinstance(plan, FullPlan):
        return Fraction(plan.dq + 1), Fraction(plan.dtheta + 1)
    root = math.isqrt(plan.e)
    if root * root == plan.e:
        return Fraction(root), Fraction(root)
    return math.sqrt(plan.e), math.sqrt(plan.e)


def predicted_gain(plan, algorithm, m: int, k: int, n: int,
                   omega=3) -> GainEstimate:
    """Evaluate the operation and reduction counts of one algorithm.

    Operation counts are the leading terms only (constants dropped); the
    uncompressed baseline is the same expression with one slot per word.
    Counts are exact fractions whenever the exponents are integral.
    """
    algorithm = as_algorithm(algorithm)
    omega = Fraction(omega)
    if not 2 <= omega <= 3:
        raise ValueError(f"omega must lie in [2, 3], got {omega}")
    e = plan.slots if isinstance(plan, FullPlan) else plan.e
    m, k, n = Fraction(m), Fraction(k), Fraction(n)
    conversions = m * n / e

    if algorithm is Algorithm.COMMON:
        ops = m * n * _pow(k / e, omega - 2)
        base = m * n * _pow(k, omega - 2)
        return GainEstimate(algorithm, e, omega, ops, base, m * n, "REDC",
                            conversions, "INIT_e")
    if algorithm is Algorithm.RIGHT:
        ops = m * k * _pow(n / e, omega - 2)
        base = m * k * _pow(n, omega - 2)
        return GainEstimate(algorithm, e, omega, ops, base, m * (n / e),
                            "REDQ_e", conversions, "EXTRACT_e")
    if algorithm is Algorithm.LEFT:
        ops = n * k * _pow(m / e, omega - 2)
        base = n * k * _pow(m, omega - 2)
        return GainEstimate(algorithm, e, omega, ops, base, (m / e) * n,
                            "REDQ_e", conversions, "EXTRACT_e")
    rows, cols = _axis_slots(plan)
    ops = k * _pow(m * n / e, (omega - 1) / 2)
    base = k * _pow(m * n, (omega - 1) / 2)
    return GainEstimate(algorithm, e, omega, ops, base, (m / rows) * (n / cols),
                        "REDQ_e", conversions, "INIT_e")
