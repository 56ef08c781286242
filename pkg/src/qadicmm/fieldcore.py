"""Scalar arithmetic in GF(p), positive representation [0, p-1]."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InvalidModulus

Residue = int


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class PrimeModulus:
    """A small prime p together with the cached bound (p-1)^2."""

    p: int
    pm1sq: int = field(init=False)

    def __post_init__(self):
        if not isinstance(self.p, int) or isinstance(self.p, bool):
            raise InvalidModulus(f"modulus must be an integer, got {self.p!r}")
        if self.p < 2:
            raise InvalidModulus(f"modulus must be >= 2, got {self.p}")
        if not is_prime(self.p):
            raise InvalidModulus(f"modulus {self.p} is not prime")
        object.__setattr__(self, "pm1sq", (self.p - 1) ** 2)

    def __int__(self):
        return self.p

    def check(self, value: int) -> Residue:
        if not 0 <= value < self.p:
            raise ValueError(f"{value} is not a residue mod {self.p}")
        return value


def as_modulus(m: PrimeModulus | int) -> PrimeModulus:
    return m if isinstance(m, PrimeModulus) else PrimeModulus(int(m))


def reduce(x: int, m: PrimeModulus | int) -> Residue:
    """Return ``x mod p`` for a nonnegative integer ``x``."""
    m = as_modulus(m)
    if x < 0:
        raise ValueError("reduce expects a nonnegative integer")
    return x % m.p


def addmul(acc: Residue, a: Residue, b: Residue, m: PrimeModulus | int) -> Residue:
    m = as_modulus(m)
    # Python ints never overflow; the widening is implicit.
    return (acc + a * b) % m.p
