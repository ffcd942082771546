"""Modular arithmetic over unbounded integers.

Everything here is exact integer math: Jacobi symbols, modular
exponentiation, congruence systems with CRT folding, and p-adic
valuations. No floating point anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence


def jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd n >= 1.

    Uses binary quadratic reciprocity, so n never needs factoring.
    For odd prime n this is the Legendre symbol. Negative a is handled
    through the -1 supplement, keeping small |a| fast even when n is
    enormous.

    Returns:
        +1, -1, or 0 (the last iff gcd(a, n) > 1).

    Raises:
        ValueError: if n is even or n < 1.
    """
    if n < 1 or n & 1 == 0:
        raise ValueError(f"Jacobi symbol requires odd n >= 1, got n={n}")
    result = 1
    if a < 0:
        a = -a
        if n & 3 == 3:
            result = -result
    if a >= n:
        a %= n
    while a:
        while a & 1 == 0:
            a >>= 1
            r = n & 7
            if r == 3 or r == 5:
                result = -result
        a, n = n, a
        if a & 3 == 3 and n & 3 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def mod_pow(base: int, exp: int, mod: int) -> int:
    """base**exp mod mod for exp >= 0, mod >= 1."""
    if exp < 0:
        raise ValueError("negative exponent")
    if mod < 1:
        raise ValueError("modulus must be positive")
    return pow(base, exp, mod)


def extended_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b)."""
    old_r, r = a, b
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_x, x = x, old_x - q * x
        old_y, y = y, old_y - q * y
    return old_r, old_x, old_y


@dataclass(frozen=True)
class Congruence:
    """One congruence x = residue (mod modulus), with 0 <= residue < modulus."""

    residue: int
    modulus: int

    def __post_init__(self) -> None:
        if self.modulus < 1:
            raise ValueError(f"modulus must be >= 1, got {self.modulus}")
        if not 0 <= self.residue < self.modulus:
            raise ValueError(
                f"residue {self.residue} out of range for modulus {self.modulus}"
            )

    def holds_for(self, x: int) -> bool:
        return x % self.modulus == self.residue


@dataclass
class CongruenceSystem:
    """A list of congruences with pairwise coprime moduli."""

    congruences: list[Congruence] = field(default_factory=list)

    def add(self, residue: int, modulus: int) -> None:
        self.congruences.append(Congruence(residue % modulus, modulus))

    def modulus_product(self) -> int:
        out = 1
        for c in self.congruences:
            out *= c.modulus
        return out

    def holds_for(self, x: int) -> bool:
        return all(c.holds_for(x) for c in self.congruences)


def crt_solve(congruences: Iterable[Congruence | tuple[int, int]]) -> Congruence:
    """Fold congruences into a single class via the Chinese remainder theorem.

    Accepts Congruence objects or bare (residue, modulus) pairs. Moduli
    must be pairwise coprime; the fold checks each gcd as it goes.

    Returns:
        Congruence(x, M) with M the product of all moduli and
        0 <= x < M the unique solution.

    Raises:
        ValueError: on non-coprime moduli, reporting the offending pair.
    """
    x, m = 0, 1
    for item in congruences:
        if isinstance(item, Congruence):
            r, q = item.residue, item.modulus
        else:
            r, q = item
            r %= q
        g = math.gcd(m, q)
        if g != 1:
            raise ValueError(
                f"moduli not pairwise coprime: gcd({m}, {q}) = {g}"
            )
        # x' = x + m * t with t chosen so x' = r (mod q)
        t = ((r - x) * pow(m, -1, q)) % q
        x += m * t
        m *= q
    return Congruence(x % m, m)


def p_adic_valuation(n: int, p: int) -> int:
    """Largest e with p**e dividing n. Requires n != 0 and p >= 2."""
    if n == 0:
        raise ValueError("valuation of 0 is undefined")
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}")
    n = abs(n)
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


def odd_part(n: int) -> int:
    """n with all factors of 2 removed; sign is dropped. odd_part(0) = 0."""
    if n == 0:
        return 0
    n = abs(n)
    return n >> p_adic_valuation(n, 2)


def exactly_divides(p: int, n: int) -> bool:
    """True iff p divides n exactly once (p | n but p**2 does not)."""
    if n == 0:
        return False
    return n % p == 0 and (n // p) % p != 0
