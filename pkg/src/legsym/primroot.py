"""Primitive-root predicates modulo odd primes.

A residue g generates (Z/p)* iff g^((p-1)/q) != 1 (mod p) for every
prime q dividing p-1, so the tests here ride on `factorize_64`.
The subgroup membership test `in_Pq` classifies primes p = 1 (mod q)
by whether g lands in the index-q power subgroup.
"""

from __future__ import annotations

from functools import lru_cache

from .factoring import factorize_64
from .primes import is_prime_64


@lru_cache(maxsize=4096)
def _prime_divisors_of_totient(p: int) -> tuple[int, ...]:
    return tuple(sorted(factorize_64(p - 1).factors))


def is_primitive_root(g: int, p: int) -> bool:
    """True iff g generates the multiplicative group mod the odd prime p.

    Raises:
        ValueError: p is not an odd prime, or p >= 2**64.
    """
    if p < 3 or not is_prime_64(p):
        raise ValueError(f"modulus must be an odd prime, got {p}")
    g %= p
    if g == 0:
        return False
    for q in _prime_divisors_of_totient(p):
        if pow(g, (p - 1) // q, p) == 1:
            return False
    return True


def in_Pq(g: int, q: int, p: int) -> bool:
    """Membership of p in P_q(g): p = 1 (mod q) and g a q-th power residue.

    Both the classifying prime q and the tested prime p must be prime;
    p must not divide g.

    Raises:
        ValueError: q or p not prime, or p | g.
    """
    if not is_prime_64(q):
        raise ValueError(f"q must be prime, got {q}")
    if p < 2 or not is_prime_64(p):
        raise ValueError(f"p must be prime, got {p}")
    if g % p == 0:
        raise ValueError(f"p={p} divides g={g}")
    if (p - 1) % q != 0:
        return False
    return pow(g, (p - 1) // q, p) == 1


def window_pairwise_primroot(primes: tuple[int, ...] | list[int]) -> bool:
    """True iff p_i is a primitive root mod p_j for every ordered pair i != j.

    The modulus 2 is a degenerate case: its group is trivial, so any odd
    g counts as a generator. That makes windows containing 2 evaluable
    instead of erroring out.
    """
    if len(primes) < 2:
        raise ValueError("need at least two primes")
    for j, p in enumerate(primes):
        for i, g in enumerate(primes):
            if i == j:
                continue
            if p == 2:
                if g % 2 == 0:
                    return False
                continue
            if not is_primitive_root(g, p):
                return False
    return True
