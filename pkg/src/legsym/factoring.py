"""Integer factorization: exact for 64-bit inputs, effort-bounded above.

`factorize_64` fully factors anything below 2**64 (trial division, then
Brent's cycle-finding rho on what survives). For unbounded integers,
`factor_bounded` runs the same pipeline under deterministic effort caps
and reports honestly when a cofactor resists; callers decide whether a
partial result is acceptable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .primes import is_prime_64, is_probable_prime, _base_primes_upto

_TRIAL_LIMIT_64 = 1 << 16
_RHO_BATCH = 128


@dataclass
class Factorization:
    """Prime factorization n = sign * prod(p**e), possibly partial.

    `factors` maps prime -> exponent. If `cofactor` > 1, that part is
    composite but resisted the effort bound and is *not* factored.
    `probable` marks factorizations in which some prime above 2**64
    passed only a probable-prime test.
    """

    n: int
    factors: dict[int, int] = field(default_factory=dict)
    cofactor: int = 1
    probable: bool = False

    @property
    def complete(self) -> bool:
        return self.cofactor == 1

    def reconstruct(self) -> int:
        out = self.cofactor
        for p, e in self.factors.items():
            out *= p**e
        return out if self.n >= 0 else -out

    def primes_above(self, bound: int) -> list[int]:
        return sorted(p for p in self.factors if p > bound)


def brent_rho(n: int, max_iterations: int = 1 << 22) -> int | None:
    """One factor of composite odd n via Brent's rho, or None on miss.

    Deterministic: cycles through fixed (y0, c) seeds, spending
    `max_iterations` across all restarts combined.
    """
    if n % 2 == 0:
        return 2
    spent = 0
    for seed in range(1, 64):
        y, c = seed + 1, seed
        m = _RHO_BATCH
        g, r, q = 1, 1, 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r <<= 1
            spent += r
            if spent > max_iterations:
                return None
        if g == n:
            # backtrack one step at a time
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
    return None


def _factor_into(
    n: int,
    out: dict[int, int],
    trial_limit: int,
    rho_iterations: int,
) -> tuple[int, bool]:
    """Factor n into `out`. Returns (unfactored cofactor, used_prp)."""
    probable = False
    for p in _base_primes_upto(trial_limit).tolist():
        if p * p > n:
            break
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    if n == 1:
        return 1, probable
    unsplit = 1
    stack = [n]
    while stack:
        c = stack.pop()
        if c < 1 << 64:
            if is_prime_64(c):
                out[c] = out.get(c, 0) + 1
                continue
        elif is_probable_prime(c):
            probable = True
            out[c] = out.get(c, 0) + 1
            continue
        if c < trial_limit * trial_limit:
            # composite below the trial square must have found a factor
            raise AssertionError(f"trial division missed a factor of {c}")
        d = brent_rho(c, rho_iterations)
        if d is None or d == c:
            unsplit *= c  # give up on this cofactor
        else:
            stack.append(d)
            stack.append(c // d)
    return unsplit, probable


def factorize_64(n: int) -> Factorization:
    """Complete factorization of 1 <= n < 2**64.

    Raises:
        ValueError: n out of range.
    """
    if not 1 <= n < 1 << 64:
        raise ValueError(f"factorize_64 requires 1 <= n < 2**64, got {n}")
    out: dict[int, int] = {}
    cof, _ = _factor_into(n, out, _TRIAL_LIMIT_64, 1 << 24)
    if cof != 1:  # pragma: no cover - rho budget is ample below 2**64
        raise ArithmeticError(f"rho budget exhausted on {cof}")
    return Factorization(n, out)


def factor_bounded(
    n: int,
    trial_limit: int = 10**5,
    rho_iterations: int = 1 << 21,
) -> Factorization:
    """Best-effort factorization of |n| >= 1 under deterministic caps.

    Every entry in `factors` is a certified prime below 2**64 or a
    probable prime above it (`probable` set accordingly). A surviving
    `cofactor` is composite: rho ran out of budget before splitting it.
    """
    if n == 0:
        raise ValueError("cannot factor 0")
    out: dict[int, int] = {}
    cof, probable = _factor_into(abs(n), out, trial_limit, rho_iterations)
    return Factorization(n, out, cofactor=cof, probable=probable)
