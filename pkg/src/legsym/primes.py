"""Prime generation, primality testing, and index bookkeeping.

The sieve works on odd-only bitmaps in fixed-size segments so memory
stays flat regardless of how far out a scan runs. A wheel pattern
knocks out multiples of 3 and 5 before the marking loop starts.

Primality is exact below 2**64 (deterministic Miller-Rabin witness
set) and Baillie-PSW above, reported as *probable* prime.

`PrimeIndexer` maps between prime values and their 1-based indices
(p_1 = 2). It keeps a checkpoint every `stride` indices so repeated
lookups never resieve from scratch, and can persist the checkpoint
table to a small cache file between runs.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .arith import jacobi

try:  # pragma: no cover - exercised only when gmpy2 is installed
    import gmpy2 as _gmpy2
except ImportError:  # pragma: no cover
    _gmpy2 = None

# Largest value the default indexer will sieve toward. Lookups past this
# raise BoundExceededError instead of silently grinding.
DEFAULT_MAX_VALUE = 2**31

# Single PrimeSegment bitmaps are capped; iterate segments for more.
MAX_SEGMENT_SPAN = 2**26

DEFAULT_SEGMENT_BITS = 2**20

CACHE_ENV_VAR = "LEGSYM_CACHE_DIR"

_MR_BASES_64 = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

_WHEEL = 15  # odd residues per 30; pattern kills multiples of 3 and 5


class BoundExceededError(Exception):
    """A request went past the configured sieve bound."""


def _simple_sieve(limit: int) -> np.ndarray:
    """All primes <= limit as int64, by plain Eratosthenes."""
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags).astype(np.int64)


_base_primes = _simple_sieve(1 << 16)


def _base_primes_upto(limit: int) -> np.ndarray:
    global _base_primes
    if _base_primes[-1] < limit:
        _base_primes = _simple_sieve(max(limit, 2 * int(_base_primes[-1])))
    return _base_primes[: int(np.searchsorted(_base_primes, limit, side="right"))]


def _wheel_pattern(first_odd: int, n_slots: int) -> np.ndarray:
    """Boolean mask over odd slots with multiples of 3 and 5 cleared."""
    tile = np.ones(_WHEEL, dtype=bool)
    for j in range(_WHEEL):
        v = (first_odd + 2 * j) % 30
        if v % 3 == 0 or v % 5 == 0:
            tile[j] = False
    reps = n_slots // _WHEEL + 1
    return np.tile(tile, reps)[:n_slots].copy()


@dataclass
class PrimeSegment:
    """Sieved window [lo, hi) backed by an odd-only bitmap."""

    lo: int
    hi: int
    _first_odd: int
    _mask: np.ndarray

    def primes(self) -> list[int]:
        """Primes in [lo, hi), ascending, as plain ints."""
        odds = (self._first_odd + 2 * np.flatnonzero(self._mask)).tolist()
        if self.lo <= 2 < self.hi:
            return [2] + odds
        return odds

    def is_prime(self, v: int) -> bool:
        if not self.lo <= v < self.hi:
            raise ValueError(f"{v} outside segment [{self.lo}, {self.hi})")
        if v == 2:
            return True
        if v < 2 or v % 2 == 0:
            return False
        return bool(self._mask[(v - self._first_odd) // 2])


def sieve_range(lo: int, hi: int) -> PrimeSegment:
    """Sieve [lo, hi) into a PrimeSegment.

    Raises:
        ValueError: if hi <= lo, or the span exceeds MAX_SEGMENT_SPAN
            (iterate `iter_prime_arrays` over sub-ranges instead).
    """
    if hi <= lo:
        raise ValueError(f"empty range [{lo}, {hi})")
    if hi - lo > MAX_SEGMENT_SPAN:
        raise ValueError(
            f"span {hi - lo} exceeds segment budget {MAX_SEGMENT_SPAN}; "
            "iterate smaller ranges (see iter_prime_arrays)"
        )
    lo = max(lo, 2)
    first_odd = lo if lo % 2 else lo + 1
    n_slots = max(0, (hi - first_odd + 1) // 2)
    mask = _wheel_pattern(first_odd, n_slots)
    if n_slots:
        for p in (3, 5):
            if first_odd <= p < hi:
                mask[(p - first_odd) // 2] = True
        base = _base_primes_upto(math.isqrt(hi - 1))
        for p in base[3:].tolist():  # 2, 3, 5 already handled
            start = max(p * p, ((lo + p - 1) // p) * p)
            if start % 2 == 0:
                start += p
            if start < hi:
                mask[(start - first_odd) // 2 :: p] = False
    return PrimeSegment(lo, hi, first_odd, mask)


def iter_prime_arrays(
    lo: int, hi: int, segment_bits: int = DEFAULT_SEGMENT_BITS
) -> Iterator[list[int]]:
    """Yield primes in [lo, hi) as one ascending list per segment."""
    span = 2 * segment_bits
    cur = max(lo, 2)
    while cur < hi:
        top = min(cur + span, hi)
        yield sieve_range(cur, top).primes()
        cur = top


def is_prime_64(n: int) -> bool:
    """Exact primality for 0 <= n < 2**64.

    Deterministic Miller-Rabin over the standard 12-witness set, with
    trial division by small primes first.

    Raises:
        ValueError: for negative n or n >= 2**64 (use is_probable_prime).
    """
    if n < 0 or n >= 1 << 64:
        raise ValueError(f"is_prime_64 requires 0 <= n < 2**64, got {n}")
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    return _miller_rabin(n, _MR_BASES_64)


def _miller_rabin(n: int, bases: Sequence[int]) -> bool:
    d = n - 1
    s = (d & -d).bit_length() - 1
    d >>= s
    for a in bases:
        a %= n
        if a == 0:
            continue
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _strong_lucas_prp(n: int) -> bool:
    """Strong Lucas test with Selfridge's parameter choice."""
    if math.isqrt(n) ** 2 == n:
        return False
    D = 5
    while True:
        j = jacobi(D % n, n)
        if j == -1:
            break
        if j == 0 and abs(D) != n:
            return False
        D = -(D + 2) if D > 0 else -(D - 2)
    Q = (1 - D) // 4
    d = n + 1
    s = (d & -d).bit_length() - 1
    d >>= s
    # Lucas chain for U_d, V_d with P = 1
    U, V, qk = 1, 1, Q % n
    for bit in bin(d)[3:]:
        U = U * V % n
        V = (V * V - 2 * qk) % n
        qk = qk * qk % n
        if bit == "1":
            U, V = (U + V) % n, (V + D * U) % n
            if U & 1:
                U += n
            if V & 1:
                V += n
            U, V = U >> 1, V >> 1
            U %= n
            V %= n
            qk = qk * Q % n
    if U == 0 or V == 0:
        return True
    for _ in range(s - 1):
        V = (V * V - 2 * qk) % n
        if V == 0:
            return True
        qk = qk * qk % n
    return False


def is_probable_prime(n: int) -> bool:
    """Primality for arbitrary n >= 0: exact below 2**64, Baillie-PSW above.

    No Baillie-PSW counterexample is known, but results above 2**64
    are formally probable primes; callers that persist them should
    carry a `probable` flag (the certificate scanner does).
    """
    if n < 1 << 64:
        return is_prime_64(n)
    if _gmpy2 is not None:
        z = _gmpy2.mpz(n)
        return bool(
            _gmpy2.is_strong_prp(z, 2) and _gmpy2.is_strong_selfridge_prp(z)
        )
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53):
        if n % p == 0:
            return False
    return _miller_rabin(n, (2,)) and _strong_lucas_prp(n)


@dataclass(frozen=True)
class PrimeWindow:
    """Consecutive primes p_n, ..., p_{n+m} (indices are 1-based)."""

    n: int
    primes: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"window index must be >= 1, got {self.n}")
        if len(self.primes) < 2:
            raise ValueError("window needs at least two primes")
        if any(b <= a for a, b in zip(self.primes, self.primes[1:])):
            raise ValueError("window primes must be strictly increasing")

    @property
    def m(self) -> int:
        return len(self.primes) - 1


class PrimeIndexer:
    """Bidirectional prime/index lookups with striding checkpoints.

    Args:
        stride: checkpoint spacing in index space.
        max_value: hard sieve bound; lookups needing primes past it fail.
        cache_dir: directory for the persistent checkpoint table. Falls
            back to $LEGSYM_CACHE_DIR, then to no persistence.
        segment_bits: odd-bitmap size per sieve segment.
    """

    def __init__(
        self,
        stride: int = 10**6,
        max_value: int = DEFAULT_MAX_VALUE,
        cache_dir: str | os.PathLike | None = None,
        segment_bits: int = DEFAULT_SEGMENT_BITS,
    ) -> None:
        if stride < 1:
            raise ValueError("stride must be positive")
        self.stride = stride
        self.max_value = max_value
        self.segment_bits = segment_bits
        self._checkpoints: list[tuple[int, int]] = [(1, 2)]
        self._cache_path: Path | None = None
        cache_dir = cache_dir if cache_dir is not None else os.environ.get(CACHE_ENV_VAR)
        if cache_dir:
            self._cache_path = Path(cache_dir) / f"prime-index-s{stride}.txt"
            self._load_cache()

    # -- cache ---------------------------------------------------------

    def _load_cache(self) -> None:
        path = self._cache_path
        if path is None or not path.exists():
            return
        lines = path.read_text().splitlines()
        if not lines or lines[0] != "legsym-prime-index v1":
            return
        loaded: list[tuple[int, int]] = []
        for line in lines[1:]:
            n_str, p_str = line.split()
            loaded.append((int(n_str), int(p_str)))
        if loaded and loaded[0] == (1, 2):
            self._checkpoints = loaded

    def _save_cache(self) -> None:
        path = self._cache_path
        if path is None:
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        body = "legsym-prime-index v1\n" + "\n".join(
            f"{n} {p}" for n, p in self._checkpoints
        )
        tmp = path.with_suffix(".tmp")
        tmp.write_text(body + "\n")
        tmp.replace(path)

    # -- checkpoint growth ---------------------------------------------

    def _extend(self, *, to_index: int | None = None, to_value: int | None = None) -> None:
        """Sieve forward until the last checkpoint covers the request."""

        def done() -> bool:
            n_last, p_last = self._checkpoints[-1]
            if to_index is not None and n_last + self.stride > to_index:
                return True
            if to_value is not None and p_last >= to_value:
                return True
            return False

        if done():
            return
        if to_value is not None and to_value > self.max_value:
            raise BoundExceededError(
                f"requested value {to_value} exceeds max_value={self.max_value}"
            )
        n_last, p_last = self._checkpoints[-1]
        count = n_last  # index of p_last
        next_mark = (n_last // self.stride + 1) * self.stride
        cur = p_last + 1
        grown = False
        while not done():
            if cur > self.max_value:
                raise BoundExceededError(
                    f"sieve bound max_value={self.max_value} reached at "
                    f"index {count}; raise max_value to continue"
                )
            top = min(cur + 2 * self.segment_bits, self.max_value + 1)
            arr = sieve_range(cur, top).primes()
            k = len(arr)
            while next_mark <= count + k:
                p_mark = int(arr[next_mark - count - 1])
                self._checkpoints.append((next_mark, p_mark))
                grown = True
                next_mark += self.stride
            count += k
            cur = top
        if grown:
            self._save_cache()

    # -- lookups ---------------------------------------------------------

    def nth_prime(self, n: int) -> int:
        """p_n with p_1 = 2.

        Raises:
            ValueError: n < 1.
            BoundExceededError: p_n would exceed max_value.
        """
        if n < 1:
            raise ValueError(f"prime index must be >= 1, got {n}")
        self._extend(to_index=n)
        n0, p0 = self._nearest_checkpoint_le(n)
        if n0 == n:
            return p0
        remaining = n - n0
        for arr in iter_prime_arrays(p0 + 1, self.max_value + 1, self.segment_bits):
            if remaining <= len(arr):
                return int(arr[remaining - 1])
            remaining -= len(arr)
        raise BoundExceededError(
            f"p_{n} exceeds max_value={self.max_value}"
        )

    def index_of_prime(self, p: int) -> int:
        """Index n with p_n = p.

        Raises:
            ValueError: if p is not prime.
            BoundExceededError: p beyond max_value.
        """
        if p > self.max_value:
            raise BoundExceededError(f"{p} exceeds max_value={self.max_value}")
        if not is_prime_64(p):
            raise ValueError(f"{p} is not prime")
        self._extend(to_value=p)
        n0, p0 = self._nearest_checkpoint_le_value(p)
        if p0 == p:
            return n0
        idx = n0
        for arr in iter_prime_arrays(p0 + 1, p + 1, self.segment_bits):
            idx += len(arr)
        return idx

    def _nearest_checkpoint_le(self, n: int) -> tuple[int, int]:
        lo, hi = 0, len(self._checkpoints)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self._checkpoints[mid][0] <= n:
                lo = mid
            else:
                hi = mid
        return self._checkpoints[lo]

    def _nearest_checkpoint_le_value(self, p: int) -> tuple[int, int]:
        lo, hi = 0, len(self._checkpoints)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self._checkpoints[mid][1] <= p:
                lo = mid
            else:
                hi = mid
        return self._checkpoints[lo]

    # -- windows ---------------------------------------------------------

    def window(self, n: int, m: int) -> PrimeWindow:
        """The window (p_n, ..., p_{n+m})."""
        if m < 1:
            raise ValueError(f"m must be >= 1, got {m}")
        first = self.nth_prime(n)
        primes = [first]
        for arr in iter_prime_arrays(first + 1, self.max_value + 1, self.segment_bits):
            need = m + 1 - len(primes)
            if need <= 0:
                break
            primes.extend(int(v) for v in arr[:need])
            if len(primes) == m + 1:
                break
        if len(primes) < m + 1:
            raise BoundExceededError(
                f"window at n={n} needs primes past max_value={self.max_value}"
            )
        return PrimeWindow(n, tuple(primes))

    def iter_windows(self, m: int, n_start: int, n_end: int) -> Iterator[PrimeWindow]:
        """Yield windows for n in [n_start, n_end); adjacent windows share m primes."""
        if m < 1:
            raise ValueError(f"m must be >= 1, got {m}")
        if n_start < 1:
            raise ValueError(f"n_start must be >= 1, got {n_start}")
        if n_end <= n_start:
            return
        first = self.nth_prime(n_start)
        buf: list[int] = []
        head = 0
        n = n_start
        for arr in iter_prime_arrays(first, self.max_value + 1, self.segment_bits):
            buf.extend(arr)
            while len(buf) - head >= m + 1:
                if n >= n_end:
                    return
                yield PrimeWindow(n, tuple(buf[head : head + m + 1]))
                head += 1
                n += 1
            del buf[:head]
            head = 0
        if n < n_end:
            raise BoundExceededError(
                f"windows past index {n - 1} need primes beyond max_value={self.max_value}"
            )


def prime_count(limit: int) -> int:
    """pi(limit): number of primes <= limit."""
    if limit < 2:
        return 0
    return sum(len(arr) for arr in iter_prime_arrays(2, limit + 1))
