"""Constructs admissible sets whose pairwise differences carry clean witnesses.

The builder grows a set H = {h_1 < ... < h_k} of multiples of a primorial
frame K, one element per round, maintaining three properties relative to
a threshold T (T = 2k or 4k depending on the variant):

  (i)   H is admissible and every element is divisible by K = 4 * prod(p < T);
  (ii)  every difference h_t - h_s has a designated witness prime q > T
        dividing it exactly once;
  (iii) no prime above T divides two distinct differences.

Each round solves a CRT system: known large prime divisors of existing
differences are steered away from the new differences, and fresh primes
q_i are planted to divide the new differences exactly once. Differences
grow superexponentially, so they are never fully factored; candidate
values are accepted by exact pairwise gcd checks instead, which catch
collisions through unknown factors as well. (Any prime above T dividing
two new differences divides their difference, which is an old one, so
checking new-against-old suffices.)
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import gcd, prod
from pathlib import Path
from typing import Iterable, Sequence

from .arith import Congruence, crt_solve, exactly_divides
from .factoring import factor_bounded
from .primes import is_probable_prime, sieve_range
from .serialize import decode_int, encode_int

MAX_K = 8
_TRIAL_LIMIT = 100_000

VARIANTS = ("lemma22", "lemma31")


def _threshold(k: int, variant: str) -> int:
    if variant == "lemma22":
        return 2 * k
    if variant == "lemma31":
        return 4 * k
    raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")


def _primes_upto(n: int) -> list[int]:
    if n < 2:
        return []
    return sieve_range(2, n + 1).primes()


def _primes_from(start: int) -> Iterable[int]:
    """Primes >= start, ascending, in widening sieve windows."""
    lo = max(start, 2)
    span = 1 << 12
    while True:
        for p in sieve_range(lo, lo + span).primes():
            yield p
        lo += span
        span = min(span * 2, 1 << 24)


def frame_modulus(k: int, variant: str) -> int:
    """K = 4 * product of primes below the variant threshold."""
    return 4 * prod(_primes_upto(_threshold(k, variant) - 1))


def is_admissible(elements: Sequence[int]) -> bool:
    """True if the set misses a residue class modulo every prime.

    Only primes p <= len(elements) can be covered, so the check is
    finite. Duplicates are rejected.

    Raises:
        ValueError: empty input or repeated elements.
    """
    if not elements:
        raise ValueError("admissibility is undefined for the empty set")
    if len(set(elements)) != len(elements):
        raise ValueError("admissible sets must have distinct elements")
    for p in _primes_upto(len(elements)):
        if len({h % p for h in elements}) == p:
            return False
    return True


@dataclass(frozen=True)
class BuildRound:
    """Trace of one construction round (producing element index r+1)."""

    round: int
    steered_primes: tuple[int, ...]  # known large divisors avoided via CRT
    planted_primes: tuple[int, ...]  # q_i, one per existing element
    modulus: int
    candidates_tried: int
    b: int  # accepted CRT value; the new element is K * b


@dataclass(frozen=True)
class AdmissibleSet:
    """An admissible set with per-pair witness primes.

    witnesses maps (s, t), s < t (0-based positions), to a prime > T
    dividing elements[t] - elements[s] exactly once.
    """

    k: int
    variant: str
    threshold: int
    frame: int  # K
    elements: tuple[int, ...]
    witnesses: dict[tuple[int, int], int] = field(default_factory=dict)
    trace: tuple[BuildRound, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if self.k != len(self.elements):
            raise ValueError(
                f"k={self.k} but {len(self.elements)} elements given"
            )
        if any(b >= a for a, b in zip(self.elements[1:], self.elements)):
            raise ValueError("elements must be strictly increasing")

    def differences(self) -> dict[tuple[int, int], int]:
        """All pairwise differences elements[t] - elements[s], s < t."""
        out = {}
        for s in range(self.k):
            for t in range(s + 1, self.k):
                out[(s, t)] = self.elements[t] - self.elements[s]
        return out

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "variant": self.variant,
            "threshold": self.threshold,
            "frame": encode_int(self.frame),
            "elements": [encode_int(h) for h in self.elements],
            "witnesses": {
                f"{s},{t}": encode_int(q) for (s, t), q in sorted(self.witnesses.items())
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AdmissibleSet":
        witnesses = {}
        for key, q in data.get("witnesses", {}).items():
            s_s, t_s = key.split(",")
            witnesses[(int(s_s), int(t_s))] = decode_int(q)
        return cls(
            k=data["k"],
            variant=data["variant"],
            threshold=data["threshold"],
            frame=decode_int(data["frame"]),
            elements=tuple(decode_int(h) for h in data["elements"]),
            witnesses=witnesses,
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "AdmissibleSet":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _strip_upto(n: int, bound: int, small_primes: Sequence[int]) -> int:
    """Remove every prime factor <= bound from n (n > 0)."""
    for p in small_primes:
        if p > bound:
            break
        while n % p == 0:
            n //= p
    return n


def build_admissible(k: int, variant: str = "lemma22") -> AdmissibleSet:
    """Construct a k-element admissible set with properties (i)-(iii).

    Deterministic: each round plants the smallest usable primes and
    accepts the smallest CRT value whose new differences pass the
    exact disjointness check.

    Args:
        k: set size, 2 <= k <= 8. Element magnitude grows roughly
            doubly exponentially in k; k=8 stays under a second.
        variant: "lemma22" (threshold 2k) or "lemma31" (threshold 4k).

    Raises:
        ValueError: k out of range or unknown variant.
    """
    if not 2 <= k <= MAX_K:
        raise ValueError(f"k must be in [2, {MAX_K}], got {k}")
    T = _threshold(k, variant)
    K = frame_modulus(k, variant)
    small = _primes_upto(T)

    elements: list[int] = [0]
    diffs: list[int] = []
    known: set[int] = set()  # primes > T known to divide some difference
    witnesses: dict[tuple[int, int], int] = {}
    trace: list[BuildRound] = []

    for r in range(1, k):
        system: list[Congruence] = []
        steered = tuple(sorted(known))
        for p in steered:
            k_inv = pow(K, -1, p)
            forbidden = {(h * k_inv) % p for h in elements}
            a_p = next(a for a in range(p) if a not in forbidden)
            system.append(Congruence(a_p, p))

        planted: list[int] = []
        prime_src = _primes_from(T + 1)
        while len(planted) < r:
            q = next(prime_src)
            if q in known or any(d % q == 0 for d in diffs):
                continue
            planted.append(q)
        for h, q in zip(elements, planted):
            q2 = q * q
            c = (h * pow(K, -1, q2)) % q2
            system.append(Congruence((c + q) % q2, q2))

        sol = crt_solve(system) if system else Congruence(0, 1)
        b0, M = sol.residue, sol.modulus
        b_min = max(1, elements[-1] // K + 1)
        j = max(0, -((b0 - b_min) // M))
        tried = 0
        while True:
            b = b0 + j * M
            j += 1
            tried += 1
            new_diffs = [K * b - h for h in elements]
            ok = all(
                _strip_upto(gcd(nd, d), T, small) == 1
                for nd in new_diffs
                for d in diffs
            )
            if ok:
                break

        h_new = K * b
        for i, (q, nd) in enumerate(zip(planted, new_diffs)):
            witnesses[(i, r)] = q
            known.add(q)
            f = factor_bounded(nd, trial_limit=_TRIAL_LIMIT, rho_iterations=0)
            known.update(p for p in f.factors if p > T)
            if f.cofactor > 1 and is_probable_prime(f.cofactor):
                known.add(f.cofactor)
        diffs.extend(new_diffs)
        elements.append(h_new)
        trace.append(
            BuildRound(
                round=r,
                steered_primes=steered,
                planted_primes=tuple(planted),
                modulus=M,
                candidates_tried=tried,
                b=b,
            )
        )

    return AdmissibleSet(
        k=k,
        variant=variant,
        threshold=T,
        frame=K,
        elements=tuple(elements),
        witnesses=witnesses,
        trace=tuple(trace),
    )


@dataclass(frozen=True)
class PropertyReport:
    """Outcome of verify_properties; `failures` names every violation."""

    ok: bool
    admissible: bool
    frame_multiples: bool
    witnesses_ok: bool
    disjoint_ok: bool
    failures: tuple[str, ...] = ()


def verify_properties(aset: AdmissibleSet, factor_bound: int = _TRIAL_LIMIT) -> PropertyReport:
    """Check properties (i)-(iii) of an admissible set.

    (i) and (iii) are verified exactly; (iii) needs no factoring since
    a shared prime above the threshold shows up in a pairwise gcd.
    (ii) uses recorded witnesses when present (exact-division check);
    for pairs without a recorded witness the difference is partially
    factored up to `factor_bound`, and an inconclusive search is
    reported as a failure naming the bound.
    """
    if aset.k < 2:
        return PropertyReport(
            False, False, False, False, False,
            failures=("a single element has no differences to certify",),
        )
    T = aset.threshold
    small = _primes_upto(T)
    failures: list[str] = []

    adm = is_admissible(aset.elements)
    if not adm:
        failures.append("set covers all residues modulo some small prime")
    frame_ok = all(h % aset.frame == 0 for h in aset.elements)
    if not frame_ok:
        failures.append("not every element is a multiple of the frame modulus")

    diffs = aset.differences()
    wit_ok = True
    for pair, d in diffs.items():
        q = aset.witnesses.get(pair)
        if q is not None:
            if q <= T or not exactly_divides(q, d):
                wit_ok = False
                failures.append(
                    f"recorded witness {q} for pair {pair} does not divide "
                    f"the difference exactly once (or is below {T})"
                )
            continue
        f = factor_bounded(d, trial_limit=factor_bound)
        found = any(p > T and exactly_divides(p, d) for p in f.factors)
        if not found:
            wit_ok = False
            if f.complete:
                failures.append(
                    f"pair {pair}: no prime above {T} divides the difference "
                    f"exactly once"
                )
            else:
                failures.append(
                    f"pair {pair}: witness search inconclusive, difference "
                    f"not fully factored below {factor_bound}"
                )

    pairs = sorted(diffs)
    disjoint = True
    for a in range(len(pairs)):
        for b in range(a + 1, len(pairs)):
            g = _strip_upto(gcd(diffs[pairs[a]], diffs[pairs[b]]), T, small)
            if g != 1:
                disjoint = False
                failures.append(
                    f"differences of pairs {pairs[a]} and {pairs[b]} share a "
                    f"factor above {T} (stripped gcd {g})"
                )

    ok = adm and frame_ok and wit_ok and disjoint
    return PropertyReport(ok, adm, frame_ok, wit_ok, disjoint, tuple(failures))
