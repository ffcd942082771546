"""Searches for consecutive-prime windows with prescribed symbol behavior.

A window is m+1 consecutive primes p_n, ..., p_{n+m}. A sign pattern
prescribes, for each pair i < j, the ordered Legendre symbols
(p_{n+i} / p_{n+j}) and (p_{n+j} / p_{n+i}). Uniform patterns use one
(d1, d2) for every pair; matrix patterns give a per-pair sign plus a
global orientation factor relating the two directions.

The scanner slides a two-pointer over the prime stream: when a pair
fails, every window spanning that pair is dead, so the left bound jumps
past it. Expected cost is O(1) symbol evaluations per prime for uniform
patterns. Matrix patterns fall back to per-window evaluation with early
exit, since their pair requirements shift with the window offset.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator, Sequence

from .arith import jacobi, exactly_divides
from .factoring import factorize_64
from .primes import BoundExceededError, PrimeIndexer, iter_prime_arrays
from .primroot import window_pairwise_primroot

DEFAULT_CHUNK = 250_000

# word forms exist because argparse cannot pass "--" (and friends)
# through as an option value
_UNIFORM_ALIASES = {
    "++": (1, 1),
    "--": (-1, -1),
    "+-": (1, -1),
    "-+": (-1, 1),
    "pp": (1, 1),
    "mm": (-1, -1),
    "pm": (1, -1),
    "mp": (-1, 1),
}


@dataclass(frozen=True)
class SignPattern:
    """Pair-symbol requirements for windows of m+1 consecutive primes.

    kind "uniform": every pair i < j must satisfy
        (p_i/p_j) = d1 and (p_j/p_i) = d2.
    kind "matrix": pair (i, j) must satisfy
        (p_i/p_j) = entries[(i, j)] and (p_j/p_i) = delta * entries[(i, j)].
    kind "primroot": every ordered pair must be a primitive-root pair;
        no symbols involved.
    """

    m: int
    kind: str = "uniform"
    d1: int = 1
    d2: int = 1
    delta: int = 1
    entries: tuple[tuple[int, int, int], ...] = ()  # (i, j, sign) for i < j
    strict: bool = False

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.kind not in ("uniform", "matrix", "primroot"):
            raise ValueError(f"unknown pattern kind {self.kind!r}")
        if self.kind == "uniform":
            if self.d1 not in (1, -1) or self.d2 not in (1, -1):
                raise ValueError("uniform signs must be +1 or -1")
        if self.kind == "matrix":
            if self.delta not in (1, -1):
                raise ValueError("delta must be +1 or -1")
            seen = set()
            for i, j, s in self.entries:
                if not (0 <= i < j <= self.m):
                    raise ValueError(f"bad pair ({i}, {j}) for m={self.m}")
                if s not in (1, -1):
                    raise ValueError(f"bad sign {s} at pair ({i}, {j})")
                seen.add((i, j))
            expect = {(i, j) for i in range(self.m + 1) for j in range(i + 1, self.m + 1)}
            if seen != expect:
                missing = sorted(expect - seen)
                raise ValueError(f"matrix pattern missing pairs {missing}")
        if self.strict and self.kind == "primroot":
            raise ValueError("strict witnesses apply to sign patterns only")

    # -- construction ---------------------------------------------------

    @classmethod
    def uniform(cls, m: int, d1: int, d2: int, strict: bool = False) -> "SignPattern":
        return cls(m=m, kind="uniform", d1=d1, d2=d2, strict=strict)

    @classmethod
    def primroot(cls, m: int) -> "SignPattern":
        return cls(m=m, kind="primroot")

    @classmethod
    def matrix(
        cls, m: int, delta: int, entries: dict[tuple[int, int], int], strict: bool = False
    ) -> "SignPattern":
        tup = tuple(sorted((i, j, s) for (i, j), s in entries.items()))
        return cls(m=m, kind="matrix", delta=delta, entries=tup, strict=strict)

    @classmethod
    def parse(cls, spec: str, m: int, strict: bool = False) -> "SignPattern":
        """Parse a CLI pattern spec: ++, --, +-, -+, primroot, matrix:<file>."""
        if spec in _UNIFORM_ALIASES:
            d1, d2 = _UNIFORM_ALIASES[spec]
            return cls.uniform(m, d1, d2, strict=strict)
        if spec == "primroot":
            if strict:
                raise ValueError("strict witnesses apply to sign patterns only")
            return cls.primroot(m)
        if spec.startswith("matrix:"):
            return cls.from_matrix_file(spec[len("matrix:") :], m, strict=strict)
        raise ValueError(
            f"unknown pattern {spec!r}; expected ++, --, +-, -+, primroot, or matrix:<file>"
        )

    @classmethod
    def from_matrix_file(cls, path: str, m: int, strict: bool = False) -> "SignPattern":
        """Load a matrix pattern from JSON.

        Schema: {"m": int, "delta": +-1, "entries": {"i,j": +-1 for all i<j}}.
        The file's m must agree with the requested m.
        """
        data = json.loads(Path(path).read_text())
        if data.get("m") != m:
            raise ValueError(f"matrix file has m={data.get('m')}, search wants m={m}")
        entries = {}
        for key, sign in data["entries"].items():
            i_s, j_s = key.split(",")
            entries[(int(i_s), int(j_s))] = int(sign)
        return cls.matrix(m, int(data["delta"]), entries, strict=strict)

    # -- identity ---------------------------------------------------------

    def canonical(self) -> dict:
        out: dict = {"m": self.m, "kind": self.kind, "strict": self.strict}
        if self.kind == "uniform":
            out.update(d1=self.d1, d2=self.d2)
        elif self.kind == "matrix":
            out.update(delta=self.delta, entries=list(map(list, self.entries)))
        return out

    def key(self) -> str:
        """Stable digest used by checkpoints and record serialization."""
        blob = json.dumps(self.canonical(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def describe(self) -> str:
        if self.kind == "uniform":
            s = {1: "+", -1: "-"}
            core = f"{s[self.d1]}{s[self.d2]}"
        else:
            core = self.kind
        return core + ("+strict" if self.strict else "")

    def required_pair(self, i: int, j: int) -> tuple[int, int]:
        """(lower, upper) symbol requirement for window positions i < j."""
        if self.kind == "uniform":
            return self.d1, self.d2
        if self.kind == "matrix":
            for a, b, s in self.entries:
                if (a, b) == (i, j):
                    return s, self.delta * s
            raise KeyError((i, j))
        raise ValueError("primroot patterns have no symbol requirements")


def pair_signs(p: int, q: int) -> tuple[int, int]:
    """Ordered symbol pair (jacobi(p, q), jacobi(q, p)) for odd p != q.

    Raises:
        ValueError: p == q, or either argument even.
    """
    if p == q:
        raise ValueError(f"need distinct primes, got p = q = {p}")
    if p % 2 == 0 or q % 2 == 0:
        raise ValueError(f"symbols need odd arguments, got ({p}, {q})")
    return jacobi(p, q), jacobi(q, p)


def symbol_matrix(primes: Sequence[int]) -> list[list[int]]:
    """Full (m+1)x(m+1) matrix of jacobi(p_i, p_j); zero diagonal."""
    k = len(primes)
    out = [[0] * k for _ in range(k)]
    for i in range(k):
        for j in range(k):
            if i != j:
                out[i][j] = jacobi(primes[i], primes[j])
    return out


def window_matches_signs(primes: Sequence[int], pattern: SignPattern) -> bool:
    """Evaluate one window against a sign pattern (no sliding state)."""
    if pattern.kind == "primroot":
        raise ValueError("use window_pairwise_primroot for primroot patterns")
    if len(primes) != pattern.m + 1:
        raise ValueError(
            f"window has {len(primes)} primes, pattern wants {pattern.m + 1}"
        )
    for i in range(len(primes)):
        for j in range(i + 1, len(primes)):
            want_lo, want_hi = pattern.required_pair(i, j)
            s_lo, s_hi = pair_signs(primes[i], primes[j])
            if s_lo != want_lo or s_hi != want_hi:
                return False
    return True


@dataclass(frozen=True)
class StrictCheck:
    """Outcome of the exact-division witness requirement on a window.

    For every pair i < j the difference p_j - p_i must have a prime
    divisor exceeding 2m+1 that divides it exactly once. `witnesses`
    records the smallest qualifying prime per pair when it holds.
    """

    ok: bool
    witnesses: dict[tuple[int, int], int] = field(default_factory=dict)
    failed_pair: tuple[int, int] | None = None
    reason: str = ""


def window_matches_strict(primes: Sequence[int], m: int | None = None) -> StrictCheck:
    """Check the per-pair exact-division witness condition.

    Args:
        primes: the window, strictly increasing.
        m: pattern size; defaults to len(primes) - 1. The witness bound
            is 2m+1.
    """
    if m is None:
        m = len(primes) - 1
    if len(primes) != m + 1:
        raise ValueError(f"window has {len(primes)} primes, expected {m + 1}")
    bound = 2 * m + 1
    witnesses: dict[tuple[int, int], int] = {}
    for i in range(len(primes)):
        for j in range(i + 1, len(primes)):
            d = primes[j] - primes[i]
            if d <= 0:
                raise ValueError("window primes must be strictly increasing")
            hit = None
            for fp in sorted(factorize_64(d).factors):
                if fp > bound and exactly_divides(fp, d):
                    hit = fp
                    break
            if hit is None:
                return StrictCheck(
                    False,
                    failed_pair=(i, j),
                    reason=(
                        f"difference {d} of pair ({i}, {j}) has no prime "
                        f"divisor > {bound} dividing it exactly once"
                    ),
                )
            witnesses[(i, j)] = hit
    return StrictCheck(True, witnesses=witnesses)


@dataclass(frozen=True)
class MatchRecord:
    """One matched window: index n, its primes, and the pattern it matched."""

    n: int
    primes: tuple[int, ...]
    pattern_key: str
    witnesses: dict[tuple[int, int], int] | None = None

    def to_dict(self) -> dict:
        out = {
            "n": self.n,
            "primes": [str(p) for p in self.primes],
            "pattern_key": self.pattern_key,
        }
        if self.witnesses is not None:
            out["witnesses"] = {f"{i},{j}": str(p) for (i, j), p in self.witnesses.items()}
        return out

    @classmethod
    def from_dict(cls, data: dict, pattern: SignPattern | None = None) -> "MatchRecord":
        """Rebuild a record; re-verifies the window when the pattern is given."""
        witnesses = None
        if "witnesses" in data:
            witnesses = {}
            for key, p in data["witnesses"].items():
                i_s, j_s = key.split(",")
                witnesses[(int(i_s), int(j_s))] = int(p)
        rec = cls(
            n=int(data["n"]),
            primes=tuple(int(p) for p in data["primes"]),
            pattern_key=data["pattern_key"],
            witnesses=witnesses,
        )
        if pattern is not None:
            if pattern.key() != rec.pattern_key:
                raise ValueError(
                    f"record carries pattern key {rec.pattern_key}, "
                    f"expected {pattern.key()}"
                )
            ok = (
                window_pairwise_primroot(rec.primes)
                if pattern.kind == "primroot"
                else window_matches_signs(rec.primes, pattern)
            )
            if not ok:
                raise ValueError(f"window at n={rec.n} fails its recorded pattern")
            if pattern.strict and not window_matches_strict(rec.primes, pattern.m).ok:
                raise ValueError(f"window at n={rec.n} fails the strict condition")
        return rec


# -- scanning core -------------------------------------------------------


def _scan_stream(
    arrays: Iterable,
    n_first: int,
    pattern: SignPattern,
    n_end: int | None,
    limit: int | None,
    out: list[tuple[int, tuple[int, ...]]],
) -> bool:
    """Scan a stream of prime arrays; append (n, window) matches to out.

    `n_first` is the index of the first streamed prime. Returns True if
    every window index below n_end was evaluated; False if the scan
    stopped early, either on `limit` or because the stream ran dry.
    """
    m = pattern.m
    if pattern.kind == "uniform":
        pair_ok = _uniform_pair_fn(pattern.d1, pattern.d2)
    elif pattern.kind == "primroot":
        pair_ok = _primroot_pair_ok
    else:
        return _scan_stream_matrix(arrays, n_first, pattern, n_end, limit, out)

    strict = pattern.strict
    buf: list[int] = []
    base = n_first  # global index of buf[0]
    l = 0
    r = -1
    for arr in arrays:
        for q in arr:
            buf.append(q)
            r += 1
            i = r - 1
            while i >= l:
                if not pair_ok(buf[i], q):
                    l = i + 1
                    break
                i -= 1
            n = base + r - m
            if r - l >= m and (n_end is None or n < n_end):
                window = tuple(buf[r - m : r + 1])
                if not strict or window_matches_strict(window, m).ok:
                    out.append((n, window))
                    if limit is not None and len(out) >= limit:
                        return False
            if n_end is not None and n + 1 >= n_end:
                return True
        # compact the buffer between arrays
        drop = min(l, len(buf) - (m + 1))
        if drop > 0:
            del buf[:drop]
            base += drop
            l -= drop
            r -= drop
    return False


def _uniform_pair_fn(d1: int, d2: int) -> Callable[[int, int], bool]:
    flip_needed = d1 != d2  # opposite signs require both primes = 3 (mod 4)

    def pair_ok(p: int, q: int, _jacobi=jacobi, _d1=d1, _flip=flip_needed) -> bool:
        if _jacobi(p, q) != _d1:
            return False
        both3 = (p & 3) == 3 and (q & 3) == 3
        return both3 == _flip

    return pair_ok


def _primroot_pair_ok(p: int, q: int) -> bool:
    return window_pairwise_primroot((p, q))


def _scan_stream_matrix(
    arrays: Iterable,
    n_first: int,
    pattern: SignPattern,
    n_end: int | None,
    limit: int | None,
    out: list[tuple[int, tuple[int, ...]]],
) -> bool:
    """Per-window evaluation for position-dependent (matrix) patterns."""
    m = pattern.m
    want = {}
    for i, j, s in pattern.entries:
        want[(i, j)] = (s, pattern.delta * s)
    buf: list[int] = []
    head = 0
    n = n_first
    for arr in arrays:
        buf.extend(arr)
        while len(buf) - head >= m + 1:
            if n_end is not None and n >= n_end:
                return True
            window = buf[head : head + m + 1]
            ok = True
            for (i, j), (lo, hi) in want.items():
                p, q = window[i], window[j]
                jp = jacobi(p, q)
                if jp != lo:
                    ok = False
                    break
                jq = -jp if (p & 3) == 3 and (q & 3) == 3 else jp
                if jq != hi:
                    ok = False
                    break
            if ok:
                w = tuple(window)
                if not pattern.strict or window_matches_strict(w, m).ok:
                    out.append((n, w))
                    if limit is not None and len(out) >= limit:
                        return False
            head += 1
            n += 1
        del buf[:head]
        head = 0
    return False


def _scan_worker(args: dict) -> tuple[bool, list[tuple[int, tuple[int, ...]]]]:
    """Process-pool entry: scan one index chunk from a known start prime."""
    pattern: SignPattern = args["pattern"]
    arrays = iter_prime_arrays(args["p_start"], args["max_value"] + 1)
    out: list[tuple[int, tuple[int, ...]]] = []
    complete = _scan_stream(arrays, args["n_start"], pattern, args["n_end"], None, out)
    return complete, out


# -- public search -------------------------------------------------------


@dataclass
class SearchCheckpoint:
    """Resumable search state written after every completed chunk."""

    pattern_key: str
    m: int
    last_n: int
    matches: list[dict]

    def save(self, path: str | Path) -> None:
        body = json.dumps(
            {
                "version": 1,
                "pattern_key": self.pattern_key,
                "m": self.m,
                "last_n": self.last_n,
                "matches": self.matches,
            }
        )
        tmp = Path(path).with_suffix(".tmp")
        tmp.write_text(body)
        tmp.replace(path)

    @classmethod
    def load(cls, path: str | Path) -> "SearchCheckpoint | None":
        p = Path(path)
        if not p.exists():
            return None
        data = json.loads(p.read_text())
        if data.get("version") != 1:
            raise ValueError(f"unsupported checkpoint version in {path}")
        return cls(
            pattern_key=data["pattern_key"],
            m=data["m"],
            last_n=data["last_n"],
            matches=data["matches"],
        )


def find_matches(
    pattern: SignPattern,
    *,
    n_start: int | None = None,
    n_end: int | None = None,
    limit: int | None = None,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK,
    indexer: PrimeIndexer | None = None,
    checkpoint_path: str | Path | None = None,
    on_progress: Callable[[int], None] | None = None,
) -> list[MatchRecord]:
    """Scan windows of consecutive primes for `pattern`, ascending in n.

    Args:
        n_start: first index scanned. Defaults to 2 for sign patterns
            (p_1 = 2 makes symbols ill-defined) and 1 for primroot.
        n_end: one past the last index scanned; None = run until `limit`
            matches are found or the prime bound is hit.
        limit: stop after this many matches.
        workers: process count for chunked scanning. With 1, everything
            runs in-process.
        checkpoint_path: if given, progress is persisted there after
            each chunk and a compatible existing file resumes the scan.

    Returns:
        MatchRecords in ascending n (resumed matches included).

    Raises:
        BoundExceededError: open-ended scan ran past the prime bound.
    """
    if indexer is None:
        indexer = PrimeIndexer()
    floor = 1 if pattern.kind == "primroot" else 2
    if n_start is None:
        n_start = floor
    n_start = max(n_start, floor)
    if n_end is not None and n_end <= n_start:
        return []

    prior: list[MatchRecord] = []
    if checkpoint_path is not None:
        state = SearchCheckpoint.load(checkpoint_path)
        if state is not None:
            if state.pattern_key != pattern.key():
                raise ValueError(
                    f"checkpoint {checkpoint_path} belongs to a different "
                    f"pattern (key {state.pattern_key})"
                )
            prior = [MatchRecord.from_dict(d, pattern) for d in state.matches]
            n_start = max(n_start, state.last_n + 1)

    results: list[MatchRecord] = list(prior)
    if limit is not None and len(results) >= limit:
        return results[:limit]

    def emit(raw: list[tuple[int, tuple[int, ...]]]) -> None:
        for n, window in raw:
            witnesses = None
            if pattern.strict:
                witnesses = window_matches_strict(window, pattern.m).witnesses
            results.append(
                MatchRecord(
                    n=n, primes=window, pattern_key=pattern.key(), witnesses=witnesses
                )
            )

    def write_checkpoint(last_n: int) -> None:
        if checkpoint_path is None:
            return
        SearchCheckpoint(
            pattern_key=pattern.key(),
            m=pattern.m,
            last_n=last_n,
            matches=[r.to_dict() for r in results],
        ).save(checkpoint_path)

    if workers <= 1:
        cur = n_start
        while n_end is None or cur < n_end:
            top = min(cur + chunk_size, n_end) if n_end is not None else cur + chunk_size
            p_start = indexer.nth_prime(cur)
            raw: list[tuple[int, tuple[int, ...]]] = []
            want = None if limit is None else limit - len(results)
            complete = _scan_stream(
                iter_prime_arrays(p_start, indexer.max_value + 1, indexer.segment_bits),
                cur,
                pattern,
                top,
                want,
                raw,
            )
            emit(raw)
            if limit is not None and len(results) >= limit:
                write_checkpoint(results[-1].n)
                return results[:limit]
            if not complete:
                raise BoundExceededError(
                    f"prime stream ended before index {top}; raise the "
                    f"indexer max_value (currently {indexer.max_value})"
                )
            write_checkpoint(top - 1)
            if on_progress is not None:
                on_progress(top)
            cur = top
        return results

    # Chunked multi-process scan: submit up to `workers` chunks ahead,
    # consume strictly in order so output stays ascending.
    with ProcessPoolExecutor(max_workers=workers) as pool:
        pending = []
        cur = n_start
        exhausted = False

        def submit_next() -> None:
            nonlocal cur, exhausted
            if exhausted or (n_end is not None and cur >= n_end):
                return
            top = min(cur + chunk_size, n_end) if n_end is not None else cur + chunk_size
            try:
                p_start = indexer.nth_prime(cur)
            except Exception:
                exhausted = True
                raise
            args = {
                "pattern": pattern,
                "n_start": cur,
                "n_end": top,
                "p_start": p_start,
                "max_value": indexer.max_value,
            }
            pending.append((top, pool.submit(_scan_worker, args)))
            cur = top

        for _ in range(workers):
            submit_next()
        while pending:
            top, fut = pending.pop(0)
            complete, raw = fut.result()
            emit(raw)
            if limit is not None and len(results) >= limit:
                for _, f in pending:
                    f.cancel()
                if results:
                    write_checkpoint(results[-1].n)
                return results[:limit]
            if not complete:
                for _, f in pending:
                    f.cancel()
                raise BoundExceededError(
                    f"prime stream ended before index {top}; raise the "
                    f"indexer max_value (currently {indexer.max_value})"
                )
            write_checkpoint(top - 1)
            if on_progress is not None:
                on_progress(top)
            submit_next()
    return results
