"""Record writers: JSON lines, CSV, and OEIS b-file formats."""

from __future__ import annotations

import csv
import json
from typing import IO, Iterable

from .patterns import MatchRecord
from .serialize import encode_int


def write_jsonl(records: Iterable[MatchRecord], stream: IO[str]) -> int:
    n = 0
    for rec in records:
        stream.write(json.dumps(rec.to_dict()) + "\n")
        n += 1
    return n


def write_csv(records: Iterable[MatchRecord], stream: IO[str]) -> int:
    """One row per match: n, then the window primes."""
    writer = csv.writer(stream)
    n = 0
    for rec in records:
        if n == 0:
            header = ["n"] + [f"p{i}" for i in range(len(rec.primes))]
            writer.writerow(header)
        writer.writerow([rec.n] + [str(p) for p in rec.primes])
        n += 1
    return n


def write_bfile(records: Iterable[MatchRecord], stream: IO[str]) -> int:
    """OEIS b-file lines: rank and match index n, 1-based rank."""
    n = 0
    for rank, rec in enumerate(records, start=1):
        stream.write(f"{rank} {rec.n}\n")
        n += 1
    return n


WRITERS = {"jsonl": write_jsonl, "csv": write_csv, "bfile": write_bfile}


def write_records(records: Iterable[MatchRecord], stream: IO[str], fmt: str) -> int:
    try:
        writer = WRITERS[fmt]
    except KeyError:
        raise ValueError(
            f"unknown output format {fmt!r}; expected one of {sorted(WRITERS)}"
        ) from None
    return writer(records, stream)


def write_scan_hits(hits: Iterable, stream: IO[str]) -> int:
    """ScanHits as JSON lines."""
    n = 0
    for hit in hits:
        stream.write(json.dumps(hit.to_dict()) + "\n")
        n += 1
    return n
