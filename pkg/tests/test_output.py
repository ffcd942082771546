"""Record writers for the supported output formats."""

import csv
import io
import json

import pytest

from legsym.output import write_records, write_scan_hits
from legsym.patterns import MatchRecord, SignPattern

PP = SignPattern.uniform(1, 1, 1)
RECORDS = [
    MatchRecord(n=6, primes=(13, 17), pattern_key=PP.key()),
    MatchRecord(n=7, primes=(17, 19), pattern_key=PP.key()),
]


def test_jsonl_lines_parse_back():
    buf = io.StringIO()
    assert write_records(RECORDS, buf, "jsonl") == 2
    rows = [json.loads(line) for line in buf.getvalue().splitlines()]
    assert [r["n"] for r in rows] == [6, 7]
    assert rows[0]["primes"] == ["13", "17"]


def test_csv_header_and_rows():
    buf = io.StringIO()
    write_records(RECORDS, buf, "csv")
    rows = list(csv.reader(io.StringIO(buf.getvalue())))
    assert rows[0] == ["n", "p0", "p1"]
    assert rows[1] == ["6", "13", "17"]
    assert len(rows) == 3


def test_bfile_is_rank_and_index():
    buf = io.StringIO()
    write_records(RECORDS, buf, "bfile")
    assert buf.getvalue() == "1 6\n2 7\n"


def test_unknown_format_is_rejected():
    with pytest.raises(ValueError, match="'tsv'"):
        write_records(RECORDS, io.StringIO(), "tsv")


def test_scan_hit_stream():
    class Hit:
        def __init__(self, n):
            self.n = n

        def to_dict(self):
            return {"n": self.n}

    buf = io.StringIO()
    assert write_scan_hits([Hit(3), Hit(9)], buf) == 2
    assert [json.loads(line)["n"] for line in buf.getvalue().splitlines()] == [3, 9]
