"""Decimal-string encoding for very large integers.

CPython caps int/str conversion length by default; constructed values
here routinely run to tens of thousands of digits, so both directions
raise the cap on demand instead of failing.
"""

from __future__ import annotations

import sys


def encode_int(v: int) -> str:
    try:
        return str(v)
    except ValueError:
        sys.set_int_max_str_digits(v.bit_length() // 3 + 16)
        return str(v)


def decode_int(s: str) -> int:
    s = s.strip()
    if len(s) > sys.get_int_max_str_digits():
        sys.set_int_max_str_digits(len(s) + 16)
    return int(s)
