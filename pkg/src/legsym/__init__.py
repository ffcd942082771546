"""Legendre-symbol patterns over consecutive primes.

Search tooling for prime windows with prescribed quadratic-residue
behavior, constructive admissible sets with witnessed differences, and
CRT residue certificates whose progressions force the predicted
symbols.
"""

from .admissible import AdmissibleSet, build_admissible, is_admissible, verify_properties
from .arith import Congruence, CongruenceSystem, crt_solve, jacobi
from .certificate import (
    Certificate,
    InfeasibleCutoffError,
    ScanHit,
    build_certificate,
    scan_progression,
    verify_certificate,
)
from .patterns import (
    MatchRecord,
    SignPattern,
    find_matches,
    pair_signs,
    symbol_matrix,
    window_matches_signs,
    window_matches_strict,
)
from .primes import (
    BoundExceededError,
    PrimeIndexer,
    PrimeWindow,
    is_prime_64,
    is_probable_prime,
    sieve_range,
)
from .primroot import in_Pq, is_primitive_root, window_pairwise_primroot

__version__ = "0.1.0"

__all__ = [
    "AdmissibleSet",
    "BoundExceededError",
    "Certificate",
    "Congruence",
    "CongruenceSystem",
    "InfeasibleCutoffError",
    "MatchRecord",
    "PrimeIndexer",
    "PrimeWindow",
    "ScanHit",
    "SignPattern",
    "build_admissible",
    "build_certificate",
    "crt_solve",
    "find_matches",
    "in_Pq",
    "is_admissible",
    "is_prime_64",
    "is_primitive_root",
    "is_probable_prime",
    "jacobi",
    "pair_signs",
    "scan_progression",
    "sieve_range",
    "symbol_matrix",
    "verify_certificate",
    "verify_properties",
    "window_matches_signs",
    "window_matches_strict",
    "window_pairwise_primroot",
]
