"""Progression certificates: construction, verification, and scanning.

Certificates are self-contained claims about the arithmetic progression
W*n + b: prescribed pair symbols inside prime-rich windows (thm13 mode)
or a full minus-one symbol table with composite covering of the gaps
(lemma32 mode). Builders and verifiers are tested against each other
and against direct integer checks; tampering any residue must surface
as a named failing check.
"""

import dataclasses
import json
import math

import pytest
import sympy

from legsym.admissible import build_admissible
from legsym.arith import jacobi
from legsym.certificate import (
    Certificate,
    InfeasibleCutoffError,
    build_certificate,
    choose_rp,
    minimal_cutoff,
    scan_progression,
    verify_certificate,
)
from legsym.patterns import pair_signs
from legsym.primes import is_probable_prime

ALL_SIGNS = [(1, 1), (1, -1), (-1, 1), (-1, -1)]


@pytest.fixture(scope="module")
def small_set():
    return build_admissible(2, "lemma22")


@pytest.fixture(scope="module")
def certs(small_set):
    return {
        (d1, d2): build_certificate(small_set, "thm13", d1=d1, d2=d2)
        for d1, d2 in ALL_SIGNS
    }


@pytest.fixture(scope="module")
def lemma32_cert():
    return build_certificate(build_admissible(2, "lemma31"), "lemma32")


# -- residue steering ------------------------------------------------------------


def test_choose_rp_small_prime():
    # steering prime 5 for the pair (0, 120): 0 is forbidden either way
    assert choose_rp(5, (0, 1), (0, 120), 1, "thm13", delta=1) == 1
    assert choose_rp(5, (0, 1), (0, 120), -1, "thm13", delta=1) == 2
    assert choose_rp(5, (0, 1), (0, 120), 1, "thm13", delta=-1) == 1
    assert choose_rp(5, (0, 1), (0, 120), -1, "thm13", delta=-1) == 2


def test_choose_rp_lemma32_avoids_shifted_classes():
    r = choose_rp(11, (0, 1), (0, 9240), 1, "lemma32")
    assert r == 3
    assert jacobi(r, 11) == 1
    # both the translated offsets and their shifts stay off 0 mod 11
    assert r % 11 != 0 and (r - 1) % 11 != 0


def test_choose_rp_validation():
    with pytest.raises(ValueError):
        choose_rp(5, (0, 1), (0, 120), 0, "thm13")
    with pytest.raises(ValueError):
        choose_rp(5, (0, 1), (0, 120), 1, "lemma99")


# -- construction ------------------------------------------------------------------


def test_minimal_cutoff(small_set):
    assert minimal_cutoff(small_set, "thm13") == 859


@pytest.mark.parametrize("d1,d2", ALL_SIGNS)
def test_build_goldens(certs, d1, d2):
    cert = certs[(d1, d2)]
    assert cert.w == 859
    assert cert.b % 24 == (d1 * d2) % 24
    assert len(cert.gap_offsets) == 119
    assert cert.gap_offsets == tuple(range(1, 120))
    assert len(cert.gap_primes) == 119
    assert len(cert.q_residues) == 27

    wr = cert.witness_residues[0]
    assert (wr.p, wr.pair, wr.multiplicity, wr.target) == (5, (0, 1), 1, d2)
    assert wr.r == (1 if d2 == 1 else 2)


def test_build_modulus_is_four_times_the_primorial(certs):
    cert = certs[(1, 1)]
    assert cert.W == 4 * math.prod(sympy.primerange(2, 860))
    assert cert.W.bit_length() == 1195
    assert 0 < cert.b < cert.W


def test_covering_identity_holds_directly(certs):
    cert = certs[(1, -1)]
    for a, q in zip(cert.gap_offsets, cert.gap_primes):
        assert cert.W % q == 0
        assert (cert.b + a) % q == 0


def test_leftover_residues_dodge_translated_offsets(certs):
    cert = certs[(-1, 1)]
    for q, r in cert.q_residues:
        assert cert.b % q == r
        for h in cert.offsets():
            assert (r + h) % q != 0


def test_infeasible_cutoff(small_set):
    with pytest.raises(InfeasibleCutoffError) as exc_info:
        build_certificate(small_set, "thm13", d1=1, d2=1, w=700)
    err = exc_info.value
    assert err.required == 119
    assert err.available == 95
    assert "w=700" in str(err)


def test_larger_cutoff_builds_and_verifies(small_set):
    cert = build_certificate(small_set, "thm13", d1=1, d2=1, w=1000)
    assert cert.w == 1000
    assert cert.W == 4 * math.prod(sympy.primerange(2, 1001))
    assert verify_certificate(cert).ok


def test_build_rejects_mismatched_inputs(small_set):
    large_set = build_admissible(2, "lemma31")
    with pytest.raises(ValueError, match="got lemma31"):
        build_certificate(large_set, "thm13", d1=1, d2=1)
    with pytest.raises(ValueError, match="got lemma22"):
        build_certificate(small_set, "lemma32")
    with pytest.raises(ValueError, match="d1, d2"):
        build_certificate(small_set, "thm13")
    with pytest.raises(ValueError, match="m=3"):
        build_certificate(small_set, "thm13", m=3, d1=1, d2=1)
    with pytest.raises(ValueError, match="thm13"):
        build_certificate(build_admissible(2, "lemma31"), "lemma32", d1=1)
    with pytest.raises(ValueError, match="variant"):
        build_certificate(small_set, "thm99", d1=1, d2=1)


def test_value_is_the_progression_member(certs):
    cert = certs[(1, 1)]
    assert cert.value(3, 1) == cert.W * 3 + cert.b + 120
    assert cert.delta == 1
    assert certs[(1, -1)].delta == -1


# -- serialization -----------------------------------------------------------------


def test_certificate_roundtrip(certs, tmp_path):
    cert = certs[(-1, -1)]
    assert Certificate.from_dict(cert.to_dict()) == cert
    path = tmp_path / "cert.json"
    cert.save(path)
    assert Certificate.load(path) == cert


def test_deserialization_gates(certs):
    blob = certs[(1, 1)].to_dict()
    wrong = dict(blob, schema="legsym-certificate/9")
    with pytest.raises(ValueError, match="schema"):
        Certificate.from_dict(wrong)
    missing = dict(blob)
    del missing["b"]
    with pytest.raises(ValueError, match="b"):
        Certificate.from_dict(missing)


# -- verification ------------------------------------------------------------------


def test_verify_passes_and_names_checks(certs):
    report = verify_certificate(certs[(1, 1)])
    assert report.ok
    names = {c.name for c in report.checks}
    assert {
        "admissible-set",
        "modulus-identity",
        "congruence-frame",
        "steering-mod-5",
        "gap-set",
        "symbol-chain-0-1",
    } <= names


def test_verify_flags_shifted_residue(certs):
    cert = certs[(1, 1)]
    # bump b by the frame: the frame congruence still holds, steering
    # and gap congruences all break, and every failure is named
    bad = dataclasses.replace(cert, b=cert.b + 24)
    report = verify_certificate(bad)
    assert not report.ok
    by_name = {c.name: c for c in report.checks}
    assert by_name["congruence-frame"].ok
    assert not by_name["steering-mod-5"].ok
    assert not by_name["gap-mod-127"].ok
    assert "127" in by_name["gap-mod-127"].detail


def test_verify_flags_unit_offset(certs):
    bad = dataclasses.replace(certs[(1, 1)], b=certs[(1, 1)].b + 1)
    report = verify_certificate(bad)
    assert not report.ok
    assert any("congruence-frame" == c.name and not c.ok for c in report.checks)


# -- scanning ----------------------------------------------------------------------


def test_scan_finds_the_first_prime_pairs(certs):
    cert = certs[(1, 1)]
    result = scan_progression(cert, 1, 5000)
    assert result.ok
    assert result.n_scanned == 4999
    assert [h.n for h in result.hits] == [87, 826]
    assert result.violations == []
    assert result.primality_tested > 0
    assert result.covering_checked > 0

    first = result.hits[0]
    assert first.prime_positions == (0, 1)
    assert first.observed == ((0, 1, 1, 1),)
    assert first.probable
    v0, v1 = (e[1] for e in first.entries)
    assert v1 - v0 == 120
    assert pair_signs(v0, v1) == (1, 1)
    assert is_probable_prime(v0) and is_probable_prime(v1)
    json.dumps(first.to_dict())  # serializable as emitted by the CLI


def test_scan_respects_max_hits(certs):
    result = scan_progression(certs[(1, 1)], 1, 5000, max_hits=1)
    assert [h.n for h in result.hits] == [87]


def test_scan_parallel_equals_sequential(certs):
    cert = certs[(-1, -1)]
    seq = scan_progression(cert, 1, 6000)
    par = scan_progression(cert, 1, 6000, workers=2)
    assert [h.n for h in par.hits] == [h.n for h in seq.hits]
    assert par.n_scanned == seq.n_scanned
    assert par.violations == []


def test_scan_rejects_empty_range(certs):
    with pytest.raises(ValueError):
        scan_progression(certs[(1, 1)], 10, 10)


# -- lemma32 mode ------------------------------------------------------------------


def test_lemma32_structure(lemma32_cert):
    cert = lemma32_cert
    assert cert.w == 109199
    assert cert.b % 24 == 17
    assert cert.W.bit_length() == 157007
    assert len(cert.gap_offsets) == 9238
    wr = cert.witness_residues[0]
    assert (wr.p, wr.pair, wr.multiplicity, wr.target, wr.r) == (11, (0, 1), 1, 1, 3)
    with pytest.raises(ValueError):
        cert.delta  # symbols are not prescribed pairwise here


def test_lemma32_symbol_table_is_all_minus_one(lemma32_cert):
    h = lemma32_cert.offsets()
    b = lemma32_cert.b
    for s in range(2):
        for t in range(2):
            if s != t:
                assert jacobi(h[s] - h[t], b + h[t]) == -1


def test_lemma32_verifies(lemma32_cert):
    report = verify_certificate(lemma32_cert)
    assert report.ok, report.failures()
    names = {c.name for c in report.checks}
    assert "unit-class-mod8" in names
    assert "symbols-all-minus-one" in names


def test_lemma32_roundtrip_with_huge_numbers(lemma32_cert):
    # b and W both run past 47000 digits; the codec must hide the
    # interpreter's int/str conversion cap
    back = Certificate.from_dict(lemma32_cert.to_dict())
    assert back == lemma32_cert


def test_lemma32_scan_checks_symbols_per_index(lemma32_cert):
    result = scan_progression(lemma32_cert, 1, 201)
    assert result.ok
    assert result.hits == []  # primality not hunted at this size
    assert result.symbol_checks == 400  # two ordered pairs per index
    assert result.covering_checked > 0
    assert result.primality_tested == 0


@pytest.mark.extended
def test_scan_hit_density_over_a_million_indices(certs):
    # frozen from a clean full run; a drift here means the presieve or
    # the primality chain changed behavior
    result = scan_progression(certs[(1, 1)], 1, 10**6 + 1)
    assert result.violations == []
    assert len(result.hits) == 217
    assert result.hits[0].n == 87
    assert result.hits[-1].n == 992332
