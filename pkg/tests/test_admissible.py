"""Admissible-set builder and its three certified properties.

Golden elements and witnesses below were produced by the deterministic
builder and independently re-checked: every element is a frame
multiple, every witness prime exceeds the threshold and divides its
difference exactly once, and stripped pairwise gcds of distinct
differences equal 1.
"""

import pytest

from legsym.admissible import (
    MAX_K,
    AdmissibleSet,
    build_admissible,
    frame_modulus,
    is_admissible,
    verify_properties,
)
from legsym.arith import exactly_divides


@pytest.mark.parametrize(
    "k,variant,expected",
    [
        (2, "lemma22", 24),
        (2, "lemma31", 840),
        (3, "lemma22", 120),
        (3, "lemma31", 9240),
        (4, "lemma22", 840),
    ],
)
def test_frame_modulus(k, variant, expected):
    assert frame_modulus(k, variant) == expected


def test_is_admissible():
    assert is_admissible([0, 2, 6])
    assert is_admissible([0, 4])
    assert is_admissible([0])
    assert not is_admissible([0, 2, 4])  # covers all classes mod 3
    assert not is_admissible(list(range(5)))
    with pytest.raises(ValueError):
        is_admissible([])
    with pytest.raises(ValueError):
        is_admissible([1, 1])


def test_build_k2_goldens():
    a = build_admissible(2, "lemma22")
    assert a.elements == (0, 120)
    assert (a.threshold, a.frame) == (4, 24)
    assert a.witnesses == {(0, 1): 5}
    assert a.trace[0].planted_primes == (5,)
    assert a.trace[0].b == 5

    b = build_admissible(2, "lemma31")
    assert b.elements == (0, 9240)
    assert (b.threshold, b.frame) == (8, 840)
    assert b.witnesses == {(0, 1): 11}


def test_build_k3_goldens():
    a = build_admissible(3, "lemma22")
    assert a.elements == (0, 840, 13955040)
    assert a.witnesses == {(0, 1): 7, (0, 2): 11, (1, 2): 13}
    second = a.trace[1]
    assert second.planted_primes == (11, 13)
    assert second.steered_primes == (7,)
    assert second.b == 116292


def test_build_k4_element_growth():
    a = build_admissible(4, "lemma22")
    assert a.elements == (0, 9240, 374359440, 573976520703607848120)


def test_build_is_deterministic():
    assert build_admissible(5, "lemma31") == build_admissible(5, "lemma31")


@pytest.mark.parametrize("variant", ["lemma22", "lemma31"])
@pytest.mark.parametrize("k", range(2, MAX_K + 1))
def test_all_sizes_verify(k, variant):
    a = build_admissible(k, variant)
    assert is_admissible(a.elements)
    report = verify_properties(a)
    assert report.ok, report.failures
    # witnesses are one per pair and pairwise distinct (disjointness)
    pairs = k * (k - 1) // 2
    assert len(a.witnesses) == pairs
    assert len(set(a.witnesses.values())) == pairs
    diffs = a.differences()
    for pair, q in a.witnesses.items():
        assert q > a.threshold
        assert exactly_divides(q, diffs[pair])


def test_build_input_validation():
    with pytest.raises(ValueError):
        build_admissible(1)
    with pytest.raises(ValueError):
        build_admissible(MAX_K + 1)
    with pytest.raises(ValueError, match="variant"):
        build_admissible(3, "lemma99")


def test_roundtrip_and_save(tmp_path):
    a = build_admissible(4, "lemma31")
    assert AdmissibleSet.from_dict(a.to_dict()) == a  # trace excluded
    path = tmp_path / "set.json"
    a.save(path)
    assert AdmissibleSet.load(path) == a


def test_set_validation():
    with pytest.raises(ValueError, match="elements"):
        AdmissibleSet(k=3, variant="lemma22", threshold=6, frame=120, elements=(0, 120))
    with pytest.raises(ValueError, match="increasing"):
        AdmissibleSet(
            k=2, variant="lemma22", threshold=4, frame=24, elements=(120, 0)
        )


def test_differences():
    a = build_admissible(3, "lemma22")
    d = a.differences()
    assert d[(0, 1)] == 840
    assert d[(0, 2)] == 13955040
    assert d[(1, 2)] == 13955040 - 840


# -- verifier failure modes ----------------------------------------------------


def test_verifier_flags_missing_witness_primes():
    # every difference of {0, 120, 240} is 2^a * 3 * 5: nothing above 6
    bad = AdmissibleSet(
        k=3, variant="lemma22", threshold=6, frame=120, elements=(0, 120, 240)
    )
    report = verify_properties(bad)
    assert not report.ok
    assert not report.witnesses_ok
    assert any("no prime above 6" in f for f in report.failures)


def test_verifier_flags_shared_large_factor():
    # 7 divides all three differences of {0, 840, 1680}
    bad = AdmissibleSet(
        k=3, variant="lemma22", threshold=6, frame=120, elements=(0, 840, 1680)
    )
    report = verify_properties(bad)
    assert not report.ok
    assert not report.disjoint_ok
    assert any("share a factor above 6" in f for f in report.failures)


def test_verifier_flags_non_frame_multiples():
    bad = AdmissibleSet(
        k=2, variant="lemma22", threshold=4, frame=24, elements=(0, 100)
    )
    report = verify_properties(bad)
    assert not report.frame_multiples


def test_verifier_flags_wrong_recorded_witness():
    good = build_admissible(2, "lemma22")
    bad = AdmissibleSet(
        k=2,
        variant=good.variant,
        threshold=good.threshold,
        frame=good.frame,
        elements=good.elements,
        witnesses={(0, 1): 7},  # 7 does not divide 120
    )
    report = verify_properties(bad)
    assert not report.witnesses_ok
    assert any("witness 7" in f for f in report.failures)


def test_verifier_flags_inadmissible_elements():
    bad = AdmissibleSet(
        k=3, variant="lemma22", threshold=6, frame=1, elements=(0, 1, 2)
    )
    report = verify_properties(bad)
    assert not report.admissible
