"""Primitive-root predicates against exhaustive order computation."""

import pytest
import sympy

from legsym.primes import sieve_range
from legsym.primroot import in_Pq, is_primitive_root, window_pairwise_primroot


def multiplicative_order(g: int, p: int) -> int:
    x, e = g % p, 1
    while x != 1:
        x = x * g % p
        e += 1
    return e


@pytest.mark.parametrize("p", sieve_range(3, 300).primes())
def test_matches_exhaustive_orders(p):
    generators = 0
    for g in range(1, p):
        expected = multiplicative_order(g, p) == p - 1
        assert is_primitive_root(g, p) == expected, (g, p)
        generators += expected
    assert generators == sympy.totient(p - 1)


@pytest.mark.parametrize(
    "g,p,expected",
    [
        (2, 11, True),
        (4, 7, False),
        (3, 7, True),
        (88261, 88259, True),
        (88259, 88261, True),
        (1, 3, False),
        (14, 7, False),  # multiple of p
    ],
)
def test_known_values(g, p, expected):
    assert is_primitive_root(g, p) == expected


def test_rejects_non_odd_prime_moduli():
    for p in (2, 4, 9, 1):
        with pytest.raises(ValueError):
            is_primitive_root(3, p)


def test_in_Pq_membership():
    # p = 7 = 1 (mod 2): quadratic residues are {1, 2, 4}
    assert in_Pq(4, 2, 7)
    assert not in_Pq(3, 2, 7)
    # p = 7 = 1 (mod 3): cubes are {1, 6}
    assert in_Pq(6, 3, 7)
    assert not in_Pq(2, 3, 7)
    # p not 1 (mod q) can never be in the class
    assert not in_Pq(2, 5, 7)


def test_in_Pq_subgroup_size():
    # members of the q-th power subgroup number (p-1)/q
    for p, q in ((13, 3), (31, 5), (29, 2)):
        count = sum(in_Pq(g, q, p) for g in range(1, p))
        assert count == (p - 1) // q


def test_in_Pq_input_validation():
    with pytest.raises(ValueError):
        in_Pq(2, 4, 7)
    with pytest.raises(ValueError):
        in_Pq(2, 3, 9)
    with pytest.raises(ValueError):
        in_Pq(14, 2, 7)


def test_window_pairwise_goldens():
    assert window_pairwise_primroot((88259, 88261, 88289, 88301))
    assert not window_pairwise_primroot((7, 11))
    assert window_pairwise_primroot((3, 5))
    assert not window_pairwise_primroot((89, 97))


def test_window_containing_two_is_evaluable():
    # modulus 2 has a trivial group, so any odd partner generates it
    assert window_pairwise_primroot((2, 3))
    assert window_pairwise_primroot((2, 5))
    with pytest.raises(ValueError):
        window_pairwise_primroot((5,))
