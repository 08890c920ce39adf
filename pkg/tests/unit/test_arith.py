from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from multoeplitz.arith import (PRIMES, UNIT, FactoredRational, as_rational, divisor_function, factor, is_prime,
                               nth_prime, prime_index, primes_up_to, ratio, rational_inv, rational_mul)
from multoeplitz.errors import DomainError


def test_factor_small():
    assert factor(1).exponents == ()
    assert factor(12).exponents == ((2, 2), (3, 1))
    assert factor(97).exponents == ((97, 1),)


def test_factor_large_semiprime():
    p, q = 1_000_000_007, 998_244_353
    assert factor(p * q).exponents == ((q, 1), (p, 1))
    assert factor(p * q).reconstruct() == p * q


def test_factor_rejects_out_of_range():
    for bad in (0, -3, 2 ** 63):
        with pytest.raises(DomainError):
            factor(bad)


def test_ratio_examples():
    assert ratio(6, 4).exponents == ((2, -1), (3, 1))
    assert ratio(6, 4).value == Fraction(3, 2)
    assert ratio(5, 5) == UNIT
    assert ratio(1, 8).exponents == ((2, -3),)


def test_rational_arithmetic():
    three_halves = as_rational("3/2")
    assert rational_mul(three_halves, as_rational(Fraction(2, 3))).is_unit()
    assert rational_inv(as_rational(Fraction(4, 9))).value == Fraction(9, 4)
    assert rational_mul(as_rational(2), as_rational(2)).exponents == ((2, 2),)
    assert (three_halves ** 2).value == Fraction(9, 4)
    assert str(~three_halves) == "2/3"


def test_as_rational_rejects_nonpositive():
    with pytest.raises(DomainError):
        as_rational(Fraction(-1, 2))
    with pytest.raises(DomainError):
        as_rational(1.5)


@seed(20240611)
@settings(max_examples=300, deadline=None)
@given(st.integers(min_value=1, max_value=10 ** 12), st.integers(min_value=1, max_value=10 ** 12))
def test_ratio_matches_fraction(j, k):
    q = ratio(j, k)
    assert q.value == Fraction(j, k)
    assert q == as_rational(Fraction(j, k))
    assert hash(q) == hash(as_rational(Fraction(j, k)))


@seed(7)
@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=1, max_value=2 ** 63 - 1))
def test_factor_reconstructs(n):
    f = factor(n)
    assert f.reconstruct() == n
    assert all(is_prime(p) and e > 0 for p, e in f.exponents)


def test_prime_table():
    assert PRIMES[:6] == (2, 3, 5, 7, 11, 13)
    assert nth_prime(0) == 2
    assert nth_prime(1023) == PRIMES[-1]
    assert nth_prime(2000) == int(primes_up_to(20000)[2000])
    assert prime_index(2) == 0 and prime_index(97) == 24
    assert all(prime_index(p) == i for i, p in enumerate(PRIMES))
    with pytest.raises(DomainError):
        prime_index(91)


def test_is_prime_against_sieve():
    sieve = set(int(p) for p in primes_up_to(10 ** 4))
    assert all(is_prime(n) == (n in sieve) for n in range(10 ** 4))
    assert is_prime(2 ** 61 - 1)
    assert not is_prime(3_215_031_751)  # strong pseudoprime to bases 2, 3, 5, 7


def test_divisor_function():
    d2 = divisor_function(2, 12)
    assert list(d2[1:]) == [1, 2, 2, 3, 2, 4, 2, 4, 3, 4, 2, 6]
    d3 = divisor_function(3, 8)
    # d_3(p^k) = (k+1)(k+2)/2
    assert d3[2] == 3 and d3[4] == 6 and d3[8] == 10
    assert np.array_equal(divisor_function(1, 5)[1:], np.ones(5))


def test_ordering_and_primes():
    a, b = as_rational("2/3"), as_rational(5)
    assert a < b
    assert sorted([b, a, UNIT]) == [a, UNIT, b]
    assert as_rational(Fraction(10, 21)).primes == (2, 3, 5, 7)
    assert isinstance(UNIT, FactoredRational) and UNIT.is_natural()
