from fractions import Fraction

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st
from scipy.integrate import trapezoid

from multoeplitz.errors import DomainError, ResourceLimitError
from multoeplitz.index_sets import IndexSet, additive_segment, exponent_box, natural_segment
from multoeplitz.operators import (compressed_power, enlarged_set, enlarged_set_power, gram_matrix,
                                   hs_offdiagonal_norm_sq, truncate)
from multoeplitz.symbol import (MULTIPLICATIVE, Symbol, additive, constant_symbol, dilation_symbol, unit_symbol)

A1 = additive(1)


def test_unit_symbol_gives_identity():
    for sigma in (exponent_box(2, 1), additive_segment(5)):
        T = truncate(unit_symbol(sigma.kind), sigma)
        assert np.array_equal(T.entries, np.eye(len(sigma)))


def test_tridiagonal():
    T = truncate(Symbol(A1, {1: 1, -1: 1}), additive_segment(6))
    expected = np.eye(6, k=1) + np.eye(6, k=-1)
    assert np.array_equal(T.entries, expected)
    assert T.is_hermitian()


def test_multiplicative_pattern():
    sigma = exponent_box(1, 1)
    T = truncate(Symbol(MULTIPLICATIVE, {2: 1, Fraction(1, 2): 1}), sigma)
    labels = sigma.labels()
    for j, a in enumerate(labels):
        for k, b in enumerate(labels):
            assert T.entries[j, k] == (1 if Fraction(a, b) in (2, Fraction(1, 2)) else 0)


def test_entries_follow_ratio():
    s = Symbol(MULTIPLICATIVE, {3: 2.0, Fraction(2, 3): 1j, 1: 0.5})
    sigma = natural_segment(12)
    T = truncate(s, sigma)
    for j in range(1, 13):
        for k in range(1, 13):
            assert T.entries[j - 1, k - 1] == s.coeff(Fraction(j, k))


def test_caps_and_kinds():
    with pytest.raises(ResourceLimitError):
        truncate(unit_symbol(A1), additive_segment(10), max_size=5)
    with pytest.raises(DomainError):
        truncate(unit_symbol(MULTIPLICATIVE), additive_segment(3))


def test_compressed_power_first_power():
    s = Symbol(A1, {1: 1, -1: 1, 0: 0.5})
    sigma = additive_segment(7)
    assert np.array_equal(compressed_power(s, sigma, 1).entries, truncate(s, sigma).entries)


def test_hs_offdiagonal_norm():
    assert hs_offdiagonal_norm_sq(constant_symbol(MULTIPLICATIVE, 3), natural_segment(20)) == 0.0
    s = Symbol(MULTIPLICATIVE, {2: 1, Fraction(1, 2): 1})
    for n in (7, 10, 101):
        assert hs_offdiagonal_norm_sq(s, natural_segment(n)) == pytest.approx(2 * (n - n // 2) / n)


def test_hs_tail_on_boxes():
    s = Symbol(MULTIPLICATIVE, {2: 0.5, Fraction(1, 2): 0.5})
    values = [hs_offdiagonal_norm_sq(s, exponent_box(k, k)) for k in range(1, 51)]
    assert all(b <= a for a, b in zip(values, values[1:]))
    for k, value in zip(range(1, 51), values):
        assert value <= 2 * s.l2_norm_sq() / (k + 1) + 1e-15
    assert values[-1] < 0.01


def test_hs_matches_dense_tail():
    s = Symbol(A1, {1: 1, -1: 1, 2: 0.5, -2: 0.5})
    sigma = additive_segment(10)
    plus, inner = enlarged_set(s, sigma, 1)
    T = truncate(s, plus).entries
    outside = np.setdiff1d(np.arange(len(plus)), inner)
    tail = np.sum(np.abs(T[np.ix_(inner, outside)]) ** 2) / len(sigma)
    assert hs_offdiagonal_norm_sq(s, sigma) == pytest.approx(tail)


def test_gram_identity():
    sigma = exponent_box(3, 2)
    assert np.allclose(gram_matrix([1.0], sigma).entries, np.eye(len(sigma)))
    a = [1.0, 0.5, -0.25]
    G = gram_matrix(a, sigma)
    T = truncate(dilation_symbol(a), sigma)
    assert np.abs(G.entries - T.entries.T).max() <= 1e-12


def test_gram_against_inner_products():
    a = [1.0, 0.5]
    sigma = IndexSet(MULTIPLICATIVE, [1, 2, 3, 4])
    G = gram_matrix(a, sigma).entries
    x = np.linspace(0.0, 1.0, 40001)

    def dilate(j):
        return sum(c * np.sqrt(2) * np.sin(np.pi * (n + 1) * j * x) for n, c in enumerate(a))

    for p, j in enumerate(sigma.labels()):
        for q, k in enumerate(sigma.labels()):
            assert trapezoid(dilate(j) * dilate(k), x) == pytest.approx(G[p, q].real, abs=1e-6)


def test_to_csv(tmp_path):
    T = truncate(Symbol(A1, {1: 1j, -1: -1j}), additive_segment(3))
    path = tmp_path / "matrix.csv"
    T.to_csv(path)
    frame = pd.read_csv(path, header=None)
    assert frame.shape == (3, 6)
    assert frame.iloc[1, 1] == 1.0 and frame.iloc[0, 3] == -1.0


def test_principal():
    T = truncate(Symbol(A1, {1: 1, -1: 1}), additive_segment(5))
    sub = T.principal(IndexSet(A1, [1, 2]))
    assert np.array_equal(sub.entries, np.array([[0, 1], [1, 0]]))
    with pytest.raises(DomainError):
        T.principal(IndexSet(A1, [9]))


coefficients = st.lists(st.tuples(st.integers(1, 3), st.floats(-1, 1, allow_nan=False)), min_size=1, max_size=3)


@seed(31415)
@settings(max_examples=50, deadline=None)
@given(coefficients, st.sets(st.integers(0, 40), min_size=1, max_size=25), st.integers(1, 4))
def test_enlarged_set_oracle_additive(terms, elements, n):
    coeffs = {0: 0.3}
    for k, c in terms:
        coeffs[k] = coeffs.get(k, 0) + c
        coeffs[-k] = coeffs.get(-k, 0) + c
    s = Symbol(A1, coeffs)
    sigma = IndexSet(A1, elements)
    direct = compressed_power(s, sigma, n).entries
    oracle = enlarged_set_power(s, sigma, n).entries
    assert np.abs(direct - oracle).max() <= 1e-9


@seed(161803)
@settings(max_examples=50, deadline=None)
@given(coefficients, st.sets(st.integers(1, 60), min_size=1, max_size=25), st.integers(1, 4))
def test_enlarged_set_oracle_multiplicative(terms, elements, n):
    coeffs = {1: 0.3}
    for k, c in terms:
        q = Fraction(2 ** k, 3) if k == 3 else Fraction(k + 1)
        coeffs[q] = coeffs.get(q, 0) + c
        coeffs[1 / q] = coeffs.get(1 / q, 0) + c
    s = Symbol(MULTIPLICATIVE, coeffs)
    sigma = IndexSet(MULTIPLICATIVE, elements)
    direct = compressed_power(s, sigma, n).entries
    oracle = enlarged_set_power(s, sigma, n).entries
    assert np.abs(direct - oracle).max() <= 1e-9
