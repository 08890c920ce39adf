import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from multoeplitz.errors import DomainError
from multoeplitz.symbol import (MULTIPLICATIVE, Symbol, additive, adjoint, bohr_eval, constant_symbol, convolve,
                                cosine_symbol, dilation_symbol, ell_average, evaluate, format_symbol, grid_sup,
                                grid_values, parse_symbol, power, sublattice_project, tail_project, unit_symbol,
                                zeta_symbol)

A1 = additive(1)


def z_plus_zbar():
    return Symbol(MULTIPLICATIVE, {2: 1, Fraction(1, 2): 1})


def test_evaluate_multiplicative():
    s = z_plus_zbar()
    assert evaluate(s, [1]) == pytest.approx(2)
    assert abs(evaluate(s, [1j])) < 1e-15
    assert evaluate(zeta_symbol(2, 3), [1, 1]) == pytest.approx(49 / 36)
    with pytest.raises(DomainError):
        evaluate(s, [0.5])


def test_products():
    square = power(z_plus_zbar(), 2)
    assert square.allclose(Symbol(MULTIPLICATIVE, {4: 1, 1: 2, Fraction(1, 4): 1}))
    one_plus = Symbol(MULTIPLICATIVE, {1: 1, 2: 0.5})
    modulus = one_plus * adjoint(one_plus)
    assert modulus.allclose(Symbol(MULTIPLICATIVE, {1: 1.25, 2: 0.5, Fraction(1, 2): 0.5}))
    assert power(one_plus, 0) == unit_symbol(MULTIPLICATIVE)


def test_mixed_kinds_rejected():
    with pytest.raises(DomainError):
        convolve(z_plus_zbar(), Symbol(A1, {1: 1}))


def test_adjoint():
    s = z_plus_zbar()
    assert adjoint(s) == s
    assert adjoint(Symbol(MULTIPLICATIVE, {2: 1})) == Symbol(MULTIPLICATIVE, {Fraction(1, 2): 1})


def test_projections():
    phi = Symbol(A1, {1: 1, -1: 1, 2: 1, -2: 1})
    assert ell_average(phi, 2) == Symbol(A1, {2: 1, -2: 1})
    assert ell_average(phi, 1) == phi
    assert len(ell_average(Symbol(A1, {1: 1, -1: 1}), 2)) == 0

    psi = Symbol(additive(2), {(1, 0): 1, (0, 2): 1, (2, 2): 0.5})
    assert sublattice_project(psi, (1, 1)) == psi
    assert sublattice_project(psi, (2, 2)) == Symbol(additive(2), {(0, 2): 1, (2, 2): 0.5})

    s = Symbol(MULTIPLICATIVE, {2: 1, Fraction(3, 2): 1, 1: 3})
    assert tail_project(s, 2) == s
    assert len(tail_project(Symbol(MULTIPLICATIVE, {5: 1}), 2)) == 0
    assert tail_project(s, 0) == constant_symbol(MULTIPLICATIVE, 3)


def test_zeta_symbol():
    assert zeta_symbol(2, 1) == constant_symbol(MULTIPLICATIVE, 1)
    partial = sum(zeta_symbol(2, 1000).coeffs.values()).real
    assert 0 < math.pi ** 2 / 6 - partial <= 1 / 1000
    with pytest.raises(DomainError):
        zeta_symbol(1.0, 10)


def test_bohr_eval():
    s = zeta_symbol(2, 50)
    assert bohr_eval(s, 0.0) == pytest.approx(sum(s.coeffs.values()))
    t = 1.7
    expected = sum(n ** (-2 + 1j * t) for n in range(1, 51))
    assert bohr_eval(s, t) == pytest.approx(expected, abs=1e-12)
    values = bohr_eval(s, np.array([0.0, t]))
    assert values.shape == (2,)


def test_dilation_symbol():
    assert dilation_symbol([1.0]) == constant_symbol(MULTIPLICATIVE, 1)
    s = dilation_symbol([1.0, 0.5])
    assert s.allclose(Symbol(MULTIPLICATIVE, {1: 1.25, 2: 0.5, Fraction(1, 2): 0.5}))
    assert s.is_hermitian()


def test_cosine_symbol():
    assert cosine_symbol(A1, 3) == Symbol(A1, {3: 1, -3: 1})
    assert cosine_symbol(MULTIPLICATIVE, "3/2") == Symbol(MULTIPLICATIVE, {Fraction(3, 2): 1, Fraction(2, 3): 1})
    assert cosine_symbol(A1, 0) == constant_symbol(A1, 2)


def test_parse_and_format():
    s = parse_symbol("q=2 1; q=1/2 1\nq=3 0.5 -0.25  # comment")
    assert s.coeff(3) == complex(0.5, -0.25)
    assert parse_symbol(format_symbol(s)) == s
    t = parse_symbol("alpha=(1,0) 1; alpha=(-1,0) 1")
    assert t.kind == additive(2)
    for bad in ("q=0 1", "alpha=(1) 1; q=2 1", "", "beta 1"):
        with pytest.raises(DomainError):
            parse_symbol(bad)


def test_grid_sup():
    s = Symbol(A1, {1: 1, -1: 1, 0: 1})
    assert grid_sup(s, oversample=4) == pytest.approx(3)
    assert grid_values(s).shape == (3,)


coefficient_pairs = st.lists(
    st.tuples(st.integers(-4, 4), st.floats(-1, 1, allow_nan=False), st.floats(-1, 1, allow_nan=False)),
    min_size=1, max_size=6)


def _random_symbol(pairs, dim=1):
    coeffs = {}
    for k, re_part, im_part in pairs:
        coeffs[(k,) * dim] = coeffs.get((k,) * dim, 0) + complex(re_part, im_part)
    return Symbol(additive(dim), coeffs)


def _random_multiplicative(pairs):
    coeffs = {}
    for k, re_part, im_part in pairs:
        # k walks the lattice 2^a 3^b with a = k, b = -k // 2
        q = Fraction(2) ** k * Fraction(3) ** (-k // 2)
        coeffs[q] = coeffs.get(q, 0) + complex(re_part, im_part)
    return Symbol(MULTIPLICATIVE, coeffs)


@seed(1234)
@settings(max_examples=1000, deadline=None)
@given(coefficient_pairs, coefficient_pairs, st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
def test_algebra_properties(first, second, a, b):
    s1, s2 = _random_multiplicative(first), _random_multiplicative(second)
    z = [cmath.exp(1j * a), cmath.exp(1j * b)]
    scale = max(s1.l1_norm() * s2.l1_norm(), 1.0)
    # evaluation is a ring homomorphism
    assert abs(evaluate(s1 * s2, z) - evaluate(s1, z) * evaluate(s2, z)) <= 1e-12 * scale
    assert abs(evaluate(s1 + s2, z) - evaluate(s1, z) - evaluate(s2, z)) <= 1e-12 * scale
    assert abs(evaluate(adjoint(s1), z) - evaluate(s1, z).conjugate()) <= 1e-12 * max(s1.l1_norm(), 1.0)
    # Parseval: the mean of |s|^2 is the constant term of s * conj(s)
    assert abs((s1 * adjoint(s1)).constant_term() - s1.l2_norm_sq()) <= 1e-12 * max(s1.l2_norm_sq(), 1.0)
    assert adjoint(adjoint(s1)).allclose(s1)
    assert (s1 * s2).allclose(s2 * s1, atol=1e-12 * scale)


@seed(99)
@settings(max_examples=200, deadline=None)
@given(coefficient_pairs)
def test_grid_mean_is_parseval(pairs):
    s = _random_symbol(pairs)
    values = grid_values(s * adjoint(s))
    assert abs(values.mean() - s.l2_norm_sq()) <= 1e-12 * max(s.l2_norm_sq(), 1.0)
    assert s.hermitized().is_hermitian(1e-15)


def test_hermitized_fills_missing_partner():
    one_sided = Symbol(A1, {-1: 1j})
    assert one_sided.hermitized() == Symbol(A1, {-1: 1j, 1: -1j})
    both = Symbol(MULTIPLICATIVE, {2: 1.0, Fraction(1, 2): 3.0, 1: 1 + 1j})
    assert both.hermitized().allclose(Symbol(MULTIPLICATIVE, {2: 2.0, Fraction(1, 2): 2.0, 1: 1.0}))
    assert z_plus_zbar().hermitized() == z_plus_zbar()
