from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from multoeplitz.errors import DomainError
from multoeplitz.index_sets import (IndexSet, SetFamily, additive_box, additive_segment, alternating, as_shift,
                                    embedded_lattice, embedded_lattice_box, even_segment, exponent_box,
                                    folner_defect, folner_ratio, format_set, is_empirically_folner, natural_segment,
                                    read_set_file, shift_count, sparse_powers, sublattice_box, union_with)
from multoeplitz.symbol import MULTIPLICATIVE, additive

FIXTURES = Path(__file__).parent.parent / "fixtures"


def test_generators():
    assert exponent_box(1, 1).labels() == [1, 2, 3, 6]
    assert exponent_box(0, 0).labels() == [1]
    assert even_segment(3, 2).labels() == [(0,), (2,), (4,), (6,)]
    assert sparse_powers(3).labels() == [(1,), (3,), (9,)]
    assert additive_box((1, 2)).labels() == [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)]
    assert sublattice_box((2, 3), (1, 1)).labels() == [(0, 0), (0, 3), (2, 0), (2, 3)]
    assert embedded_lattice_box(2, (1, 1)).labels() == exponent_box(1, 1).labels()
    assert embedded_lattice(IndexSet(additive(3), [(0, 0, 1), (2, 1, 0)])).labels() == [5, 12]
    assert union_with(even_segment(2), range(3)).labels() == [(0,), (1,), (2,), (4,)]


def test_invalid_sets():
    with pytest.raises(DomainError):
        IndexSet(MULTIPLICATIVE, [])
    with pytest.raises(DomainError):
        IndexSet(MULTIPLICATIVE, [0, 1])
    with pytest.raises(DomainError):
        IndexSet(additive(1), [-1])
    with pytest.raises(DomainError):
        natural_segment(0)


def test_natural_segment_ratio():
    assert folner_ratio(natural_segment(100), 3) == pytest.approx(0.33)
    sigma = natural_segment(10 ** 5)
    for n in range(1, 21):
        ratio = shift_count(sigma, n)
        assert ratio == 10 ** 5 // n
        assert abs(ratio / len(sigma) - 1 / n) <= 1 / len(sigma)


def test_box_ratios():
    for a in (1, 4, 9):
        box = exponent_box(a, a)
        assert folner_ratio(box, 2) == pytest.approx(a / (a + 1))
        assert shift_count(box, Fraction(3, 2)) == a * a
        assert shift_count(box, Fraction(1, 2)) == shift_count(box, 2)
    assert folner_ratio(additive_segment(50), 7) == pytest.approx(43 / 50)


def test_folner_defect_table():
    sets = [exponent_box(k, k) for k in (2, 4, 8, 16)]
    table = folner_defect(sets, [as_shift(MULTIPLICATIVE, 2), as_shift(MULTIPLICATIVE, 3)], [2, 4, 8, 16])
    assert list(table.columns) == ["n", "size", "shift", "count", "defect"]
    two = table[table["shift"] == "2"]["defect"].tolist()
    assert two == pytest.approx([1 / 3, 1 / 5, 1 / 9, 1 / 17])
    assert is_empirically_folner(table, eps=0.1)
    assert not is_empirically_folner(table, eps=0.05)

    naturals = [natural_segment(n) for n in (10, 100, 1000)]
    table = folner_defect(naturals, [as_shift(MULTIPLICATIVE, n) for n in (2, 3, 5)])
    last = table.groupby("shift").last()["defect"]
    assert last["5"] == pytest.approx(1 - 1 / 5)
    assert not is_empirically_folner(table)


def test_families():
    family = SetFamily("exponent-box", dim=2)
    assert family.build(1).labels() == [1, 2, 3, 6]
    assert family.kind == MULTIPLICATIVE and family.axes == 2
    weighted = SetFamily("exponent-box", weights=(1.0, 0.5))
    assert weighted.build(2).labels() == [1, 2, 3, 4, 6, 12]
    assert SetFamily("additive-box", dim=2).build(2).labels() == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert SetFamily("sparse-powers", base=2).build(3).labels() == [(1,), (2,), (4,)]
    mixed = SetFamily("alternating", members=(SetFamily("natural-segment"), SetFamily("exponent-box", dim=2)))
    assert [len(s) for s in mixed.sequence([4, 1, 6])] == [4, 4, 6]
    with_extra = SetFamily("even-segment", extra=(1,))
    assert (1,) in with_extra.build(3)


def test_alternating_helper():
    sets = alternating(natural_segment, lambda n: exponent_box(n, n), count=3, start=4)
    assert all(len(b) >= 2 * len(a) for a, b in zip(sets, sets[1:]))
    assert sets[0].labels() == [1, 2, 3, 4]


def test_set_file_round_trip(tmp_path):
    sets = read_set_file(FIXTURES / "sets.txt")
    assert [s.labels() for s in sets][0] == [1, 2, 3, 6]
    assert len(sets[1]) == 12
    path = tmp_path / "sets.txt"
    path.write_text("\n".join(format_set(s) for s in sets))
    assert [s.labels() for s in read_set_file(path)] == [s.labels() for s in sets]
    bad = tmp_path / "bad.txt"
    bad.write_text("1 2 x\n")
    with pytest.raises(DomainError):
        read_set_file(bad)


def test_huge_labels():
    sigma = sparse_powers(80)
    assert (3 ** 79,) in sigma
    assert shift_count(sigma, 1) == 0
    assert shift_count(sigma, 2) == 1
    big = IndexSet(MULTIPLICATIVE, [2 ** 70, 2 ** 71, 3 * 2 ** 70])
    assert shift_count(big, 2) == 1
    assert shift_count(big, Fraction(3, 2)) == 1


@seed(2718)
@settings(max_examples=100, deadline=None)
@given(st.sets(st.integers(1, 500), min_size=1, max_size=60), st.integers(1, 10), st.integers(1, 10))
def test_shift_count_brute_force(elements, a, b):
    sigma = IndexSet(MULTIPLICATIVE, elements)
    q = Fraction(a, b)
    expected = sum(1 for k in elements if k * q in elements)
    assert shift_count(sigma, q) == expected


@seed(1618)
@settings(max_examples=200, deadline=None)
@given(st.sets(st.integers(1, 300), min_size=1, max_size=80), st.integers(1, 12), st.integers(1, 12),
       st.sets(st.integers(1, 300), max_size=5))
def test_ratio_inequalities(elements, a, b, extra):
    sigma = IndexSet(MULTIPLICATIVE, elements)
    n = len(sigma)
    assert folner_ratio(sigma, 1) == 1.0
    q = Fraction(a, b)
    a, b = q.numerator, q.denominator
    # sigma a and sigma b each meet sigma in count(a) and count(b) points, so they meet each other in
    # at least count(a) + count(b) - #sigma
    assert shift_count(sigma, q) >= shift_count(sigma, a) + shift_count(sigma, b) - n
    augmented = union_with(sigma, extra)
    added = len(augmented) - n
    for shift in (q, a, b):
        # every new index gains at most two pairs, one as source and one as image
        change = folner_ratio(augmented, shift) - folner_ratio(sigma, shift)
        assert -added / n <= change <= 2 * added / n


def test_union_can_gain_two_pairs_per_index():
    sigma = IndexSet(MULTIPLICATIVE, [1, 4])
    assert folner_ratio(sigma, 2) == 0.0
    assert folner_ratio(union_with(sigma, [2]), 2) == pytest.approx(2 / 3)


def test_identity_ratio_additive():
    assert folner_ratio(additive_box((3, 4)), (0, 0)) == 1.0
    assert folner_ratio(sparse_powers(30), 0) == 1.0
