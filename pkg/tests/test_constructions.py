from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from morphic_blocks.constructions import (
    morphism_from_matrix,
    p_kernel,
    perron_spec,
    power_indices,
    rational_member,
    rational_word,
    remark2_spec,
)
from morphic_blocks.errors import InvalidParams, NotPerron
from morphic_blocks.linalg import incidence_matrix


def ones_in(stream, n):
    return [p for p, c in enumerate(stream.prefix(n)) if c]


def test_perron_two_ones():
    rep = perron_spec(2, count=12)
    assert rep.ones[:6] == [1, 3, 6, 11, 20, 37]
    assert ones_in(rep.stream, rep.ones[-1] + 1) == rep.ones


def test_perron_two_class_c_fails_at_two():
    rep = perron_spec(2, count=25)
    assert rep.class_c.status == "fails"
    assert rep.class_c.first_violation == 2
    assert rep.ratios[2] == Fraction(11, 6)


def test_perron_three_lengths():
    rep = perron_spec(3, count=16)
    assert rep.matrix == ((2, 2), (1, 1))
    assert rep.lengths == [3**j for j in range(16)]
    assert ones_in(rep.stream, rep.ones[8] + 1) == rep.ones[:9]


def test_golden_matrix_ratio():
    rep = perron_spec(((2, 1), (1, 1)), count=13)
    assert rep.eigen.width <= Fraction(1, 10**9)
    assert abs(float(rep.ratios[-1]) - 2.6180339887) < 1e-2


def test_not_perron():
    with pytest.raises(NotPerron):
        perron_spec(((0, 1), (1, 0)))
    with pytest.raises(NotPerron):
        perron_spec(((1, 0), (0, 1)))
    with pytest.raises(InvalidParams):
        perron_spec(1)


@given(st.integers(1, 3).flatmap(lambda n: st.lists(st.lists(st.integers(0, 3), min_size=n, max_size=n),
                                                    min_size=n, max_size=n)))
@settings(max_examples=50, deadline=None)
def test_morphism_realises_matrix(rows):
    a = tuple(map(tuple, rows))
    if any(sum(a[i][j] for i in range(len(a))) == 0 for j in range(len(a))):
        return  # zero column means an erasing rule
    assert incidence_matrix(morphism_from_matrix(a)) == a


def test_remark2_shapes():
    assert remark2_spec(2, 0, 0, 5).ones == [1, 3, 5, 8, 11]
    assert remark2_spec(2, 1, 0, 4).ones == [1, 5, 7, 13]
    assert remark2_spec(2, 0, 1, 4).ones == [1, 3, 7, 10]


def test_rational_membership_brute_force():
    members = set()
    for h in range(10):
        members.update(m * 3**h for m in range(3, 7))
    for n in range(1, 10**4 + 1):
        assert rational_member(n, 3, 2) == (n in members), n


def test_rational_word_ratios():
    rep = rational_word(3, 2, count=40)
    assert rep.ones[:12] == [3, 4, 5, 6, 9, 12, 15, 18, 27, 36, 45, 54]
    assert max(rep.ratios) == Fraction(3, 2)
    assert ones_in(rep.stream, 200) == [n for n in rep.ones if n < 200]


def test_rational_word_params():
    with pytest.raises(InvalidParams):
        rational_word(2, 3)


def test_rational_kernel_is_small():
    rep = rational_word(3, 2)
    kernel = p_kernel(rep.stream, 3, depth=300)
    assert kernel.finite
    assert kernel.size <= 8


def test_power_indices():
    assert power_indices(2, 5) == [1, 2, 4, 8, 16]
