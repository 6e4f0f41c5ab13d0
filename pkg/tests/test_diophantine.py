import math
from fractions import Fraction
from itertools import count

import pytest
from hypothesis import given
from hypothesis import strategies as st

from morphic_blocks.constructions import rational_word
from morphic_blocks.diophantine import (
    DigitExpansion,
    class_c_check,
    continued_fraction,
    exponent_report,
    mu_estimate,
    mu_from_cf,
    powers_of,
    take,
    truncate_value,
    v_b_estimate,
    xi_from_indices,
)
from morphic_blocks.errors import InfiniteBlock, InvalidParams
from morphic_blocks.words import make_spec, word_stream


def two_powers():
    return xi_from_indices(2, powers_of(2))


def test_truncation():
    assert truncate_value(two_powers(), 4) == Fraction(209, 256)


def test_continued_fraction_by_hand():
    cf = continued_fraction(Fraction(209, 256))
    assert list(cf.quotients) == [0, 1, 4, 2, 4, 5]
    assert Fraction(cf.p[-1], cf.q[-1]) == Fraction(209, 256)


@given(st.fractions(min_value=0, max_value=50))
def test_continued_fraction_reconstructs(x):
    cf = continued_fraction(x)
    assert Fraction(cf.p[-1], cf.q[-1]) == x
    for k in range(1, len(cf.p)):
        assert cf.p[k] * cf.q[k - 1] - cf.p[k - 1] * cf.q[k] == (-1) ** (k - 1)


def test_v_b_two_powers():
    est = v_b_estimate(two_powers(), 10**5)
    assert abs(est.value - 1) < Fraction(5, 100)


def test_v_b_rational_word():
    rep = rational_word(3, 2)
    est = v_b_estimate(DigitExpansion(2, rep.stream), 10**5)
    assert abs(est.value - Fraction(1, 2)) < Fraction(5, 100)


def test_v_b_thue_morse_small():
    tm = word_stream(make_spec({"0": "01", "1": "10"}, "0"))
    est = v_b_estimate(DigitExpansion(2, tm), 10**4)
    assert est.value < Fraction(1, 100)


def test_finite_expansion_is_rational():
    exp = xi_from_indices(2, [1, 3, 5])
    exp.stream.indices(3)
    exp.stream.chunk(0, 10)
    with pytest.raises(InfiniteBlock):
        v_b_estimate(exp, 100)


def test_mu_powers_of_two():
    est = mu_estimate(take(powers_of(2), 30))
    assert est.ratios == [2] * 29
    assert est.value == 2
    assert est.applicable


def test_mu_factorial_diverges():
    facts = [math.factorial(k) for k in range(2, 14)]
    assert mu_estimate(facts).diverging


def test_class_c():
    assert class_c_check([1, 2, 4, 8]).status == "holds"
    cc = class_c_check([1, 3, 6, 11, 20, 37])
    assert (cc.status, cc.first_violation) == ("fails", 2)
    cc = class_c_check([1, 3, 5, 10, 20, 40, 80])
    assert str(cc) == "eventual(2)"


def test_indices_must_increase():
    exp = xi_from_indices(2, [3, 2])
    with pytest.raises(InvalidParams):
        exp.stream.chunk(0, 10)


def test_mu_from_cf_two_powers():
    exp = two_powers()
    truncs = [truncate_value(exp, J) for J in range(2, 9)]
    est = mu_from_cf(truncs)
    assert not est.rational
    assert abs(est.value - 2) < 0.05


def test_mu_from_cf_rational():
    assert mu_from_cf([Fraction(1, 9)] * 5).rational
    # 1/9 = 0.000111 000111 ... in base 2
    ninth = xi_from_indices(2, (6 * k + r for k in count() for r in (4, 5, 6)))
    truncs = [truncate_value(ninth, J) for J in range(3, 40, 3)]
    assert abs(truncs[-1] - Fraction(1, 9)) < Fraction(1, 10**20)
    assert mu_from_cf(truncs).rational


def test_continued_fraction_negative():
    with pytest.raises(InvalidParams):
        continued_fraction(Fraction(-1, 2))


def test_exponent_report_consistency():
    rep = exponent_report(two_powers(), 10**4)
    assert str(rep.class_c) == "holds"
    assert abs(1 + rep.v_b.value - rep.mu.value) <= Fraction(5, 100)
    doc = rep.to_dict()
    assert set(doc) == {"base", "v_b", "mu", "class_C", "witness_blocks", "notes"}


def test_indices_stream_is_lazy():
    exp = xi_from_indices(2, count(5, 5))
    assert exp.stream.chunk(0, 12) == bytes([0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0])
