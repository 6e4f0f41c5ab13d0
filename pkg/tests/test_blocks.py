from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import specs
from morphic_blocks.blocks import (
    RatioAccumulator,
    XBlockPattern,
    block_code_transform,
    naive_delta_blocks,
    naive_x_blocks,
    phase_partition,
    ratio_stats,
    scan_delta_blocks,
    scan_x_blocks,
)
from morphic_blocks.errors import InfiniteBlock, PatternDegenerate, SpecError
from morphic_blocks.words import FixedPointStream, RawStream, make_spec, word_stream


def spans(blocks):
    return [(b.i, b.j) for b in blocks]


def raw(text):
    return RawStream.from_symbols(list(text))


def test_worked_x_example():
    s = raw("0100111010101000")
    found = list(scan_x_blocks(s, XBlockPattern(s.alphabet.encode("01"))))
    assert [(b.i, b.j, b.phase) for b in found] == [(0, 2, 0), (3, 4, 1), (6, 13, 1)]


def test_thue_morse_x_blocks(thue_morse):
    s = word_stream(thue_morse)
    found = scan_x_blocks(s, XBlockPattern((1, 0)), until=16)
    assert spans(found) == [(2, 5), (8, 9), (10, 13)]


def test_thue_morse_zero_blocks(thue_morse):
    found = scan_delta_blocks(word_stream(thue_morse), {0}, until=16)
    assert spans(found) == [(0, 0), (3, 3), (5, 6), (9, 10), (12, 12)]


def test_p2_zero_blocks(p2):
    found = list(scan_delta_blocks(word_stream(p2), {0}, count=6))
    assert spans(found) == [(0, 0), (3, 3), (5, 7), (9, 15), (17, 31), (33, 63)]
    assert [b.k for b in found] == list(range(6))


def test_p2_tail_ratio(p2):
    stats = ratio_stats(scan_delta_blocks(word_stream(p2), {0}, until=10**6))
    assert stats.tail_estimate == Fraction(2**19 - 1, 2**18 + 1)
    assert stats.max_ratio == stats.tail_estimate


def test_fibonacci_blocks_short(fibonacci):
    found = list(scan_delta_blocks(word_stream(fibonacci), {0}, until=10**5))
    assert max(b.length for b in found) == 2


def test_delta_must_be_proper(thue_morse):
    s = word_stream(thue_morse)
    with pytest.raises(SpecError):
        list(scan_delta_blocks(s, {0, 1}, count=1))
    with pytest.raises(SpecError):
        list(scan_delta_blocks(s, set(), count=1))


def test_infinite_block():
    s = word_stream(make_spec({"0": "00", "1": "1"}, "0"))
    with pytest.raises(InfiniteBlock):
        list(scan_delta_blocks(s, {0}, horizon=1000))


def test_block_touching_end_not_emitted():
    assert spans(scan_delta_blocks(raw("00100"), {0})) == [(0, 1)]
    assert spans(naive_delta_blocks(raw("00100").prefix(5), {0})) == [(0, 1)]


def test_empty_pattern():
    with pytest.raises(PatternDegenerate):
        XBlockPattern(())


@given(specs(), st.data())
@settings(max_examples=60, deadline=None)
def test_delta_scan_matches_naive(spec, data):
    n = spec.alphabet.size
    delta = data.draw(st.sets(st.integers(0, n - 1), min_size=1, max_size=n - 1))
    s = FixedPointStream(spec)
    letters = s.prefix(3000)
    assert list(scan_delta_blocks(s, delta, until=3000)) == naive_delta_blocks(letters, delta)


@given(specs(max_letters=3), st.data())
@settings(max_examples=40, deadline=None)
def test_x_scan_matches_naive(spec, data):
    x = tuple(data.draw(st.lists(st.integers(0, spec.alphabet.size - 1), min_size=1, max_size=3)))
    s = FixedPointStream(spec)
    letters = s.prefix(150)
    pattern = XBlockPattern(x)
    assert list(scan_x_blocks(s, pattern, until=150)) == naive_x_blocks(letters, pattern)


@given(st.text("01", min_size=2, max_size=60), st.text("01", min_size=1, max_size=3))
@settings(max_examples=200, deadline=None)
def test_x_scan_matches_naive_on_raw(text, x):
    s = RawStream.from_symbols(list(text), alphabet=None) if set(x) <= set(text) else None
    if s is None:
        return
    pattern = XBlockPattern(s.alphabet.encode(x))
    assert list(scan_x_blocks(s, pattern)) == naive_x_blocks(s.prefix(len(text)), pattern)


def test_phase_partition():
    s = raw("0100111010101000")
    pattern = XBlockPattern(s.alphabet.encode("01"))
    parts = phase_partition(scan_x_blocks(s, pattern), pattern)
    assert [spans(p) for p in parts] == [[(0, 2)], [(3, 4), (6, 13)]]


def test_block_code_transform():
    s = raw("0100111010")
    v = block_code_transform(s, XBlockPattern(s.alphabet.encode("01")), 0)
    assert "".join(v.alphabet.decode(v.chunk(0, 10))) == "αα00111010"
    assert "".join(v.alphabet.decode(v[t] for t in range(10))) == "αα00111010"


def test_ratio_accumulator_running_max():
    acc = RatioAccumulator(window=2, keep_history=True)
    blocks = list(scan_delta_blocks(raw("0100111010101000"), {0}))
    for b in blocks:
        acc.add(b)
    stats = acc.stats()
    assert stats.running_max == tuple(sorted(stats.running_max))
    assert stats.max_ratio == max(b.ratio for b in blocks if b.i)
