import random

import pytest
from hypothesis import strategies as st

from morphic_blocks.words import Alphabet, MorphicSpec, Morphism, make_spec, validate_spec

LETTERS = "abcde"


@pytest.fixture
def thue_morse():
    return make_spec({"0": "01", "1": "10"}, "0")


@pytest.fixture
def fibonacci():
    return make_spec({"0": "01", "1": "0"}, "0")


@pytest.fixture
def p2():
    """Ones exactly at the powers of two."""
    return make_spec({"a": "ab", "b": "bc", "c": "cc"}, "a", coding={"a": "0", "b": "1", "c": "0"})


def random_spec(rng: random.Random, max_letters: int = 5, max_rule: int = 4) -> MorphicSpec:
    """A validated spec: nonerasing, prolongable on its first letter."""
    n = rng.randint(2, max_letters)
    alpha = Alphabet(tuple(LETTERS[:n]))
    rules = []
    for c in range(n):
        if c == 0:
            rule = [0] + [rng.randrange(n) for _ in range(rng.randint(1, max_rule - 1))]
        else:
            rule = [rng.randrange(n) for _ in range(rng.randint(1, max_rule))]
        rules.append(tuple(rule))
    return validate_spec(MorphicSpec(Morphism(alpha, tuple(rules)), 0))


@st.composite
def specs(draw, max_letters: int = 5, max_rule: int = 4):
    return random_spec(random.Random(draw(st.integers(0, 2**32))), max_letters, max_rule)


def naive_prefix(spec: MorphicSpec, n: int) -> tuple:
    """Iterate ``h`` on the seed until the word has at least ``n`` letters."""
    word = (spec.seed,)
    h = spec.morphism
    while len(word) < n:
        word = tuple(x for c in word for x in h.rules[c])
    return word[:n]


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
