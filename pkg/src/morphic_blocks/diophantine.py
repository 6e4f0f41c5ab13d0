"""Numbers ξ = Σ b^(-n_j) read off a 0/1 word, and their approximation exponents.

Digit ``d_n`` carries weight ``b^-n``, so word positions and digit positions
coincide.  Long runs of 0 (or of ``b-1``) starting at digit ``i`` and ending at
``j`` mean truncating after digit ``i-1`` is unusually good; the exponent
witnessed is ``(j-i+1)/(i-1)``.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import islice
from typing import Iterable, Iterator, Sequence

from .blocks import BlockOccurrence, scan_delta_blocks
from .errors import InfiniteBlock, InvalidParams
from .linalg import decimal_str, fraction_str
from .words import Alphabet, WordStream

DEFAULT_DIGITS = 1000
DEFAULT_WINDOW = 8


class IndexStream(WordStream):
    """0/1 word with ones exactly at a strictly increasing index sequence,
    pulled lazily from an iterator."""

    origin = "indices"

    def __init__(self, indices: Iterable[int], base: int = 2):
        super().__init__(Alphabet(tuple(str(d) for d in range(base))) if base <= 10 else
                         Alphabet(tuple(f"d{d}" for d in range(base))))
        self._source = iter(indices)
        self._known: list = []
        self.exhausted = False

    def _pull(self) -> bool:
        if self.exhausted:
            return False
        try:
            n = int(next(self._source))
        except StopIteration:
            self.exhausted = True
            return False
        if n < 0 or (self._known and n <= self._known[-1]):
            raise InvalidParams(f"indices must be nonnegative and strictly increasing, got {n} after "
                                f"{self._known[-1] if self._known else None}")
        self._known.append(n)
        return True

    def _cover(self, p: int) -> None:
        while (not self._known or self._known[-1] < p) and self._pull():
            pass

    def index(self, j: int) -> int:
        while len(self._known) <= j:
            if not self._pull():
                raise IndexError(f"only {len(self._known)} indices available")
        return self._known[j]

    def indices(self, count: int) -> list:
        self.index(count - 1)
        return self._known[:count]

    def _letter(self, p: int) -> int:
        self._cover(p)
        k = bisect_left(self._known, p)
        return int(k < len(self._known) and self._known[k] == p)

    def chunk(self, start: int, stop: int):
        self._cover(stop)
        out = bytearray(stop - start)
        k = bisect_left(self._known, start)
        while k < len(self._known) and self._known[k] < stop:
            out[self._known[k] - start] = 1
            k += 1
        return bytes(out)


@dataclass
class DigitExpansion:
    """Base-``b`` digits of ξ as a word stream (letter index = digit value)."""

    base: int
    stream: WordStream

    def __post_init__(self):
        if self.base < 2:
            raise InvalidParams("base must be >= 2")
        if self.stream.alphabet.size > self.base:
            raise InvalidParams(f"{self.stream.alphabet.size} digit symbols do not fit base {self.base}")

    @property
    def finite(self) -> bool:
        """True when the digits are known to end in 0^ω."""
        s = self.stream
        return isinstance(s, IndexStream) and s.exhausted

    def digits(self, n: int) -> list:
        return list(self.stream.chunk(0, n))


def xi_from_indices(b: int, indices: Iterable[int]) -> DigitExpansion:
    return DigitExpansion(b, IndexStream(indices, b))


def powers_of(base: int, start: int = 0) -> Iterator[int]:
    """``base^start, base^(start+1), ...``"""
    n = base**start
    while True:
        yield n
        n *= base


def truncate_value(exp: DigitExpansion, J: int) -> Fraction:
    """Sum of the contributions of the first ``J`` nonzero digits."""
    if J < 1:
        raise InvalidParams("J must be >= 1")
    b = exp.base
    s = exp.stream
    if isinstance(s, IndexStream):
        return sum((Fraction(1, b**n) for n in s.indices(J)), Fraction(0))
    total, found, pos = Fraction(0), 0, 0
    step = 4096
    while found < J:
        chunk = s.chunk(pos, pos + step)
        if not len(chunk):
            break
        for off, d in enumerate(chunk):
            if d:
                total += Fraction(d, b ** (pos + off))
                found += 1
                if found == J:
                    break
        pos += len(chunk)
    return total


@dataclass(frozen=True)
class Witness:
    i: int
    j: int
    digit: int
    exponent: Fraction

    def to_dict(self) -> dict:
        return {"i": self.i, "j": self.j, "digit": self.digit, "v": fraction_str(self.exponent)}


@dataclass
class VbEstimate:
    best: Fraction | None
    tail: Fraction | None
    witnesses: list = field(default_factory=list)
    digits: int = 0

    @property
    def value(self) -> Fraction | None:
        """The estimate proper: max over the last few witnesses."""
        return self.tail

    def to_dict(self) -> dict:
        return {"best": None if self.best is None else fraction_str(self.best),
                "tail": None if self.tail is None else decimal_str(self.tail),
                "tail_exact": None if self.tail is None else fraction_str(self.tail),
                "digits": self.digits}


def v_b_estimate(exp: DigitExpansion, N: int = DEFAULT_DIGITS, window: int = DEFAULT_WINDOW,
                 horizon: int | None = None) -> VbEstimate:
    """Witness exponents from maximal 0-blocks and (b-1)-blocks in ``d_1..d_N``."""
    if exp.finite:
        raise InfiniteBlock("digits end in 0^ω: ξ is rational")
    b = exp.base
    kw = {} if horizon is None else {"horizon": horizon}
    targets = [0] if b - 1 >= exp.stream.alphabet.size else [0, b - 1]
    blocks = []
    for digit in targets:
        for blk in scan_delta_blocks(exp.stream, {digit}, until=N + 1, **kw):
            if blk.i >= 2:
                blocks.append((blk.i, blk.j, digit))
    blocks.sort()
    witnesses = [Witness(i, j, d, Fraction(j - i + 1, i - 1)) for i, j, d in blocks]
    best = max((w.exponent for w in witnesses), default=None)
    tail = max((w.exponent for w in witnesses[-window:]), default=None)
    return VbEstimate(best, tail, witnesses, N)


@dataclass(frozen=True)
class ClassC:
    status: str  # holds | eventual | fails
    first_violation: int | None = None
    from_index: int | None = None

    def __str__(self):
        if self.status == "eventual":
            return f"eventual({self.from_index})"
        return self.status


def class_c_check(indices: Sequence[int], J: int | None = None, min_tail: int = 3) -> ClassC:
    """Check ``n_(j+1)/n_j >= 2`` for ``j = 0 .. J-1`` (0-based).

    ``eventual(J0)`` means every ratio from ``j = J0`` on holds and at least
    ``min_tail`` ratios were observed there; otherwise a violation is ``fails``.
    """
    n = list(indices if J is None else indices[: J + 1])
    if len(n) < 2:
        raise InvalidParams("need at least two indices")
    bad = [j for j in range(len(n) - 1) if n[j + 1] < 2 * n[j]]
    if not bad:
        return ClassC("holds")
    tail = len(n) - 1 - (bad[-1] + 1)
    if tail >= min_tail:
        return ClassC("eventual", bad[0], bad[-1] + 1)
    return ClassC("fails", bad[0])


@dataclass
class MuEstimate:
    best: Fraction
    tail: Fraction
    ratios: list
    diverging: bool
    applicable: bool

    @property
    def value(self) -> Fraction | None:
        return None if self.diverging else self.tail

    def to_dict(self) -> dict:
        return {"best": fraction_str(self.best), "tail": decimal_str(self.tail), "tail_exact": fraction_str(self.tail),
                "diverging": self.diverging, "applicable": self.applicable}


def mu_estimate(indices: Sequence[int], J: int | None = None, window: int = DEFAULT_WINDOW) -> MuEstimate:
    """Running and tail max of ``n_(j+1)/n_j``.

    ``diverging`` is set when the last ``window`` ratios increase strictly with
    non-shrinking increments (factorial-like growth); ``applicable`` is false
    when the class-C condition fails.
    """
    n = list(indices if J is None else indices[: J + 1])
    if len(n) < 2:
        raise InvalidParams("need at least two indices")
    if n[0] <= 0:
        n = n[1:]  # n_0 = 0 has no ratio; drop it
        if len(n) < 2:
            raise InvalidParams("need at least two positive indices")
    ratios = [Fraction(n[j + 1], n[j]) for j in range(len(n) - 1)]
    tail = ratios[-window:]
    diffs = [b - a for a, b in zip(tail, tail[1:])]
    diverging = len(tail) >= 3 and all(d > 0 for d in diffs) and all(b >= a for a, b in zip(diffs, diffs[1:]))
    applicable = class_c_check(n).status != "fails"
    return MuEstimate(max(ratios), max(tail), ratios, diverging, applicable)


@dataclass(frozen=True)
class ContinuedFraction:
    quotients: tuple
    p: tuple
    q: tuple

    def __str__(self):
        a = self.quotients
        return f"[{a[0]}; {', '.join(map(str, a[1:]))}]" if len(a) > 1 else f"[{a[0]}]"

    def convergent(self, k: int) -> Fraction:
        return Fraction(self.p[k], self.q[k])


def continued_fraction(x) -> ContinuedFraction:
    x = Fraction(x)
    if x < 0:
        raise InvalidParams("continued_fraction expects x >= 0")
    num, den = x.numerator, x.denominator
    quotients = []
    while den:
        a, r = divmod(num, den)
        quotients.append(a)
        num, den = den, r
    p, q = [], []
    pm2, pm1, qm2, qm1 = 0, 1, 1, 0
    for a in quotients:
        pm2, pm1 = pm1, a * pm1 + pm2
        qm2, qm1 = qm1, a * qm1 + qm2
        p.append(pm1)
        q.append(qm1)
    return ContinuedFraction(tuple(quotients), tuple(p), tuple(q))


@dataclass(frozen=True)
class CfMuEstimate:
    value: float | None
    shared_terms: int  # partial quotients common to the two deepest truncations
    convergent_hits: int
    rational: bool
    method: str = "truncation-approximants"

    def to_dict(self) -> dict:
        return {"value": None if self.value is None else decimal_str(Fraction(self.value)),
                "shared_terms": self.shared_terms,
                "convergent_hits": self.convergent_hits, "rational": self.rational, "method": self.method}


def _common_prefix(a: Sequence[int], b: Sequence[int]) -> int:
    k = 0
    for x, y in zip(a, b):
        if x != y:
            break
        k += 1
    return k


def _log(x: Fraction) -> float:
    x = Fraction(x)
    return math.log(x.numerator) - math.log(x.denominator)


def mu_from_cf(truncations: Sequence[Fraction], min_q: int = 4, window: int = 3) -> CfMuEstimate:
    """Irrationality-exponent signal from a list of truncations of one expansion.

    Each shallower truncation ``t = p/q`` is an approximation to ξ whose
    exponent ``-log|x - t| / log q`` is measured exactly against the deepest
    truncation ``x``; the max over the last ``window`` of them is returned.
    The continued fractions serve two purposes: when the partial quotients
    shared by consecutive truncations stop growing with depth, the input looks
    rational and no estimate is given; and ``convergent_hits`` counts the
    truncations that are convergents of ``x``.

    The textbook ``1 + log q_(k+1) / log q_k`` over all convergents is not
    used as the value: with bounded partial quotients it approaches 2 only
    like ``1/log q_k`` (2.62 at six terms of Σ 2^(-2^j)).
    """
    if len(truncations) < 2:
        raise InvalidParams("need at least two truncations")
    cfs = [continued_fraction(t) for t in truncations]
    shared = _common_prefix(cfs[-1].quotients, cfs[-2].quotients)
    if len(truncations) >= 3 and len(set(map(Fraction, truncations[-3:]))) == 1:
        return CfMuEstimate(None, shared, 0, True)  # expansion has stopped
    if len(cfs) >= 3:
        earlier = _common_prefix(cfs[-2].quotients, cfs[-3].quotients)
        if shared <= earlier and shared < len(cfs[-1].quotients):
            return CfMuEstimate(None, shared, 0, True)
    x = Fraction(truncations[-1])
    deep = cfs[-1]
    convergents = set(zip(deep.p, deep.q))
    hits = 0
    exps = []
    for t in truncations[:-1]:
        t = Fraction(t)
        if t.denominator < min_q or t == x:
            continue
        hits += (t.numerator, t.denominator) in convergents
        exps.append(-_log(abs(x - t)) / math.log(t.denominator))
    if not exps:
        return CfMuEstimate(None, shared, hits, False)
    return CfMuEstimate(max(exps[-window:]), shared, hits, False)


@dataclass
class ExponentReport:
    v_b: VbEstimate | None
    mu: MuEstimate | None
    class_c: ClassC | None
    base: int
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"base": self.base,
                "v_b": None if self.v_b is None else self.v_b.to_dict(),
                "mu": None if self.mu is None else self.mu.to_dict(),
                "class_C": None if self.class_c is None else str(self.class_c),
                "witness_blocks": [] if self.v_b is None else [w.to_dict() for w in self.v_b.witnesses[-DEFAULT_WINDOW:]],
                "notes": self.notes}


def ones_of(stream: WordStream, N: int) -> list:
    """Positions ``< N`` carrying a nonzero letter."""
    return [p for p, c in enumerate(stream.chunk(0, N)) if c]


def exponent_report(exp: DigitExpansion, N: int = DEFAULT_DIGITS, J: int | None = None,
                    window: int = DEFAULT_WINDOW) -> ExponentReport:
    """v_b from the digit runs, plus μ and class C from the one-positions."""
    notes = []
    vb = v_b_estimate(exp, N, window)
    idx = [n for n in ones_of(exp.stream, N + 1) if n >= 1]
    if J is not None:
        idx = idx[: J + 1]
    mu = cc = None
    if len(idx) >= 3:
        cc = class_c_check(idx)
        mu = mu_estimate(idx, window=window)
        if not mu.applicable:
            notes.append("class C fails: μ is not given by the ratio limsup")
        elif vb.value is not None:
            notes.append(f"|1 + v_b - mu| = {decimal_str(abs(1 + vb.value - mu.tail))}")
    else:
        notes.append("fewer than three nonzero digits in range; μ not estimated")
    return ExponentReport(vb, mu, cc, exp.base, notes)


def take(iterable: Iterable[int], n: int) -> list:
    return list(islice(iterable, n))
