"""Alphabets, morphisms, codings and lazily generated infinite words.

Letters are dense integer indices into an :class:`Alphabet`; display symbols
only appear at the I/O boundary (:func:`load_spec`, :func:`spec_to_document`).

A :class:`FixedPointStream` serves two access patterns.  Sequential scans read
from a growing byte buffer built by appending ``h(w_q)`` for ``q = 1, 2, ...``
(valid because ``w = h(w)``).  Positions beyond the buffer cap are answered by
descending the derivation tree of ``h^K(a)``, which is what lets the block
chain analysis follow blocks at positions far too large to materialise.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass
from itertools import accumulate, chain
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import (
    HorizonExceeded,
    InvalidMorphism,
    InvalidSpecDocument,
    NotProlongable,
    SpecNotFound,
)

Word = tuple  # tuple of letter indices

DEFAULT_BUFFER_CAP = 1 << 25


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple

    def __post_init__(self):
        symbols = tuple(self.symbols)
        object.__setattr__(self, "symbols", symbols)
        if not symbols:
            raise InvalidMorphism("alphabet must be nonempty")
        if len(set(symbols)) != len(symbols):
            raise InvalidMorphism(f"duplicate symbols in alphabet {symbols!r}")
        for s in symbols:
            if not isinstance(s, str) or not s:
                raise InvalidMorphism(f"symbols must be nonempty strings, got {s!r}")
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(symbols)})

    @classmethod
    def of(cls, symbols: Iterable[str]) -> "Alphabet":
        return cls(tuple(symbols))

    @property
    def size(self) -> int:
        return len(self.symbols)

    def __len__(self):
        return len(self.symbols)

    def index(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise InvalidMorphism(f"symbol {symbol!r} not in alphabet {self.symbols!r}") from None

    def encode(self, symbols: Iterable[str]) -> Word:
        return tuple(self.index(s) for s in symbols)

    def decode(self, letters: Iterable[int]) -> list:
        return [self.symbols[c] for c in letters]

    def render(self, letters: Iterable[int], concat: bool = False) -> str:
        syms = self.decode(letters)
        if concat:
            return "".join(syms)
        return " ".join(syms)

    @property
    def single_char(self) -> bool:
        return all(len(s) == 1 for s in self.symbols)


@dataclass(frozen=True)
class Morphism:
    """A nonerasing morphism of an alphabet into itself.

    ``rules[c]`` is the image of letter ``c``.  Construction rejects erasing
    rules and out-of-alphabet letters, so every instance is valid.
    """

    alphabet: Alphabet
    rules: tuple

    def __post_init__(self):
        n = self.alphabet.size
        rules = tuple(tuple(r) for r in self.rules)
        object.__setattr__(self, "rules", rules)
        if len(rules) != n:
            raise InvalidMorphism(f"expected {n} rules, got {len(rules)}")
        for c, rule in enumerate(rules):
            if not rule:
                raise InvalidMorphism(
                    f"erasing rule for {self.alphabet.symbols[c]!r}: erasing morphisms are not supported"
                )
            for d in rule:
                if not isinstance(d, int) or not 0 <= d < n:
                    raise InvalidMorphism(f"rule for {self.alphabet.symbols[c]!r} uses letter {d!r} outside the alphabet")

    @classmethod
    def from_symbols(cls, alphabet: Alphabet, rules: Mapping[str, Sequence[str]]) -> "Morphism":
        missing = [s for s in alphabet.symbols if s not in rules]
        if missing:
            raise InvalidMorphism(f"no rule for {missing!r}")
        extra = [s for s in rules if s not in alphabet._index]
        if extra:
            raise InvalidMorphism(f"rules for unknown symbols {extra!r}")
        return cls(alphabet, tuple(alphabet.encode(rules[s]) for s in alphabet.symbols))

    @property
    def size(self) -> int:
        return self.alphabet.size

    @property
    def lengths(self) -> tuple:
        return tuple(len(r) for r in self.rules)

    @property
    def max_image_len(self) -> int:
        return max(self.lengths)

    @property
    def uniform_width(self):
        widths = set(self.lengths)
        return widths.pop() if len(widths) == 1 else None

    @property
    def nonerasing(self) -> bool:
        return all(self.lengths)

    def __call__(self, word: Iterable[int]) -> Word:
        rules = self.rules
        return tuple(chain.from_iterable(rules[c] for c in word))

    def iterate(self, word: Iterable[int], k: int) -> Word:
        w = tuple(word)
        for _ in range(k):
            w = self(w)
        return w

    def compose(self, other: "Morphism") -> "Morphism":
        """Return ``self ∘ other`` (apply ``other`` first)."""
        return Morphism(self.alphabet, tuple(self(r) for r in other.rules))

    def __str__(self):
        syms = self.alphabet.symbols
        parts = [f"{syms[c]}->{''.join(syms[d] for d in r)}" for c, r in enumerate(self.rules)]
        return ", ".join(parts)


@dataclass(frozen=True)
class Coding:
    """Total letter-to-letter map ``source -> target``."""

    source: Alphabet
    target: Alphabet
    table: tuple

    def __post_init__(self):
        table = tuple(self.table)
        object.__setattr__(self, "table", table)
        if len(table) != self.source.size:
            raise InvalidMorphism("coding must be defined on every source letter")
        for t in table:
            if not 0 <= t < self.target.size:
                raise InvalidMorphism(f"coding image {t!r} outside the target alphabet")

    @classmethod
    def from_symbols(cls, source: Alphabet, mapping: Mapping[str, str], target: Alphabet | None = None) -> "Coding":
        missing = [s for s in source.symbols if s not in mapping]
        if missing:
            raise InvalidMorphism(f"coding undefined on {missing!r}")
        if target is None:
            images = []
            for s in source.symbols:
                if mapping[s] not in images:
                    images.append(mapping[s])
            target = Alphabet(tuple(sorted(images)))
        return cls(source, target, tuple(target.index(mapping[s]) for s in source.symbols))

    @classmethod
    def identity(cls, alphabet: Alphabet) -> "Coding":
        return cls(alphabet, alphabet, tuple(range(alphabet.size)))

    def __call__(self, word: Iterable[int]) -> Word:
        t = self.table
        return tuple(t[c] for c in word)

    def preimage(self, letters: Iterable[int]) -> frozenset:
        wanted = set(letters)
        return frozenset(c for c, t in enumerate(self.table) if t in wanted)


@dataclass(frozen=True)
class MorphicSpec:
    morphism: Morphism
    seed: int
    coding: Coding | None = None

    @property
    def alphabet(self) -> Alphabet:
        return self.morphism.alphabet

    @property
    def output_alphabet(self) -> Alphabet:
        return self.coding.target if self.coding is not None else self.morphism.alphabet

    @property
    def max_image_len(self) -> int:
        return self.morphism.max_image_len

    @property
    def uniform_width(self):
        return self.morphism.uniform_width

    def with_morphism(self, morphism: Morphism) -> "MorphicSpec":
        return MorphicSpec(morphism, self.seed, self.coding)


def validate_spec(spec: MorphicSpec) -> MorphicSpec:
    """Check that ``spec`` generates an infinite fixed point and return it.

    >>> ab = Alphabet(("a", "b"))
    >>> spec = validate_spec(MorphicSpec(Morphism.from_symbols(ab, {"a": "ab", "b": "ba"}), 0))
    >>> spec.max_image_len, spec.uniform_width
    (2, 2)
    """
    h = spec.morphism
    if not h.nonerasing:
        raise InvalidMorphism("erasing morphism")
    if not 0 <= spec.seed < h.size:
        raise InvalidMorphism(f"seed {spec.seed!r} outside the alphabet")
    rule = h.rules[spec.seed]
    if rule[0] != spec.seed or len(rule) < 2:
        seed = h.alphabet.symbols[spec.seed]
        raise NotProlongable(f"rule for seed {seed!r} must start with {seed!r} and have length >= 2")
    if spec.coding is not None and spec.coding.source != h.alphabet:
        raise InvalidMorphism("coding source alphabet differs from the morphism alphabet")
    return spec


def morphism_power(h: Morphism, t: int) -> Morphism:
    if t < 1:
        raise ValueError("power must be >= 1")
    result = h
    for _ in range(t - 1):
        result = h.compose(result)
    return result


# ---------------------------------------------------------------------------
# streams


class WordStream:
    """Demand-driven infinite (or, for raw input, finite) word.

    Subclasses implement :meth:`_letter` for random access and may override
    :meth:`chunk` with something faster.  ``length`` is ``None`` for infinite
    streams.
    """

    origin = "abstract"
    length = None

    def __init__(self, alphabet: Alphabet):
        self.alphabet = alphabet

    def __getitem__(self, p: int) -> int:
        if p < 0:
            raise IndexError("negative position")
        if self.length is not None and p >= self.length:
            raise HorizonExceeded(f"position {p} is past the end of a finite word of length {self.length}")
        return self._letter(p)

    def _letter(self, p: int) -> int:
        raise NotImplementedError

    def chunk(self, start: int, stop: int):
        """Letters at ``start..stop-1`` (clipped at the end of a finite stream)."""
        if self.length is not None:
            stop = min(stop, self.length)
        return [self._letter(p) for p in range(start, stop)]

    def prefix(self, n: int) -> Word:
        letters = tuple(self.chunk(0, n))
        if len(letters) < n:
            raise HorizonExceeded(f"finite word has only {len(letters)} letters, {n} requested")
        return letters

    def symbols(self, n: int) -> list:
        return self.alphabet.decode(self.prefix(n))

    def __iter__(self):
        p = 0
        while self.length is None or p < self.length:
            yield self[p]
            p += 1


def _new_buffer(alphabet: Alphabet):
    return bytearray() if alphabet.size <= 256 else []


class FixedPointStream(WordStream):
    """The fixed point ``h^ω(a)`` of a validated :class:`MorphicSpec` (coding ignored)."""

    origin = "fixed point"

    def __init__(self, spec: MorphicSpec, buffer_cap: int = DEFAULT_BUFFER_CAP):
        validate_spec(spec)
        super().__init__(spec.alphabet)
        self.spec = spec
        self.morphism = spec.morphism
        self.buffer_cap = buffer_cap
        h = self.morphism
        self._bytes = isinstance(_new_buffer(self.alphabet), bytearray)
        if self._bytes:
            self._rules = [bytes(r) for r in h.rules]
        else:
            self._rules = [list(r) for r in h.rules]
        self._buf = _new_buffer(self.alphabet)
        self._buf.extend(self._rules[spec.seed])
        self._cursor = 1
        self._starts = [0]
        # descent tables: _lens[l][c] = |h^l(c)|, _par[l][c] = [h^l(c)]
        self._lens = [tuple(1 for _ in range(h.size))]
        self._par = None
        self._top_lengths = [1]  # |h^K(a)| for K = 0, 1, ...

    # -- buffer -------------------------------------------------------------

    @property
    def buffer_length(self) -> int:
        return len(self._buf)

    def _ensure(self, n: int) -> None:
        buf, rules = self._buf, self._rules
        while len(buf) < n:
            q = self._cursor
            stop = min(len(buf), q + max(1024, (n - len(buf)) // max(1, self.morphism.max_image_len) + 1))
            if self._bytes:
                buf += b"".join(map(rules.__getitem__, buf[q:stop]))
            else:
                buf.extend(chain.from_iterable(rules[c] for c in buf[q:stop]))
            self._cursor = stop

    def _letter(self, p: int) -> int:
        if p < len(self._buf):
            return self._buf[p]
        if p < self.buffer_cap:
            self._ensure(p + 1)
            return self._buf[p]
        return self.letter_by_descent(p)

    def chunk(self, start: int, stop: int):
        if stop <= self.buffer_cap:
            self._ensure(stop)
            return self._buf[start:stop]
        return super().chunk(start, stop)

    # -- descent through h^K(a) ---------------------------------------------

    def _level_lengths(self, level: int) -> tuple:
        rules = self.morphism.rules
        while len(self._lens) <= level:
            prev = self._lens[-1]
            self._lens.append(tuple(sum(prev[d] for d in r) for r in rules))
        return self._lens[level]

    def _top_level(self, p: int) -> int:
        """Smallest K with ``|h^K(a)| > p``."""
        a = self.spec.seed
        tops = self._top_lengths
        while tops[-1] <= p:
            tops.append(self._level_lengths(len(tops))[a])
        return bisect_right(tops, p)

    def locate(self, p: int, t: int = 1):
        """Return ``(q, start)``: the letter ``w_q`` whose image under ``h^t``
        contains position ``p``, and the position where that image starts."""
        a = self.spec.seed
        rules = self.morphism.rules
        top = max(self._top_level(p), t)
        self._level_lengths(top)
        node, offset, q, start = a, p, 0, 0
        for level in range(top, t, -1):
            child_lens = self._lens[level - 1]
            q_lens = self._lens[level - 1 - t]
            for c in rules[node]:
                if offset < child_lens[c]:
                    node = c
                    break
                offset -= child_lens[c]
                start += child_lens[c]
                q += q_lens[c]
        return q, start

    def letter_by_descent(self, p: int) -> int:
        a = self.spec.seed
        rules = self.morphism.rules
        top = self._top_level(p)
        node, offset = a, p
        for level in range(top, 0, -1):
            child_lens = self._lens[level - 1]
            for c in rules[node]:
                if offset < child_lens[c]:
                    node = c
                    break
                offset -= child_lens[c]
        return node

    def _level_parikh(self, level: int):
        n = self.morphism.size
        rules = self.morphism.rules
        if self._par is None:
            self._par = [[tuple(int(i == c) for i in range(n)) for c in range(n)]]
        while len(self._par) <= level:
            prev = self._par[-1]
            nxt = []
            for r in rules:
                v = [0] * n
                for d in r:
                    pv = prev[d]
                    for i in range(n):
                        v[i] += pv[i]
                nxt.append(tuple(v))
            self._par.append(nxt)
        return self._par[level]

    def prefix_parikh(self, q: int) -> tuple:
        """Parikh vector of ``w_0 ... w_{q-1}`` by descent (exact, any size)."""
        n = self.morphism.size
        total = [0] * n
        if q <= 0:
            return tuple(total)
        a = self.spec.seed
        rules = self.morphism.rules
        top = self._top_level(q - 1)
        self._level_parikh(top)
        node, offset = a, q  # count letters strictly before offset inside node's subtree
        for level in range(top, 0, -1):
            child_lens = self._lens[level - 1]
            child_par = self._par[level - 1]
            for c in rules[node]:
                if offset < child_lens[c]:
                    node = c
                    break
                offset -= child_lens[c]
                pv = child_par[c]
                for i in range(n):
                    total[i] += pv[i]
                if offset == 0:
                    return tuple(total)
        # at level 0 the node is a single letter; offset is 0 or 1
        if offset:
            total[node] += 1
        return tuple(total)

    def image_start(self, q: int, t: int = 1) -> int:
        """``|h^t(w_0 ... w_{q-1})|``: where the image of ``w_q`` begins."""
        lens = self._level_lengths(t)
        return sum(l * c for l, c in zip(lens, self.prefix_parikh(q)))

    # -- cumulative cursor (small positions) ---------------------------------

    def cursor_start(self, q: int) -> int:
        """Same value as :meth:`image_start` with ``t=1``, from a running sum
        of rule lengths over the buffer."""
        starts = self._starts
        if q >= len(starts):
            self._ensure(q)
            lengths = self.morphism.lengths
            first = len(starts) - 1
            sums = accumulate((lengths[c] for c in self._buf[first:q]), initial=starts[-1])
            next(sums)
            starts.extend(sums)
        return starts[q]


class CodedStream(WordStream):
    origin = "coded"

    def __init__(self, source: WordStream, coding: Coding):
        if coding.source != source.alphabet:
            raise InvalidMorphism("coding source alphabet differs from stream alphabet")
        super().__init__(coding.target)
        self.source = source
        self.coding = coding
        self.length = source.length
        self._table = None
        if coding.target.size <= 256 and source.alphabet.size <= 256:
            self._table = bytes(coding.table) + bytes(256 - len(coding.table))

    def _letter(self, p: int) -> int:
        return self.coding.table[self.source[p]]

    def chunk(self, start: int, stop: int):
        raw = self.source.chunk(start, stop)
        if self._table is not None and isinstance(raw, (bytes, bytearray)):
            return raw.translate(self._table)
        t = self.coding.table
        return [t[c] for c in raw]


class PredicateStream(WordStream):
    """Stream whose letter at ``p`` is ``fn(p)``."""

    origin = "predicate"

    def __init__(self, alphabet: Alphabet, fn, length: int | None = None):
        super().__init__(alphabet)
        self.fn = fn
        self.length = length

    def _letter(self, p: int) -> int:
        return self.fn(p)


class RawStream(WordStream):
    """A literal finite word; reads past its end raise HorizonExceeded."""

    origin = "raw"

    def __init__(self, alphabet: Alphabet, letters: Sequence[int]):
        super().__init__(alphabet)
        self._buf = bytes(letters) if alphabet.size <= 256 else list(letters)
        self.length = len(letters)

    @classmethod
    def from_symbols(cls, symbols: Sequence[str], alphabet: Alphabet | None = None) -> "RawStream":
        if alphabet is None:
            alphabet = Alphabet(tuple(sorted(set(symbols))))
        return cls(alphabet, alphabet.encode(symbols))

    def _letter(self, p: int) -> int:
        return self._buf[p]

    def chunk(self, start: int, stop: int):
        return self._buf[start:stop]


def fixed_point_stream(spec: MorphicSpec, buffer_cap: int = DEFAULT_BUFFER_CAP) -> FixedPointStream:
    return FixedPointStream(spec, buffer_cap=buffer_cap)


def coded_stream(stream: WordStream, coding: Coding) -> CodedStream:
    return CodedStream(stream, coding)


def word_stream(spec: MorphicSpec) -> WordStream:
    """The word generated by ``spec``, passed through its coding if it has one."""
    fp = fixed_point_stream(spec)
    return coded_stream(fp, spec.coding) if spec.coding is not None else fp


def image_interval(stream: FixedPointStream, q: int, t: int = 1) -> tuple:
    """Positions ``(start, end)`` occupied by ``h^t(w_q)`` inside ``w``."""
    if t == 1 and q < stream.buffer_cap:
        start = stream.cursor_start(q)
    else:
        start = stream.image_start(q, t)
    length = stream._level_lengths(t)[stream[q]]
    return start, start + length - 1


def inverse_image(stream: FixedPointStream, r: int, s: int, t: int = 1) -> tuple:
    """Shortest occurrence ``(i, j)`` whose image under ``h^t`` covers ``[r, s]``."""
    if not 0 <= r <= s:
        raise ValueError("need 0 <= r <= s")
    return stream.locate(r, t)[0], stream.locate(s, t)[0]


# ---------------------------------------------------------------------------
# JSON morphism documents


def _reject_duplicates(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise InvalidSpecDocument(f"duplicate key {k!r}")
        out[k] = v
    return out


def spec_from_document(doc: Mapping) -> MorphicSpec:
    if not isinstance(doc, Mapping):
        raise InvalidSpecDocument("spec document must be a JSON object")
    for key in ("alphabet", "rules", "seed"):
        if key not in doc:
            raise InvalidSpecDocument(f"missing {key!r}")
    alphabet = Alphabet(tuple(doc["alphabet"]))
    rules = doc["rules"]
    if not isinstance(rules, Mapping):
        raise InvalidSpecDocument("'rules' must be an object")
    h = Morphism.from_symbols(alphabet, {k: list(v) for k, v in rules.items()})
    coding = None
    if doc.get("coding") is not None:
        coding = Coding.from_symbols(alphabet, doc["coding"])
    spec = MorphicSpec(h, alphabet.index(doc["seed"]), coding)
    return validate_spec(spec)


def spec_to_document(spec: MorphicSpec) -> dict:
    syms = spec.alphabet.symbols
    doc = {
        "alphabet": list(syms),
        "rules": {syms[c]: [syms[d] for d in r] for c, r in enumerate(spec.morphism.rules)},
        "seed": syms[spec.seed],
    }
    if spec.coding is not None:
        tsyms = spec.coding.target.symbols
        doc["coding"] = {syms[c]: tsyms[t] for c, t in enumerate(spec.coding.table)}
    return doc


def parse_spec(text: str) -> MorphicSpec:
    try:
        doc = json.loads(text, object_pairs_hook=_reject_duplicates)
    except json.JSONDecodeError as exc:
        raise InvalidSpecDocument(f"malformed JSON: {exc}") from None
    return spec_from_document(doc)


def load_spec(path) -> MorphicSpec:
    path = Path(path)
    if not path.is_file():
        raise SpecNotFound(f"no spec file at {str(path)!r}")
    return parse_spec(path.read_text())


def make_spec(rules: Mapping[str, str | Sequence[str]], seed: str, coding: Mapping[str, str] | None = None,
              alphabet: Sequence[str] | None = None) -> MorphicSpec:
    """Convenience constructor, mostly for tests: ``make_spec({"a": "ab", "b": "ba"}, "a")``."""
    if alphabet is None:
        alphabet = list(rules)
    alpha = Alphabet(tuple(alphabet))
    h = Morphism.from_symbols(alpha, {k: list(v) for k, v in rules.items()})
    cod = Coding.from_symbols(alpha, coding) if coding is not None else None
    return validate_spec(MorphicSpec(h, alpha.index(seed), cod))
