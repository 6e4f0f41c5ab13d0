"""Maximal Δ-blocks, maximal x-blocks and their ratio statistics.

Scanners are generators that pull the word in chunks.  On a finite word a
block that touches the last letter cannot be confirmed maximal and is not
emitted; the scan simply stops there.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, NamedTuple, Sequence

from .errors import InfiniteBlock, PatternDegenerate, SpecError
from .linalg import decimal_str, fraction_str
from .words import Alphabet, WordStream

DEFAULT_HORIZON = 10**7
DEFAULT_WINDOW = 8
_CHUNK = 1 << 16


class BlockOccurrence(NamedTuple):
    k: int
    i: int
    j: int
    kind: str = "delta"
    phase: int | None = None

    @property
    def length(self) -> int:
        return self.j - self.i + 1

    @property
    def ratio(self) -> Fraction | None:
        return Fraction(self.j, self.i) if self.i else None

    def to_dict(self) -> dict:
        out = {"k": self.k, "i": self.i, "j": self.j}
        if self.phase is not None:
            out["phase"] = self.phase
        return out


@dataclass(frozen=True)
class XBlockPattern:
    x: tuple
    prefixes: tuple = field(init=False, repr=False)
    suffixes: tuple = field(init=False, repr=False)

    def __post_init__(self):
        x = tuple(self.x)
        if not x:
            raise PatternDegenerate("x-block pattern must be nonempty")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "prefixes", tuple(x[:l] for l in range(len(x))))
        object.__setattr__(self, "suffixes", tuple(x[len(x) - l :] for l in range(len(x))))

    @classmethod
    def from_symbols(cls, alphabet: Alphabet, symbols: Sequence[str]) -> "XBlockPattern":
        return cls(alphabet.encode(symbols))

    @property
    def d(self) -> int:
        return len(self.x)


def _letter_set(stream: WordStream, delta: Iterable[int]) -> frozenset:
    delta = frozenset(delta)
    n = stream.alphabet.size
    if not delta or any(not 0 <= c < n for c in delta) or len(delta) >= n:
        raise SpecError(f"Δ must be a nonempty proper subset of the alphabet, got {sorted(delta)}")
    return delta


def _chunks(stream: WordStream, stop: int | None, mask: bytes | None, delta: frozenset):
    """Yield ``(offset, bytes)`` with 1 marking Δ letters, 0 the rest."""
    pos = 0
    size = _CHUNK
    while stop is None or pos < stop:
        end = pos + size if stop is None else min(pos + size, stop)
        raw = stream.chunk(pos, end)
        if not len(raw):
            return
        if mask is not None and isinstance(raw, (bytes, bytearray)):
            flags = raw.translate(mask)
        else:
            flags = bytes(1 if c in delta else 0 for c in raw)
        yield pos, flags
        pos += len(raw)
        if pos < end:
            return  # finite stream ran out
        size = min(size * 2, 1 << 22)


def scan_delta_blocks(stream: WordStream, delta: Iterable[int], count: int | None = None,
                      until: int | None = None, horizon: int = DEFAULT_HORIZON) -> Iterator[BlockOccurrence]:
    """Maximal Δ-blocks of ``stream`` in order of position.

    Stops after ``count`` blocks or when the scan reaches position ``until``
    (the word is then treated as ending there).  A block running longer than
    ``horizon`` raises :class:`InfiniteBlock`.
    """
    delta = _letter_set(stream, delta)
    mask = None
    if stream.alphabet.size <= 256:
        mask = bytes(1 if c in delta else 0 for c in range(256))
    emitted = 0
    start = None
    if count is not None and count <= 0:
        return
    for offset, flags in _chunks(stream, until, mask, delta):
        p = 0
        n = len(flags)
        while p < n:
            if start is None:
                q = flags.find(1, p)
                if q < 0:
                    break
                start = offset + q
                p = q
            q = flags.find(0, p)
            if q < 0:
                if offset + n - start > horizon:
                    raise InfiniteBlock(f"Δ-block starting at {start} exceeds horizon {horizon}")
                break
            end = offset + q - 1
            if end - start + 1 > horizon:
                raise InfiniteBlock(f"Δ-block starting at {start} exceeds horizon {horizon}")
            yield BlockOccurrence(emitted, start, end)
            emitted += 1
            if count is not None and emitted >= count:
                return
            start = None
            p = q + 1


def naive_delta_blocks(letters: Sequence[int], delta: Iterable[int]) -> list:
    """Reference scan of a finite prefix; blocks touching the end are dropped."""
    delta = set(delta)
    out = []
    n = len(letters)
    for i in range(n):
        if letters[i] in delta and (i == 0 or letters[i - 1] not in delta):
            j = i
            while j + 1 < n and letters[j + 1] in delta:
                j += 1
            if j + 1 < n:
                out.append(BlockOccurrence(len(out), i, j))
    return out


def _x_offset(buf, s: int, e: int, x: tuple) -> int | None:
    """First offset ``k < d`` with ``x`` at ``s + k`` inside ``[s, e]``."""
    d = len(x)
    for k in range(min(d, e - s + 2 - d)):
        if tuple(buf[s + k : s + k + d]) == x:
            return k
    return None


def scan_x_blocks(stream: WordStream, pattern: XBlockPattern, count: int | None = None,
                  until: int | None = None, horizon: int = DEFAULT_HORIZON) -> Iterator[BlockOccurrence]:
    """Maximal x-blocks: maximal runs of period ``d = |x|`` holding a full ``x``.

    A break is a position ``b >= d`` with ``w_b != w_(b-d)``.  Between
    consecutive breaks ``b < b'`` the run ``[b-d+1, b'-1]`` is periodic and
    cannot be extended; the first run starts at 0.  Each block records the
    phase ``(position of its first full x) mod d``.
    """
    x = pattern.x
    d = pattern.d
    emitted = 0
    if count is not None and count <= 0:
        return
    buf = []
    base = 0  # word position of buf[0]
    run_start = 0
    pos = 0
    size = _CHUNK
    while until is None or pos < until:
        end = pos + size if until is None else min(pos + size, until)
        raw = stream.chunk(pos, end)
        if not len(raw):
            return
        buf.extend(raw)
        for p in range(pos, pos + len(raw)):
            if p < d or buf[p - base] == buf[p - d - base]:
                if p - run_start + 1 > horizon:
                    raise InfiniteBlock(f"x-periodic run starting at {run_start} exceeds horizon {horizon}")
                continue
            e = p - 1
            k = _x_offset(buf, run_start - base, e - base, x)
            if k is not None:
                yield BlockOccurrence(emitted, run_start, e, kind="x", phase=(run_start + k) % d)
                emitted += 1
                if count is not None and emitted >= count:
                    return
            run_start = p - d + 1
        pos += len(raw)
        if pos < end:
            return
        # keep only what the current run and the d-lookback need
        keep_from = min(run_start, pos - d) - base
        if keep_from > 0:
            del buf[:keep_from]
            base += keep_from
        size = min(size * 2, 1 << 20)


def naive_x_blocks(letters: Sequence[int], pattern: XBlockPattern) -> list:
    """Brute force: every maximal period-d interval containing x, by definition."""
    x, d, n = pattern.x, pattern.d, len(letters)
    out = []
    for i in range(n):
        for j in range(i + d - 1, n - 1):
            seg = letters[i : j + 1]
            if any(seg[t] != seg[t - d] for t in range(d, len(seg))):
                break
            left_ok = i == 0 or letters[i - 1] != letters[i - 1 + d]
            right_ok = letters[j + 1] != letters[j + 1 - d]
            if not (left_ok and right_ok):
                continue
            for k in range(min(d, len(seg) - d + 1)):
                if tuple(seg[k : k + d]) == x:
                    out.append(BlockOccurrence(len(out), i, j, kind="x", phase=(i + k) % d))
                    break
    return out


@dataclass(frozen=True)
class RatioStats:
    count: int
    max_ratio: Fraction | None
    tail_estimate: Fraction | None
    window: int
    argmax: int | None = None
    running_max: tuple = ()

    @property
    def bound(self) -> Fraction | None:
        """Every recorded ratio is ``<= bound``."""
        return self.max_ratio

    def to_dict(self) -> dict:
        def pair(x):
            return None if x is None else {"exact": fraction_str(x), "decimal": decimal_str(x)}

        return {"count": self.count, "max": pair(self.max_ratio), "tail": pair(self.tail_estimate),
                "window": self.window, "argmax": self.argmax}


class RatioAccumulator:
    """Incremental version of :func:`ratio_stats`."""

    def __init__(self, window: int = DEFAULT_WINDOW, keep_history: bool = False):
        self.window = window
        self.count = 0
        self.max_ratio = None
        self.argmax = None
        self._tail = deque(maxlen=window)
        self._history = [] if keep_history else None

    def add(self, block: BlockOccurrence) -> Fraction | None:
        self.count += 1
        r = block.ratio
        if r is None:
            return None
        self._tail.append(r)
        if self.max_ratio is None or r > self.max_ratio:
            self.max_ratio = r
            self.argmax = block.k
        if self._history is not None:
            self._history.append(self.max_ratio)
        return r

    def stats(self) -> RatioStats:
        tail = max(self._tail) if self._tail else None
        return RatioStats(self.count, self.max_ratio, tail, self.window, self.argmax,
                          tuple(self._history or ()))


def ratio_stats(blocks: Iterable[BlockOccurrence], window: int = DEFAULT_WINDOW) -> RatioStats:
    acc = RatioAccumulator(window, keep_history=True)
    for b in blocks:
        acc.add(b)
    return acc.stats()


def phase_partition(blocks: Iterable[BlockOccurrence], pattern: XBlockPattern) -> list:
    parts = [[] for _ in range(pattern.d)]
    for b in blocks:
        if b.phase is None:
            raise ValueError("phase_partition needs blocks from scan_x_blocks")
        parts[b.phase].append(b)
    return parts


def _fresh_symbol(alphabet: Alphabet) -> str:
    for cand in ("α", "α'", "α''"):
        if cand not in alphabet.symbols:
            return cand
    return "α" + str(len(alphabet.symbols))


class BlockCodedStream(WordStream):
    """``v_m``: the word from offset ``m`` on, cut into ``d``-letter windows;
    a window equal to ``x`` becomes ``α^d``, any other window is copied.

    Output position ``t`` corresponds to word position ``m + t``.
    """

    origin = "block-coded"

    def __init__(self, source: WordStream, pattern: XBlockPattern, m: int):
        if not 0 <= m < pattern.d:
            raise PatternDegenerate(f"phase {m} outside 0..{pattern.d - 1}")
        sym = source.alphabet.symbols + (_fresh_symbol(source.alphabet),)
        super().__init__(Alphabet(sym))
        self.alpha = len(sym) - 1
        self.source = source
        self.pattern = pattern
        self.m = m
        if source.length is not None:
            self.length = max(0, source.length - m)

    def _letter(self, t: int) -> int:
        d = self.pattern.d
        w0 = self.m + (t // d) * d
        window = tuple(self.source.chunk(w0, w0 + d))
        if window == self.pattern.x:
            return self.alpha
        return self.source[self.m + t]

    def chunk(self, start: int, stop: int):
        if self.length is not None:
            stop = min(stop, self.length)
        if stop <= start:
            return []
        d = self.pattern.d
        a = (start // d) * d
        b = -(-stop // d) * d
        raw = list(self.source.chunk(self.m + a, self.m + b))
        x = list(self.pattern.x)
        for q in range(0, len(raw) - d + 1, d):
            if raw[q : q + d] == x:
                raw[q : q + d] = [self.alpha] * d
        out = raw[start - a : stop - a]
        return bytes(out) if self.alphabet.size <= 256 else out


def block_code_transform(stream: WordStream, pattern: XBlockPattern, m: int) -> BlockCodedStream:
    return BlockCodedStream(stream, pattern, m)


def blocks_to_json(blocks: Iterable[BlockOccurrence]) -> list:
    return [b.to_dict() for b in blocks]
