"""Witness words: Perron-number morphic words, rational-exponent automatic
words, the three-marker variant, Thue-Morse, and p-kernel enumeration.

For a primitive matrix ``A`` with Perron root μ, ``h`` realises ``A`` on
letters ``0..k-1`` and ``g`` extends it by ``g(α) = αβ0``, ``g(β) = β``.  The
fixed point is ``α β 0 β h(0) β h^2(0) β ...`` and, coding ``β`` to 1 and all
else to 0, the ones sit at ``n_(j+1) = n_j + |h^j(0)| + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .diophantine import ClassC, class_c_check
from .errors import HorizonExceeded, InvalidParams, NotPerron
from .linalg import (
    Interval,
    decimal_str,
    dominant_eigen_interval,
    fraction_str,
    incidence_matrix,
    mat_vec,
    matrix_to_json,
    primitivity_check,
)
from .words import (
    Alphabet,
    Coding,
    MorphicSpec,
    Morphism,
    PredicateStream,
    WordStream,
    make_spec,
    spec_to_document,
    validate_spec,
    word_stream,
)

DEFAULT_ONES = 30
BINARY = Alphabet(("0", "1"))


@dataclass
class ConstructionReport:
    spec: MorphicSpec | None
    stream: WordStream
    target: object  # Fraction, int or Interval
    ones: list
    ratios: list
    class_c: ClassC
    matrix: tuple | None = None
    eigen: Interval | None = None
    lengths: list = field(default_factory=list)  # |h^j(0)|
    notes: list = field(default_factory=list)

    def tail_ratio(self, window: int = 8) -> Fraction:
        return max(self.ratios[-window:])

    def to_dict(self) -> dict:
        if isinstance(self.target, Interval):
            target = {"lo": fraction_str(self.target.lo), "hi": fraction_str(self.target.hi),
                      "decimal": decimal_str(self.target.mid)}
        else:
            target = fraction_str(self.target)
        out = {"target": target, "ones": [str(n) for n in self.ones],
               "ratios": [fraction_str(r) for r in self.ratios],
               "ratio_decimals": [decimal_str(r) for r in self.ratios],
               "class_C": str(self.class_c), "notes": self.notes}
        if self.spec is not None:
            out["spec"] = spec_to_document(self.spec)
        if self.matrix is not None:
            out["matrix"] = matrix_to_json(self.matrix)
        if self.eigen is not None:
            out["eigen_interval"] = self.eigen.to_dict()
        return out


def _ratios(ones: Sequence[int]) -> list:
    return [Fraction(b, a) for a, b in zip(ones, ones[1:]) if a]


def perron_matrix(mu: int) -> tuple:
    """The 2x2 matrix used for an integer μ: ``[[1,1],[1,1]]`` for μ = 2,
    ``[[μ-1, μ-1], [1, 1]]`` above."""
    if mu < 2:
        raise InvalidParams(f"integer μ must be >= 2, got {mu}")
    if mu == 2:
        return ((1, 1), (1, 1))
    return ((mu - 1, mu - 1), (1, 1))


def _check_perron_matrix(A) -> tuple:
    A = tuple(tuple(int(x) for x in row) for row in A)
    k = len(A)
    if k < 2 or any(len(row) != k for row in A):
        raise NotPerron("matrix must be square of size >= 2")
    if any(x < 0 for row in A for x in row):
        raise NotPerron("matrix entries must be nonnegative")
    if any(all(A[i][j] == 0 for i in range(k)) for j in range(k)):
        raise NotPerron("matrix has a zero column")
    if not primitivity_check(A):
        raise NotPerron("matrix is not primitive")
    return A


def morphism_from_matrix(A, alphabet: Alphabet | None = None) -> Morphism:
    """``h`` on letters ``0..k-1`` with ``A(h) = A``; each image lists its
    letters in ascending order with multiplicity ``a_(i,j)``."""
    k = len(A)
    alphabet = alphabet or Alphabet(tuple(str(i) for i in range(k)))
    rules = tuple(tuple(i for i in range(k) for _ in range(A[i][j])) for j in range(k))
    return Morphism(alphabet, rules)


def _level_lengths(A, count: int) -> list:
    """``|h^j(0)| = 1 . A^j e_0`` for ``j < count``."""
    v = tuple(int(i == 0) for i in range(len(A)))
    out = []
    for _ in range(count):
        out.append(sum(v))
        v = mat_vec(A, v)
    return out


def _extended_spec(A, head: Sequence[str]) -> MorphicSpec:
    k = len(A)
    digits = [str(i) for i in range(k)]
    markers = [s for s in ("α", "β", "γ") if s in head or s in ("α", "β")]
    h = morphism_from_matrix(A)
    rules = {"α": list(head), "β": ["β"]}
    if "γ" in markers:
        rules["γ"] = ["γ"]
    for i, r in enumerate(h.rules):
        rules[digits[i]] = [digits[c] for c in r]
    coding = {s: ("1" if s == "β" else "0") for s in markers + digits}
    return make_spec(rules, "α", coding, alphabet=markers + digits)


def _check_prefix(spec: MorphicSpec, expected: list) -> None:
    got = spec.alphabet.decode(word_stream_pure(spec).prefix(len(expected)))
    if got != expected:
        raise AssertionError(f"fixed point prefix {got[:40]} differs from the expected shape {expected[:40]}")


def word_stream_pure(spec: MorphicSpec):
    from .words import fixed_point_stream

    return fixed_point_stream(spec)


def perron_spec(source, count: int = DEFAULT_ONES, tol=Fraction(1, 10**12)) -> ConstructionReport:
    """Morphic word whose one-position ratios tend to the Perron root of ``A``.

    ``source`` is an integer μ >= 2 or a primitive nonnegative square matrix.
    """
    if isinstance(source, int):
        A = perron_matrix(source)
        target = source
    else:
        A = _check_perron_matrix(source)
        target = None
    spec = _extended_spec(A, ["α", "β", "0"])
    validate_spec(spec)
    h = morphism_from_matrix(A)
    if incidence_matrix(h) != A:
        raise AssertionError("constructed morphism does not realise the matrix")
    eigen = dominant_eigen_interval(A, tol)
    if target is None:
        target = eigen
    elif not eigen.contains(target):
        raise AssertionError(f"Perron root interval {eigen} misses μ = {target}")
    lengths = _level_lengths(A, count)
    ones = [1]
    for j in range(count - 1):
        ones.append(ones[-1] + lengths[j] + 1)
    # literal shape check on the first four segments
    expected = ["α"]
    digits = [str(i) for i in range(len(A))]
    seg = (0,)
    for _ in range(4):
        expected += ["β"] + [digits[c] for c in seg]
        seg = h(seg)
    _check_prefix(spec, expected)
    notes = []
    cc = class_c_check(ones)
    if cc.status != "holds":
        notes.append(f"one-position ratios drop below 2 (first at j={cc.first_violation})")
    return ConstructionReport(spec, word_stream(spec), target, ones, _ratios(ones), cc, A, eigen, lengths, notes)


def power_indices(mu: int, count: int = DEFAULT_ONES) -> list:
    """``n_j = μ^j``: a strict class-C index sequence with ratio exactly μ."""
    if mu < 2:
        raise InvalidParams("μ must be >= 2")
    return [mu**j for j in range(count)]


def remark2_spec(source, s: int, t: int, count: int = DEFAULT_ONES) -> ConstructionReport:
    """Three-marker variant ``g(α) = α β 0 (γ0)^s β 0 (γ0)^t``.

    The fixed point is ``α`` followed by segments
    ``β h^k(0) (γ h^k(0))^s β h^k(0) (γ h^k(0))^t`` for ``k = 0, 1, ...``.
    """
    if s < 0 or t < 0:
        raise InvalidParams("s and t must be nonnegative")
    A = perron_matrix(source) if isinstance(source, int) else _check_perron_matrix(source)
    head = ["α", "β", "0"] + ["γ", "0"] * s + ["β", "0"] + ["γ", "0"] * t
    spec = _extended_spec(A, head)
    validate_spec(spec)
    h = morphism_from_matrix(A)
    digits = [str(i) for i in range(len(A))]
    segs = -(-count // 2) + 1
    lengths = _level_lengths(A, segs)
    ones = []
    pos = 1
    for k in range(segs):
        L = lengths[k]
        ones.append(pos)
        pos += 1 + L + s * (L + 1)
        ones.append(pos)
        pos += 1 + L + t * (L + 1)
    ones = ones[:count]
    expected = ["α"]
    seg = (0,)
    for _ in range(3):
        img = [digits[c] for c in seg]
        expected += ["β"] + img + (["γ"] + img) * s + ["β"] + img + (["γ"] + img) * t
        seg = h(seg)
    _check_prefix(spec, expected)
    eigen = dominant_eigen_interval(A)
    coded = word_stream(spec)
    check = [p for p, c in enumerate(coded.prefix(ones[min(len(ones), 12) - 1] + 1)) if c]
    if check != ones[: len(check)]:
        raise AssertionError("one-positions disagree with the generated word")
    return ConstructionReport(spec, coded, source if isinstance(source, int) else eigen, ones,
                              _ratios(ones), class_c_check(ones), A, eigen, lengths)


def thue_morse_spec() -> MorphicSpec:
    return make_spec({"0": "01", "1": "10"}, "0")


# ---------------------------------------------------------------------------
# rational exponents


def rational_member(n: int, p: int, q: int) -> bool:
    """Is ``n = m p^h`` for some ``h >= 0`` and ``p <= m <= qp``?"""
    h_part = n
    while True:
        if p <= h_part <= q * p:
            return True
        if h_part % p or h_part // p < p:
            return False
        h_part //= p


def rational_word(p: int, q: int, count: int = DEFAULT_ONES) -> ConstructionReport:
    """0/1 word with ones on ``{m p^h : p <= m <= qp, h >= 0}``; the
    consecutive-one ratios have limsup ``p/q`` (the jump from ``qp·p^h`` to
    ``p·p^(h+1)``)."""
    if p < 2 or p <= q or q < 1:
        raise InvalidParams(f"need p > q >= 1 and p >= 2, got p={p}, q={q}")
    stream = PredicateStream(BINARY, lambda n: int(rational_member(n, p, q)))
    ones = []
    h = 0
    while len(ones) < count:
        level = [m * p**h for m in range(p, q * p + 1)]
        ones.extend(n for n in level if not ones or n > ones[-1])
        h += 1
    ones = ones[:count]
    target = Fraction(p, q)
    return ConstructionReport(None, stream, target, ones, _ratios(ones), class_c_check(ones),
                              notes=["automatic: see p_kernel for the finite-kernel evidence"])


# ---------------------------------------------------------------------------
# kernels


@dataclass
class KernelResult:
    elements: list  # (multiplier, offset) representatives
    prefixes: list
    finite: bool
    depth: int
    p: int

    @property
    def size(self) -> int:
        return len(self.elements)

    def to_dict(self) -> dict:
        return {"p": self.p, "depth": self.depth, "finite": self.finite, "size": self.size,
                "elements": [{"multiplier": str(m), "offset": str(r),
                              "prefix": "".join(str(c) for c in pre[:32])}
                             for (m, r), pre in zip(self.elements, self.prefixes)]}


def p_kernel(stream: WordStream, p: int, depth: int = 1000, max_elems: int = 64) -> KernelResult:
    """Closure of ``u`` under ``n -> u_(p n + r)``, elements compared on
    prefixes of length ``depth`` with a recheck at ``2 depth``.

    A finite closure at this depth is evidence (not proof) of automaticity.
    """
    if p < 2:
        raise InvalidParams("p must be >= 2")

    def prefix(m: int, r: int, n: int) -> tuple:
        return tuple(stream[m * k + r] for k in range(n))

    elements = [(1, 0)]
    prefixes = [prefix(1, 0, depth)]
    long_prefixes = {}
    queue = [0]
    while queue:
        idx = queue.pop(0)
        m, r = elements[idx]
        for c in range(p):
            cand = (m * p, r + m * c)
            pre = prefix(*cand, depth)
            match = None
            for e, other in enumerate(prefixes):
                if other != pre:
                    continue
                if e not in long_prefixes:
                    long_prefixes[e] = prefix(*elements[e], 2 * depth)
                if long_prefixes[e] == prefix(*cand, 2 * depth):
                    match = e
                    break
            if match is not None:
                continue
            elements.append(cand)
            prefixes.append(pre)
            if len(elements) > max_elems:
                raise HorizonExceeded(f"p-kernel has more than {max_elems} elements at depth {depth}")
            queue.append(len(elements) - 1)
    return KernelResult(elements, prefixes, True, depth, p)
