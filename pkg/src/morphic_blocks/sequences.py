"""Chains of maximal Δ-blocks and the exact value of limsup j_k/i_k.

The morphism is first replaced by a power ``g = h^e`` whose letter-reachability
is idempotent (:func:`normalize_spec`).  With ``M`` the longest image of ``g``,
every maximal Δ-block ``u = w_i..w_j`` with ``i > M`` and ``|u| > M^2`` has a
unique successor: the maximal block containing ``g(w_(i+M)..w_(j-M))``, which
itself lies inside ``g(w_(i-M+1)..w_(j+M-1))``.  Following successors gives a
chain whose boundary drift (the stretches) is eventually periodic, and whose
Parikh vectors then obey a linear recurrence in ``A(g)``.

Successors are located by looking only at the two boundary windows allowed by
the sandwich, so chains can be followed to positions far too large to expand.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .blocks import DEFAULT_HORIZON, BlockOccurrence, XBlockPattern, ratio_stats, phase_partition, scan_delta_blocks, scan_x_blocks
from .errors import (
    DegenerateDenominator,
    HorizonExceeded,
    InfiniteBlock,
    LambdaNotGreaterThanOne,
    NonPrimitive,
    SpecError,
)
from .linalg import (
    DEFAULT_TOL,
    Interval,
    bool_matrix,
    bool_power_cycle,
    bool_stabilize,
    decimal_str,
    dominant_eigen_interval,
    eventual_letters,
    fraction_str,
    growing_letters,
    incidence_matrix,
    left_eigenvector,
    mat_pow,
    mat_vec,
    primitivity_check,
)
from .words import FixedPointStream, MorphicSpec, morphism_power, validate_spec, word_stream


@dataclass(frozen=True)
class Budget:
    """Resource limits for :func:`limsup_delta` / :func:`limsup_x`."""

    prefix: int = 200_000  # positions searched for chain roots / scanned empirically
    horizon: int = DEFAULT_HORIZON
    max_preperiod: int = 16
    max_period: int = 16
    eval_steps: int = 64  # recurrence depth for the empirical method
    tol: Fraction = DEFAULT_TOL
    window: int = 8


# ---------------------------------------------------------------------------
# normalisation and hypotheses


def normalize_spec(spec: MorphicSpec) -> tuple:
    """Return ``(spec', e)`` with ``h`` replaced by ``h^e``, ``e`` from
    :func:`bool_stabilize`.  The fixed point is the same word."""
    validate_spec(spec)
    e = bool_stabilize(bool_matrix(incidence_matrix(spec.morphism)))
    if e == 1:
        return spec, 1
    return spec.with_morphism(morphism_power(spec.morphism, e)), e


def _tail_word(spec: MorphicSpec) -> tuple:
    """``x`` with ``h(a) = a x``; the fixed point is ``a x h(x) h^2(x) ...``."""
    return spec.morphism.rules[spec.seed][1:]


def recurrent_letters(spec: MorphicSpec) -> frozenset:
    """Letters occurring infinitely often in the fixed point."""
    return eventual_letters(spec.morphism, _tail_word(spec))


def pulled_back_delta(spec: MorphicSpec, delta: Iterable[int]) -> frozenset:
    """``Δ' = τ^-1(Δ)`` on the pure word (``Δ`` over the coded alphabet)."""
    delta = frozenset(delta)
    out_size = spec.output_alphabet.size
    if not delta or len(delta) >= out_size or any(not 0 <= c < out_size for c in delta):
        raise SpecError(f"Δ must be a nonempty proper subset of the output alphabet, got {sorted(delta)}")
    if spec.coding is None:
        return delta
    pre = spec.coding.preimage(delta)
    if len(pre) in (0, spec.alphabet.size):
        raise SpecError("Δ pulls back to an empty or full subalphabet of the pure word")
    return pre


def check_no_terminal_block(spec: MorphicSpec, delta_p: frozenset) -> frozenset:
    """Raise :class:`InfiniteBlock` when the fixed point ends in a Δ-block;
    return the recurrent letters otherwise."""
    rec = recurrent_letters(spec)
    if not rec - delta_p:
        raise InfiniteBlock("letters outside Δ occur only finitely often: the word ends in a Δ-block")
    return rec


def unbounded_certificate(spec: MorphicSpec, delta_p: frozenset) -> int | None:
    """A recurrent growing letter whose images stay inside ``Δ'`` (so the word
    has Δ-blocks of unbounded length), or ``None``.  Sufficient, not necessary."""
    h = spec.morphism
    rec = recurrent_letters(spec)
    for b in sorted(growing_letters(h) & rec & delta_p):
        if eventual_letters(h, (b,)) <= delta_p and all(
            set(h.iterate((b,), k)) <= delta_p for k in range(1, 4)
        ):
            return b
    return None


# ---------------------------------------------------------------------------
# chain records


@dataclass(frozen=True)
class StretchRecord:
    """Boundary drift from ``u^(k)`` to ``u^(k+1)``.

    Signs: +1 means the stretch lies inside ``u^(k+1)`` (the block grew past
    the image of the old edge), -1 that it borders the block, 0 empty.
    """

    left: tuple
    left_sign: int
    right: tuple
    right_sign: int
    left_pivot: int
    right_pivot: int

    @staticmethod
    def _growth(sign: int) -> str:
        return {1: "growing", -1: "shrinking", 0: "stationary"}[sign]

    @property
    def left_growth(self) -> str:
        return self._growth(self.left_sign)

    @property
    def right_growth(self) -> str:
        return self._growth(self.right_sign)

    def to_dict(self, render=None) -> dict:
        r = render or (lambda w: list(w))
        return {"left": r(self.left), "left_sign": self.left_sign, "right": r(self.right),
                "right_sign": self.right_sign, "left_pivot": self.left_pivot, "right_pivot": self.right_pivot}


@dataclass(frozen=True)
class ChainSignature:
    """Letters of ``w`` around the inverse image of the chain's root."""

    letters: tuple

    def __str__(self):
        return ",".join(map(str, self.letters))


@dataclass
class DeltaChain:
    blocks: list
    stretches: list = field(default_factory=list)
    signature: ChainSignature | None = None
    preperiod: int | None = None
    period: int | None = None
    U: tuple = ()
    V: tuple = ()

    @property
    def root(self) -> BlockOccurrence:
        return self.blocks[0]


class ChainWalker:
    """Successor and stretch computations on the normalised fixed point."""

    def __init__(self, spec: MorphicSpec, delta_p: frozenset, stream: FixedPointStream | None = None):
        self.spec = spec
        self.h = spec.morphism
        self.M = self.h.max_image_len
        self.delta = delta_p
        self.stream = stream if stream is not None else FixedPointStream(spec)
        self.A = incidence_matrix(self.h)
        # letters whose image has a letter outside Δ'
        self._leaky = frozenset(c for c, r in enumerate(self.h.rules) if any(x not in delta_p for x in r))

    def qualifies(self, i: int, j: int) -> bool:
        return i > self.M and j - i + 1 > self.M**2

    def _letters(self, lo: int, hi: int) -> list:
        """``w[lo..hi]`` inclusive."""
        s = self.stream
        if hi < s.buffer_cap:
            return list(s.chunk(lo, hi + 1))
        return [s[p] for p in range(lo, hi + 1)]

    def successor(self, i: int, j: int) -> tuple:
        """Maximal block containing the image of the core ``w[i+M..j-M]``."""
        M, s, delta = self.M, self.stream, self.delta
        lo = s.image_start(i - M + 1)
        core_lo = s.image_start(i + M)
        win = self._letters(lo, core_lo - 1)
        outside = [t for t, c in enumerate(win) if c not in delta]
        if not outside:
            raise AssertionError(f"no letter outside Δ left of the image of block ({i},{j})")
        i2 = lo + outside[-1] + 1
        core_hi = s.image_start(j - M + 1) - 1
        hi = s.image_start(j + M) - 1
        win = self._letters(core_hi + 1, hi)
        outside = [t for t, c in enumerate(win) if c not in delta]
        if not outside:
            raise AssertionError(f"no letter outside Δ right of the image of block ({i},{j})")
        j2 = core_hi + outside[0]
        if not lo <= i2 <= core_lo <= core_hi <= j2 <= hi:
            raise AssertionError(f"sandwich violated for ({i},{j}) -> ({i2},{j2})")
        return i2, j2

    def stretch(self, i: int, j: int, i2: int, j2: int) -> StretchRecord:
        s = self.stream
        r = s.image_start(i)
        n = s.image_start(j + 1) - 1
        if i2 < r:
            left, ls = tuple(self._letters(i2, r - 1)), 1
        elif i2 > r:
            left, ls = tuple(self._letters(r, i2 - 1)), -1
        else:
            left, ls = (), 0
        if j2 > n:
            right, rs = tuple(self._letters(n + 1, j2)), 1
        elif j2 < n:
            right, rs = tuple(self._letters(j2 + 1, n)), -1
        else:
            right, rs = (), 0
        lp = s.locate(i2 - 1)[0]
        rp = s.locate(j2 + 1)[0]
        return StretchRecord(left, ls, right, rs, s[lp], s[rp])

    def pivots(self, i: int, j: int) -> tuple:
        """Positions of the left and right pivots of block ``(i, j)``."""
        M, s = self.M, self.stream
        left = [p for p in range(i - M + 1, i + M) if s[p] in self._leaky]
        right = [p for p in range(j - M + 1, j + M) if s[p] in self._leaky]
        return (left[-1] if left else None), (right[0] if right else None)

    def state(self, i: int, j: int):
        """Local letters that determine the next step of the chain."""
        p, q = self.pivots(i, j)
        M = self.M
        if p is None or q is None:
            return None
        llo, lhi = min(p, i) - 1, max(p, i) + M + 1
        rlo, rhi = min(q, j) - M - 1, max(q, j) + 1
        return (tuple(self._letters(llo, lhi)), p - llo, i - llo,
                tuple(self._letters(rlo, rhi)), q - rlo, j - rlo)

    def signature(self, i: int, j: int) -> ChainSignature:
        s, M = self.stream, self.M
        a = s.locate(i)[0]
        b = s.locate(j)[0]
        return ChainSignature(tuple(self._letters(max(0, a - M), b + M)))

    def parikh_block(self, i: int, j: int) -> tuple:
        s = self.stream
        hi = s.prefix_parikh(j + 1)
        lo = s.prefix_parikh(i)
        return tuple(x - y for x, y in zip(hi, lo))


def link_blocks(spec: MorphicSpec, blocks: Sequence[BlockOccurrence], delta_p: frozenset,
                walker: ChainWalker | None = None) -> list:
    """One chain root per signature, smallest root first.

    ``spec`` must already be normalised and ``blocks`` must be the maximal
    Δ'-blocks of a prefix of its fixed point.  A qualifying block is a root
    when it is not the successor of any qualifying block.
    """
    walker = walker or ChainWalker(spec, delta_p)
    qual = [b for b in blocks if walker.qualifies(b.i, b.j)]
    successors = set()
    for b in qual:
        successors.add(walker.successor(b.i, b.j))
    chains = {}
    for b in qual:
        if (b.i, b.j) in successors:
            continue
        sig = walker.signature(b.i, b.j)
        if sig not in chains:
            chains[sig] = DeltaChain([b], signature=sig)
    return sorted(chains.values(), key=lambda c: c.root.i)


def analyze_stretches(chain: DeltaChain, walker: ChainWalker, max_preperiod: int = 16,
                      max_period: int = 16) -> DeltaChain:
    """Extend ``chain`` until its boundary state repeats; fills in stretches,
    preperiod and period.  One extra period is walked as a consistency check."""
    states = {}
    i, j = chain.root.i, chain.root.j
    blocks = [chain.root]
    stretches = []
    k = 0
    while True:
        st = walker.state(i, j)
        if st is None:
            raise AssertionError(f"chain element ({i},{j}) has no pivot")
        if st in states:
            pre = states[st]
            period = k - pre
            break
        if k >= max_preperiod + max_period:
            raise HorizonExceeded(f"no repetition of the chain state within {k} steps")
        states[st] = k
        i2, j2 = walker.successor(i, j)
        stretches.append(walker.stretch(i, j, i2, j2))
        i, j = i2, j2
        k += 1
        blocks.append(BlockOccurrence(k, i, j))
    # walk one more period so that every phase has two members after pre
    for _ in range(period):
        i2, j2 = walker.successor(i, j)
        stretches.append(walker.stretch(i, j, i2, j2))
        i, j = i2, j2
        k += 1
        blocks.append(BlockOccurrence(k, i, j))
    for t in range(pre, pre + period):
        if stretches[t] != stretches[t + period]:
            raise AssertionError("stretch sequence not periodic after a repeated state")
    chain.blocks = blocks
    chain.stretches = stretches
    chain.preperiod = pre
    chain.period = period
    chain.U = walker.parikh_block(chain.root.i, chain.root.j)
    chain.V = walker.stream.prefix_parikh(chain.root.i)
    return chain


# ---------------------------------------------------------------------------
# limits


def chain_ratio(A, U, V, X, Y, k: int) -> Fraction:
    """Exact ``j_k / i_k`` from the Parikh recurrence (no closed form)."""
    u, v = list(U), list(V)
    for _ in range(k):
        u = [a + y for a, y in zip(mat_vec(A, u), Y)]
        v = [a + x for a, x in zip(mat_vec(A, v), X)]
    i_k = sum(v)
    j_k = i_k + sum(u) - 1
    return Fraction(j_k, i_k)


def chain_ratios(A, U, V, X, Y, k: int) -> list:
    """``[j_t/i_t for t in 0..k]`` from the recurrence."""
    u, v = list(U), list(V)
    out = []
    for _ in range(k + 1):
        out.append(Fraction(sum(v) + sum(u) - 1, sum(v)))
        u = [a + y for a, y in zip(mat_vec(A, u), Y)]
        v = [a + x for a, x in zip(mat_vec(A, v), X)]
    return out


def exact_limsup_uniform(m: int, u: int, v: int, y: int, x: int) -> Fraction:
    """``lim j_k/i_k = 1 + ((m-1)|u| + y) / ((m-1)|v| + x)`` for an m-uniform morphism."""
    den = (m - 1) * v + x
    if den <= 0:
        raise DegenerateDenominator(f"(m-1)|v| + x = {den} is not positive")
    return 1 + Fraction((m - 1) * u + y, den)


def exact_limit_primitive(A, U, V, X, Y, tol=DEFAULT_TOL) -> Interval:
    """Certified enclosure of ``1 + (l.U + l.Y/(λ-1)) / (l.V + l.X/(λ-1))``.

    ``l`` is the dominant left eigenvector and ``λ`` the Perron root of the
    primitive matrix ``A``; both come as rational intervals and the formula is
    evaluated in interval arithmetic, tightening until the width is ``<= tol``.
    """
    tol = Fraction(tol)
    if not primitivity_check(A):
        raise NonPrimitive("exact_limit_primitive needs a primitive matrix")
    inner = tol / 16
    for _ in range(8):
        lam = dominant_eigen_interval(A, inner)
        if lam.lo <= 1:
            if lam.hi <= 1:
                raise LambdaNotGreaterThanOne(f"Perron root in [{lam.lo}, {lam.hi}] does not exceed 1")
            inner /= 1024
            continue
        ell = left_eigenvector(A, inner).bounds

        def dot(vec):
            return sum((b * c for b, c in zip(ell, vec)), Interval.point(0))

        gap = lam - 1
        den = dot(V) + dot(X) / gap
        if den.hi <= 0:
            raise DegenerateDenominator("l.V + l.X/(λ-1) is not positive")
        if den.lo <= 0:
            inner /= 1024
            continue
        result = 1 + (dot(U) + dot(Y) / gap) / den
        if result.width <= tol:
            return result
        inner /= 1024
    raise HorizonExceeded(f"could not tighten the primitive limit below {tol}")


@dataclass(frozen=True)
class PhaseValue:
    phase: int
    method: str
    kind: str  # rational | interval | estimate
    value: object  # Fraction or Interval
    U: tuple
    V: tuple
    X: tuple
    Y: tuple

    @property
    def key(self) -> Fraction:
        return self.value.mid if isinstance(self.value, Interval) else self.value

    def to_dict(self) -> dict:
        out = {"phase": self.phase, "method": self.method, "value": _value_dict(self.kind, self.value),
               "U": [str(a) for a in self.U], "V": [str(a) for a in self.V],
               "X": [str(a) for a in self.X], "Y": [str(a) for a in self.Y]}
        return out


def _value_dict(kind: str, value) -> dict:
    if kind == "interval":
        return {"kind": kind, "lo": fraction_str(value.lo), "hi": fraction_str(value.hi),
                "decimal": decimal_str(value.mid)}
    out = {"kind": kind, "decimal": decimal_str(value)}
    if kind == "rational":
        out["exact"] = fraction_str(value)
    return out


def _vsub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def phase_values(chain: DeltaChain, walker: ChainWalker, budget: Budget = Budget()) -> list:
    """Limit of ``j_k/i_k`` along each residue class of the chain modulo its period."""
    p = chain.period
    Ap = mat_pow(walker.A, p)
    width = walker.h.uniform_width
    primitive = primitivity_check(walker.A)
    out = []
    for phase in range(p):
        k0 = chain.preperiod + phase
        b0, b1 = chain.blocks[k0], chain.blocks[k0 + p]
        U = walker.parikh_block(b0.i, b0.j)
        V = walker.stream.prefix_parikh(b0.i)
        U1 = walker.parikh_block(b1.i, b1.j)
        V1 = walker.stream.prefix_parikh(b1.i)
        Y = _vsub(U1, mat_vec(Ap, U))
        X = _vsub(V1, mat_vec(Ap, V))
        if width is not None and width >= 2:
            val = exact_limsup_uniform(width**p, sum(U), sum(V), sum(Y), sum(X))
            out.append(PhaseValue(phase, "uniform-closed-form", "rational", val, U, V, X, Y))
        elif primitive:
            val = exact_limit_primitive(Ap, U, V, X, Y, budget.tol)
            out.append(PhaseValue(phase, "primitive-eigen", "interval", val, U, V, X, Y))
        else:
            steps = max(1, budget.eval_steps // p)
            val = chain_ratio(Ap, U, V, X, Y, steps)
            out.append(PhaseValue(phase, "empirical", "estimate", val, U, V, X, Y))
    return out


# ---------------------------------------------------------------------------
# reports


@dataclass
class LimsupReport:
    kind: str  # rational | interval | estimate
    value: object
    method: str
    degree_bound: int
    classification: str
    chains: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    exponent: int = 1  # power e of the normalised morphism

    def to_dict(self) -> dict:
        return {"value": _value_dict(self.kind, self.value), "method": self.method,
                "degree_bound": self.degree_bound, "classification": self.classification,
                "normalization_power": self.exponent, "chains": self.chains, "notes": self.notes}

    @property
    def numeric(self) -> Fraction:
        return self.value.mid if isinstance(self.value, Interval) else self.value


_CLASSIFICATION = {"rational": "rational", "interval": "algebraic-deg<=n", "estimate": "estimate-only"}


def _finite_prefix_end(spec: MorphicSpec, delta_p: frozenset) -> int:
    """A prefix length beyond which no letter of ``Δ'`` occurs."""
    h = spec.morphism
    x = _tail_word(spec)
    b = bool_matrix(incidence_matrix(h))
    t, c, powers = bool_power_cycle(b)
    # alph(h^k(x)) for k >= t is periodic; find the last k < t + c with a Δ' letter
    last = 0 if set(x) & delta_p else -1
    for k in range(1, t + c):
        alph = {i for j in set(x) for i in range(h.size) if powers[k - 1][i][j]}
        if alph & delta_p:
            last = k
    # w = h^K(a) x' ... with h^(K+1)(a) = a x h(x) .. h^K(x)
    return len(h.iterate((spec.seed,), last + 2))


def limsup_delta(spec: MorphicSpec, delta: Iterable[int], budget: Budget = Budget()) -> LimsupReport:
    """``limsup j_k/i_k`` over the maximal Δ-blocks of the (coded) fixed point.

    ``delta`` is a set of output-alphabet letters; it is pulled back through
    the coding.  Returns an exact rational for uniform morphisms, ``1`` with
    method ``bounded`` when blocks are bounded, and an exact-recurrence
    estimate when the morphism is neither uniform nor primitive.
    """
    validate_spec(spec)
    delta_p = pulled_back_delta(spec, delta)
    n = spec.alphabet.size
    rec = check_no_terminal_block(spec, delta_p)
    if not rec & delta_p:
        end = _finite_prefix_end(spec, delta_p)
        stats = ratio_stats(scan_delta_blocks(word_stream(spec), delta, until=end + 1, horizon=budget.horizon))
        value = stats.max_ratio if stats.max_ratio is not None else Fraction(0)
        return LimsupReport("rational", value, "finite", n, "rational",
                            notes=[f"finitely many blocks ({stats.count}), all before position {end}"])
    if primitivity_check(incidence_matrix(spec.morphism)):
        return LimsupReport("rational", Fraction(1), "bounded", n, "rational",
                            notes=["primitive morphism: uniformly recurrent word, blocks bounded"])

    norm, e = normalize_spec(spec)
    walker = ChainWalker(norm, delta_p)
    blocks = list(scan_delta_blocks(walker.stream, delta_p, until=budget.prefix, horizon=budget.horizon))
    chains = link_blocks(norm, blocks, delta_p, walker)
    if not chains:
        if unbounded_certificate(norm, delta_p) is not None:
            raise HorizonExceeded(f"blocks are unbounded but no chain root lies in the first {budget.prefix} letters")
        return LimsupReport("rational", Fraction(1), "bounded", n, "rational", exponent=e,
                            notes=[f"no block longer than {walker.M ** 2} past position {walker.M} "
                                   f"in the first {budget.prefix} letters (scan evidence)"])
    best = None
    chain_dicts = []
    render = norm.alphabet.render
    for chain in chains:
        analyze_stretches(chain, walker, budget.max_preperiod, budget.max_period)
        phases = phase_values(chain, walker, budget)
        top = max(phases, key=lambda pv: pv.key)
        chain_dicts.append({
            "root": chain.root.to_dict(), "signature": render(chain.signature.letters, concat=True),
            "preperiod": chain.preperiod, "period": chain.period,
            "stretches": [s.to_dict(lambda w: render(w, concat=True)) for s in chain.stretches[: chain.preperiod + chain.period]],
            "phases": [pv.to_dict() for pv in phases], "value": _value_dict(top.kind, top.value),
        })
        if best is None or top.key > best.key:
            best = top
    if best.key < 1:  # blocks keep coming, so limsup >= 1
        return LimsupReport("rational", Fraction(1), "bounded", n, "rational", chain_dicts, exponent=e)
    return LimsupReport(best.kind, best.value, best.method, n, _CLASSIFICATION[best.kind], chain_dicts, exponent=e)


def limsup_x(spec_or_stream, x: Sequence[int], budget: Budget = Budget()) -> LimsupReport:
    """limsup over maximal x-blocks, as the max over the ``d`` phases.

    For ``|x| = 1`` on a morphic word this is the Δ-block problem with
    ``Δ = {x}`` and is answered exactly; otherwise each phase gets an
    empirical tail estimate over ``budget.prefix`` letters.
    """
    pattern = XBlockPattern(tuple(x))
    if isinstance(spec_or_stream, MorphicSpec) and pattern.d == 1:
        return limsup_delta(spec_or_stream, {pattern.x[0]}, budget)
    stream = word_stream(spec_or_stream) if isinstance(spec_or_stream, MorphicSpec) else spec_or_stream
    until = budget.prefix if stream.length is None else stream.length
    blocks = list(scan_x_blocks(stream, pattern, until=until, horizon=budget.horizon))
    parts = phase_partition(blocks, pattern)
    per_phase = []
    best = None
    for m, part in enumerate(parts):
        st = ratio_stats(part, budget.window)
        per_phase.append({"phase": m, "count": st.count, **st.to_dict()})
        if st.tail_estimate is not None and (best is None or st.tail_estimate > best):
            best = st.tail_estimate
    overall = ratio_stats(blocks, budget.window)
    notes = []
    if overall.max_ratio is not None:
        notes.append(f"max ratio over the prefix {fraction_str(overall.max_ratio)}")
    if best is None:
        best = Fraction(0)
        notes.append("no x-block with positive start in the prefix")
    return LimsupReport("estimate", best, "empirical", stream.alphabet.size, "estimate-only",
                        chains=per_phase, notes=notes)
