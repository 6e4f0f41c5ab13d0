"""Exact integer linear algebra for incidence matrices.

Matrices are tuples of row tuples of Python ints; nothing here touches
floating point.  Eigen quantities come back as rational :class:`Interval`
enclosures whose endpoints are certified by exact arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import NonPrimitive, PrecisionExhausted
from .words import Morphism

DEFAULT_TOL = Fraction(1, 10**12)
DEFAULT_MAX_ITER = 10_000


def fraction_str(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def decimal_str(x, digits: int = 12) -> str:
    """Render a rational to ``digits`` significant digits without going
    through float (values may exceed float range)."""
    x = Fraction(x)
    if x == 0:
        return "0"
    sign = "-" if x < 0 else ""
    x = abs(x)
    exp = len(str(x.numerator // x.denominator)) if x >= 1 else -_leading_zeros(x)
    scaled = x * Fraction(10) ** (digits - exp)
    mant = round(scaled)
    if len(str(mant)) > digits:
        exp += 1
        mant = round(x * Fraction(10) ** (digits - exp))
    s = str(mant).rjust(digits, "0")
    if exp <= 0:
        out = "0." + "0" * (-exp) + s
    elif exp >= digits:
        out = s + "0" * (exp - digits)
    else:
        out = s[:exp] + "." + s[exp:]
    if "." in out:
        out = out.rstrip("0").rstrip(".")
    return sign + out


def _leading_zeros(x: Fraction) -> int:
    n = 0
    while x * 10 < 1:
        x *= 10
        n += 1
    return n


@dataclass(frozen=True)
class Interval:
    """Closed rational interval ``[lo, hi]`` with the usual arithmetic."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x) -> "Interval":
        return cls(Fraction(x), Fraction(x))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi

    def __add__(self, other):
        other = _as_interval(other)
        return Interval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-_as_interval(other))

    def __rsub__(self, other):
        return _as_interval(other) - self

    def __mul__(self, other):
        other = _as_interval(other)
        prods = [a * b for a in (self.lo, self.hi) for b in (other.lo, other.hi)]
        return Interval(min(prods), max(prods))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_interval(other)
        if other.lo <= 0 <= other.hi:
            raise ZeroDivisionError(f"division by an interval containing 0: [{other.lo}, {other.hi}]")
        return self * Interval(1 / other.hi, 1 / other.lo)

    def __rtruediv__(self, other):
        return _as_interval(other) / self

    def to_dict(self) -> dict:
        return {"lo": fraction_str(self.lo), "hi": fraction_str(self.hi)}


def _as_interval(x) -> Interval:
    return x if isinstance(x, Interval) else Interval.point(x)


# name used for the dominant eigenvalue enclosure
EigenInterval = Interval


# ---------------------------------------------------------------------------
# plain integer matrices


def identity(n: int) -> tuple:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def mat_mul(a, b) -> tuple:
    bt = list(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def mat_vec(a, v) -> tuple:
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def vec_mat(v, a) -> tuple:
    return tuple(sum(x * row[j] for x, row in zip(v, a)) for j in range(len(a[0])))


def mat_add(a, b) -> tuple:
    return tuple(tuple(x + y for x, y in zip(r, s)) for r, s in zip(a, b))


def mat_pow(a, k: int) -> tuple:
    result = identity(len(a))
    base = a
    while k:
        if k & 1:
            result = mat_mul(result, base)
        k >>= 1
        if k:
            base = mat_mul(base, base)
    return result


def geometric_sum(a, k: int) -> tuple:
    """``sum_{l<k} a^l``."""
    n = len(a)
    total = tuple((0,) * n for _ in range(n))
    power = identity(n)
    for _ in range(k):
        total = mat_add(total, power)
        power = mat_mul(power, a)
    return total


def parikh(word: Iterable[int], n: int) -> tuple:
    counts = [0] * n
    for c in word:
        counts[c] += 1
    return tuple(counts)


def incidence_matrix(h: Morphism) -> tuple:
    """``a[i][j] = |h(j)|_i``: column ``j`` is the Parikh vector of ``h(j)``."""
    n = h.size
    cols = [parikh(r, n) for r in h.rules]
    return tuple(tuple(cols[j][i] for j in range(n)) for i in range(n))


def matrix_to_json(a) -> list:
    return [[str(x) for x in row] for row in a]


def matrix_from_json(rows) -> tuple:
    return tuple(tuple(int(x) for x in row) for row in rows)


# ---------------------------------------------------------------------------
# boolean matrices


def bool_matrix(a) -> tuple:
    return tuple(tuple(x > 0 for x in row) for row in a)


def bool_mul(a, b) -> tuple:
    bt = list(zip(*b))
    return tuple(tuple(any(x and y for x, y in zip(row, col)) for col in bt) for row in a)


def bool_pow(a, k: int) -> tuple:
    result = tuple(tuple(i == j for j in range(len(a))) for i in range(len(a)))
    for _ in range(k):
        result = bool_mul(result, a)
    return result


def bool_power_cycle(b) -> tuple:
    """Return ``(t, c, powers)`` with ``B^t = B^(t+c)``, ``t >= 1`` minimal;
    ``powers[k-1] = B^k`` for ``k = 1 .. t+c-1``."""
    seen = {}
    powers = []
    current = b
    k = 1
    while current not in seen:
        seen[current] = k
        powers.append(current)
        current = bool_mul(current, b)
        k += 1
    t = seen[current]
    return t, k - t, powers


def bool_stabilize(b) -> int:
    """Exponent ``e`` such that ``(B^e)^n = B^e`` for all ``n >= 1``.

    Finds ``B^t = B^(t+c)`` by storing powers, then takes the first
    ``e = t + k`` (``0 <= k < c``) divisible by ``c``.
    """
    t, c, _ = bool_power_cycle(b)
    for k in range(c):
        if (t + k) % c == 0:
            return t + k
    raise AssertionError("unreachable: some k in 0..c-1 makes t+k divisible by c")


def eventual_letters(h: Morphism, word: Sequence[int]) -> frozenset:
    """Letters occurring in ``h^k(word)`` for infinitely many ``k``."""
    if not word:
        return frozenset()
    b = bool_matrix(incidence_matrix(h))
    t, c, powers = bool_power_cycle(b)
    out = set()
    for p in powers[t - 1 : t - 1 + c]:
        for j in set(word):
            out.update(i for i in range(h.size) if p[i][j])
    return frozenset(out)


def growing_letters(h: Morphism) -> frozenset:
    """Letters ``a`` with ``|h^k(a)|`` unbounded.

    ``|h^(k+1)(a)| - |h^k(a)|`` counts letters of ``h^k(a)`` whose rule has
    length >= 2, so ``a`` grows iff such a letter shows up in ``h^k(a)`` for
    infinitely many ``k``; the boolean power cycle decides that exactly.
    """
    long_rules = {d for d, r in enumerate(h.rules) if len(r) >= 2}
    return frozenset(a for a in range(h.size) if eventual_letters(h, (a,)) & long_rules)


def primitivity_check(a) -> bool:
    n = len(a)
    b = bool_matrix(a)
    power = b
    for _ in range((n - 1) ** 2 + 1):
        if all(all(row) for row in power):
            return True
        power = bool_mul(power, b)
    return False


# ---------------------------------------------------------------------------
# characteristic polynomial and spectral radius


def char_poly(a) -> list:
    """Coefficients of ``det(xI - A)``, highest degree first (Faddeev-LeVerrier;
    every division is exact over the integers)."""
    n = len(a)
    coeffs = [0] * (n + 1)
    coeffs[n] = 1
    m = tuple((0,) * n for _ in range(n))
    eye = identity(n)
    for k in range(1, n + 1):
        m = mat_add(mat_mul(a, m), tuple(tuple(coeffs[n - k + 1] * x for x in row) for row in eye))
        am = mat_mul(a, m)
        trace = sum(am[i][i] for i in range(n))
        assert trace % k == 0
        coeffs[n - k] = -trace // k
    return coeffs[::-1]


def poly_eval(coeffs: Sequence[int], x):
    acc = 0
    for c in coeffs:
        acc = acc * x + c
    return acc


def strongly_connected_components(a) -> list:
    """SCCs of the digraph ``i -> j`` iff ``a[i][j] > 0`` (iterative Tarjan)."""
    n = len(a)
    index = {}
    low = {}
    on_stack = set()
    stack = []
    comps = []
    counter = 0
    for root in range(n):
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            v, pos = work.pop()
            if pos == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack.add(v)
            recurse = False
            for w in range(pos, n):
                if not a[v][w]:
                    continue
                if w not in index:
                    work.append((v, w + 1))
                    work.append((w, 0))
                    recurse = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return comps


def _submatrix(a, idx) -> tuple:
    return tuple(tuple(a[i][j] for j in idx) for i in idx)


def _collatz_wielandt(a, v) -> tuple:
    av = mat_vec(a, v)
    ratios = [Fraction(x, y) for x, y in zip(av, v)]
    return min(ratios), max(ratios)


def _irreducible_radius(a, tol: Fraction, max_iter: int) -> Interval:
    n = len(a)
    if n == 1:
        return Interval.point(a[0][0])
    # (A + I)^8 shares the Perron vector of A and is primitive when A is irreducible
    step = mat_pow(mat_add(a, identity(n)), 8)
    precision = max(64, (1 / tol).__ceil__().bit_length() + 48)
    v = (1,) * n
    lo, hi = _collatz_wielandt(a, v)
    for _ in range(max_iter):
        if hi - lo <= tol:
            return Interval(lo, hi)
        w = mat_vec(step, v)
        shift = max(w).bit_length() - precision
        v = tuple(((x - 1) >> shift) + 1 for x in w) if shift > 0 else w
        l, h = _collatz_wielandt(a, v)
        lo, hi = max(lo, l), min(hi, h)
    if hi - lo <= tol:
        return Interval(lo, hi)
    raise PrecisionExhausted(f"spectral radius bracket still {float(hi - lo):.3g} wide after {max_iter} iterations")


def dominant_eigen_interval(a, tol=DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> Interval:
    """Interval of width <= ``tol`` containing the spectral radius of a
    nonnegative matrix.

    Each irreducible diagonal block is bracketed by Collatz-Wielandt quotients
    ``min/max (Av)_i / v_i`` over positive integer vectors ``v`` produced by a
    rounded power iteration; any positive ``v`` gives valid bounds, so rounding
    never costs correctness.  The radius of the whole matrix is the maximum
    over its strongly connected components.
    """
    tol = Fraction(tol)
    best = None
    for comp in strongly_connected_components(a):
        sub = _submatrix(a, comp)
        if len(comp) == 1 and sub[0][0] == 0:
            enc = Interval.point(0)
        else:
            enc = _irreducible_radius(sub, tol, max_iter)
        if best is None:
            best = enc
        else:
            best = Interval(max(best.lo, enc.lo), max(best.hi, enc.hi))
    return best


@dataclass(frozen=True)
class LeftEigenvector:
    """Dominant left eigenvector normalised to sum 1.

    ``bounds[j]`` certifies component ``j``; ``vector`` is the midpoint
    estimate renormalised to sum exactly 1.
    """

    vector: tuple
    bounds: tuple
    eigenvalue: Interval

    @property
    def width(self) -> Fraction:
        return max(b.width for b in self.bounds)


def left_eigenvector(a, tol=DEFAULT_TOL, max_squarings: int = 40) -> LeftEigenvector:
    """Certified dominant left eigenvector of a primitive matrix.

    For ``l A = r l`` with ``l >= 0`` we have ``l = l A^k / r^k``, so the
    normalised ``l`` is a convex combination of the normalised rows of
    ``A^k``; componentwise min/max over those rows bracket it.  ``k`` doubles
    until the brackets are ``tol`` tight.
    """
    tol = Fraction(tol)
    if not primitivity_check(a):
        raise NonPrimitive("left eigenvector requested for a non-primitive matrix")
    n = len(a)
    power = a
    for _ in range(max_squarings + 1):
        rows = [[Fraction(x, sum(row)) for x in row] for row in power]
        bounds = tuple(Interval(min(r[j] for r in rows), max(r[j] for r in rows)) for j in range(n))
        if max(b.width for b in bounds) <= tol:
            mids = [b.mid for b in bounds]
            total = sum(mids)
            vector = tuple(m / total for m in mids)
            return LeftEigenvector(vector, bounds, dominant_eigen_interval(a, tol))
        power = mat_mul(power, power)
    raise PrecisionExhausted(f"left eigenvector not {tol} tight after 2^{max_squarings} powers")
