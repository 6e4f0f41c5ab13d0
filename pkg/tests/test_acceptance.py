"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line in ``RESULTS``; ``conftest.py`` prints
them after the run (they also go to stdout when run with ``-s``).
"""

import json
import math
import random
import time
from fractions import Fraction

import pytest

from conftest import naive_prefix, random_spec
from morphic_blocks.blocks import naive_delta_blocks, ratio_stats, scan_delta_blocks
from morphic_blocks.cli import main
from morphic_blocks.constructions import perron_spec, rational_member, rational_word
from morphic_blocks.diophantine import (
    DigitExpansion,
    continued_fraction,
    mu_estimate,
    powers_of,
    take,
    truncate_value,
    v_b_estimate,
    xi_from_indices,
)
from morphic_blocks.linalg import (
    bool_matrix,
    bool_mul,
    bool_pow,
    bool_stabilize,
    dominant_eigen_interval,
    incidence_matrix,
    mat_pow,
    mat_vec,
    parikh,
    poly_eval,
    primitivity_check,
)
from morphic_blocks.sequences import (
    ChainWalker,
    chain_ratio,
    exact_limit_primitive,
    limsup_delta,
    link_blocks,
    normalize_spec,
    pulled_back_delta,
)
from morphic_blocks.words import FixedPointStream, make_spec, morphism_power, word_stream

RESULTS = {}


def record(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


@pytest.fixture
def p2():
    return make_spec({"a": "ab", "b": "bc", "c": "cc"}, "a", coding={"a": "0", "b": "1", "c": "0"})


def test_criterion_01_powers_of_two(p2):
    t0 = time.perf_counter()
    report = limsup_delta(p2, {0})
    stats = ratio_stats(scan_delta_blocks(word_stream(p2), {0}, until=10**6))
    elapsed = time.perf_counter() - t0
    ok = (report.kind == "rational" and report.value == 2 and report.method == "uniform-closed-form"
          and abs(stats.tail_estimate - 2) <= Fraction(1, 100) and elapsed <= 10)
    record(1, ok, f"exact={report.value} ({report.method}), tail={float(stats.tail_estimate):.6f}, {elapsed:.2f}s")


def test_criterion_02_fibonacci():
    fib = make_spec({"0": "01", "1": "0"}, "0")
    report = limsup_delta(fib, {0})
    longest = max(b.length for b in scan_delta_blocks(word_stream(fib), {0}, until=10**5))
    ok = report.value == 1 and report.method == "bounded" and longest <= 2
    record(2, ok, f"value={report.value} ({report.method}), longest 0-block={longest}")


def test_criterion_03_perron_mu_two():
    rep = perron_spec(2, count=26)
    r25 = rep.ratios[24]  # n_25 / n_24
    ok = (rep.ones[:6] == [1, 3, 6, 11, 20, 37] and abs(r25 - 2) <= Fraction(1, 100)
          and rep.class_c.status == "fails" and rep.class_c.first_violation == 2
          and rep.ratios[2] == Fraction(11, 6))
    record(3, ok, f"ones={rep.ones[:6]}, ratio at j=25={float(r25):.8f}, class C {rep.class_c.status} "
                  f"at j={rep.class_c.first_violation}")


def test_criterion_04_perron_mu_three():
    rep = perron_spec(3, count=16)
    r15 = rep.ratios[14]
    ok = (rep.matrix == ((2, 2), (1, 1)) and rep.lengths == [3**j for j in range(16)]
          and abs(r15 - 3) <= Fraction(1, 100))
    record(4, ok, f"|h^j(0)|=3^j for j<=15: {rep.lengths == [3**j for j in range(16)]}, "
                  f"ratio at j=15={float(r15):.8f}")


def test_criterion_05_golden_square():
    A = ((2, 1), (1, 1))
    iv = dominant_eigen_interval(A, Fraction(1, 10**9))
    root = (3 + math.sqrt(5)) / 2
    sign_change = poly_eval([1, -3, 1], iv.lo) < 0 < poly_eval([1, -3, 1], iv.hi)
    rep = perron_spec(A, count=13)
    r12 = rep.ratios[11]
    ok = (iv.width <= Fraction(1, 10**9) and sign_change and float(iv.lo) <= root <= float(iv.hi)
          and abs(float(r12) - 2.618034) <= 1e-2)
    record(5, ok, f"width={float(iv.width):.2e}, sign change={sign_change}, ratio at j=12={float(r12):.8f}")


def test_criterion_06_rational_construction():
    members = {m * 3**h for h in range(10) for m in range(3, 7)}
    predicate_ok = all(rational_member(n, 3, 2) == (n in members) for n in range(1, 10**4 + 1))
    rep = rational_word(3, 2, count=4 * 9 + 1)  # levels h = 0..8 plus the next one
    gaps = dict(zip(zip(rep.ones, rep.ones[1:]), rep.ratios))
    running = max(rep.ratios)
    at_27_18 = gaps.get((18, 27))
    vb = v_b_estimate(DigitExpansion(2, rep.stream), 10**5).value
    ok = (predicate_ok and at_27_18 == Fraction(3, 2) and running == Fraction(3, 2)
          and abs(vb - Fraction(1, 2)) <= Fraction(5, 100))
    record(6, ok, f"predicate ok={predicate_ok}, 27/18 gap={at_27_18}, max through h=8={running}, "
                  f"v_b~{float(vb):.5f}")


def test_criterion_07_worked_example(capsys):
    code = main(["blocks", "--raw", "0100111010101000", "--x", "01"])
    doc = json.loads(capsys.readouterr().out)
    got = [(b["i"], b["j"]) for b in doc["blocks"]]
    record(7, code == 0 and got == [(0, 2), (3, 4), (6, 13)], f"blocks={got}")


def test_criterion_08_oracle_equivalence():
    rng = random.Random(8)
    mismatches = 0
    for _ in range(50):
        spec = random_spec(rng)
        n = spec.alphabet.size
        delta = set(rng.sample(range(n), rng.randint(1, n - 1)))
        s = FixedPointStream(spec)
        letters = s.prefix(10**4)
        if list(scan_delta_blocks(s, delta, until=10**4)) != naive_delta_blocks(letters, delta):
            mismatches += 1
        word, h = (spec.seed,), spec.morphism
        while len(h(word)) <= 10**5 and len(h(word)) > len(word):
            word = h(word)
        if s.prefix(len(word)) != word or naive_prefix(spec, len(word)) != word:
            mismatches += 1
    record(8, mismatches == 0, f"50 random specs, mismatches={mismatches}")


def test_criterion_09_linear_algebra():
    rng = random.Random(9)
    failures = 0
    for _ in range(500):
        h = random_spec(rng).morphism
        u = [rng.randrange(h.size) for _ in range(rng.randint(0, 12))]
        if parikh(h(u), h.size) != mat_vec(incidence_matrix(h), parikh(u, h.size)):
            failures += 1
    for _ in range(30):
        h = random_spec(rng).morphism
        A = incidence_matrix(h)
        failures += sum(incidence_matrix(morphism_power(h, t)) != mat_pow(A, t) for t in range(1, 7))
    for _ in range(100):
        spec = random_spec(rng)
        b = bool_matrix(incidence_matrix(spec.morphism))
        e = bool_stabilize(b)
        be = bool_pow(b, e)
        g = morphism_power(spec.morphism, e)
        if bool_mul(be, be) != be or set(g.iterate((spec.seed,), 2)) != set(g((spec.seed,))):
            failures += 1
    record(9, failures == 0, f"failures={failures}")


def test_criterion_10_chain_structure(p2):
    norm, _ = normalize_spec(p2)
    dp = pulled_back_delta(p2, {0})
    walker = ChainWalker(norm, dp)
    s, M, A = walker.stream, walker.M, walker.A
    blocks = list(scan_delta_blocks(s, dp, until=20_000))
    root = link_blocks(norm, blocks, dp, walker)[0].root
    chain = [(root.i, root.j)]
    sandwich_ok = True
    for _ in range(10):
        i, j = chain[-1]
        i2, j2 = walker.successor(i, j)
        inner = (s.image_start(i + M), s.image_start(j - M + 1) - 1)
        outer = (s.image_start(i - M + 1), s.image_start(j + M) - 1)
        sandwich_ok &= outer[0] <= i2 <= inner[0] and inner[1] <= j2 <= outer[1]
        chain.append((i2, j2))
    U = [walker.parikh_block(i, j) for i, j in chain]
    V = [s.prefix_parikh(i) for i, _ in chain]
    Y = tuple(a - b for a, b in zip(U[1], mat_vec(A, U[0])))
    X = tuple(a - b for a, b in zip(V[1], mat_vec(A, V[0])))
    recur_ok = all(U[k + 1] == tuple(a + y for a, y in zip(mat_vec(A, U[k]), Y))
                   and V[k + 1] == tuple(a + x for a, x in zip(mat_vec(A, V[k]), X)) for k in range(10))
    exact_ok = all(chain_ratio(A, U[0], V[0], X, Y, k) == Fraction(j, i) for k, (i, j) in enumerate(chain))
    limit = limsup_delta(p2, {0}).value
    gap = abs(chain_ratio(A, U[0], V[0], X, Y, 30) - limit)
    ok = sandwich_ok and recur_ok and exact_ok and gap <= Fraction(1, 10**9)
    record(10, ok, f"sandwich={sandwich_ok}, recurrences={recur_ok and exact_ok}, |F(30)-{limit}|={float(gap):.2e}")


def test_criterion_11_primitive_limit_vs_recurrence():
    rng = random.Random(11)
    contained, total, worst = 0, 0, Fraction(0)
    for small in (False, True):
        for _ in range(20):
            n = rng.randint(1, 4)
            while True:
                A = tuple(tuple(rng.randint(0, 3) for _ in range(n)) for _ in range(n))
                if primitivity_check(A) and dominant_eigen_interval(A, Fraction(1, 10**6)).lo > 1:
                    break
            U = [rng.randint(0, 5) for _ in range(n)]
            V = [rng.randint(1, 5) for _ in range(n)]
            X = [rng.randint(0, 3) if small else 0 for _ in range(n)]
            Y = [rng.randint(0, 3) if small else 0 for _ in range(n)]
            iv = exact_limit_primitive(A, U, V, X, Y, Fraction(1, 10**12))
            f40 = chain_ratio(A, U, V, X, Y, 40)
            total += 1
            contained += iv.contains(f40)
            worst = max(worst, abs(f40 - iv.mid))
    record(11, contained == total, f"{contained}/{total} intervals contain F(40); "
                                   f"max |F(40)-limit|={float(worst):.2e}")


def test_criterion_12_diophantine():
    exp = xi_from_indices(2, powers_of(2))
    trunc = truncate_value(exp, 4)
    cf = list(continued_fraction(trunc).quotients)
    vb = v_b_estimate(exp, 10**5).value
    mu = mu_estimate(take(powers_of(2), 40))
    gap = abs(1 + vb - mu.value)
    ok = (trunc == Fraction(209, 256) and cf == [0, 1, 4, 2, 4, 5] and abs(vb - 1) <= Fraction(5, 100)
          and mu.value == 2 and all(r == 2 for r in mu.ratios) and gap <= Fraction(5, 100))
    record(12, ok, f"trunc={trunc}, cf={cf}, v_b~{float(vb):.6f}, mu={mu.value}, |1+v_b-mu|={float(gap):.2e}")
