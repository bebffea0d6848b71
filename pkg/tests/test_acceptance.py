"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or directly as a script.
"""

import math
import random
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from treepredict.alphabet import SourceSpec, sample_sequence
from treepredict.coder import decode, encode, ideal_code_length
from treepredict.escape import EscapePredictor, theorem2_check
from treepredict.estimators import KRICHEVSKY, LAPLACE, LOG2E
from treepredict.prefix_code import (EliasGammaCode, LazyCodeTreePredictor, PaddedUnaryCode,
                                     UnaryCode, expected_codeword_length, theorem3_decay)
from treepredict.redundancy import average_redundancy, inverse_count_mean, worst_case_sweep
from treepredict.tree import build_flat, build_from_partition, six_letter_tree, theorem1_bound

F = Fraction
SHORT = [0, 2, 0, 0]
NINE = [2, 0, 4, 4, 1, 4, 3, 1, 2]


@pytest.fixture
def verdict(capsys):
    start = time.perf_counter()

    def report(n, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {n:>2}: {detail}  ({time.perf_counter() - start:.2f}s)"
        with capsys.disabled():
            print("\n" + line)
        assert ok, line
    return report


def test_c01_flat_short_history(verdict):
    tree = build_flat(3).update_many(SHORT)
    exact = tree.distribution(exact=True)
    floats = tree.distribution()
    want = [F(4, 7), F(1, 7), F(2, 7)]
    ok = exact == want and np.allclose(floats, [float(w) for w in want], atol=1e-12, rtol=0)
    verdict(1, ok, f"flat tree after 0 2 0 0 -> {[str(x) for x in exact]}")


def test_c02_partition_short_history(verdict):
    tree = build_from_partition([[0, 1], [2]]).update_many(SHORT)
    exact = tree.distribution(exact=True)
    verdict(2, exact == [F(8, 15), F(2, 15), F(1, 3)],
            f"groups {{0,1}},{{2}} -> {[str(x) for x in exact]}")


def test_c03_six_letter_tree(verdict):
    tree = six_letter_tree().update_many(NINE)
    exact = tree.distribution(exact=True)
    want = [F(4, 12) * F(2, 6), F(3, 12), F(4, 12) * F(3, 6),
            F(5, 12) * F(2, 6), F(5, 12) * F(4, 6), F(4, 12) * F(1, 6)]
    verdict(3, exact == want and sum(exact) == 1,
            f"{[str(x) for x in exact]}, sum {sum(exact)}")


def test_c04_flat_equals_laplace(verdict):
    rng = random.Random(2024)
    bad = 0
    cases = 1000
    for _ in range(cases):
        n = rng.randint(2, 8)
        t = rng.randint(0, 50)
        hist = [rng.randrange(n) for _ in range(t)]
        tree = build_flat(n).update_many(hist)
        bad += any(tree.predict(a, exact=True) != F(hist.count(a) + 1, t + n) for a in range(n))
    verdict(4, bad == 0, f"{cases} random histories, {bad} mismatches")


def test_c05_laplace_bound(verdict):
    est = average_redundancy(build_flat(4), SourceSpec.uniform(4), 100, trials=10**5, seed=5)
    bound = 3 * LOG2E / 101
    verdict(5, est.mean <= bound + 3 * est.stderr,
            f"r^100 = {est.mean:.6f} +- {est.stderr:.2g} vs {bound:.6f}")


def test_c06_tree_bound_monte_carlo(verdict):
    src = SourceSpec.uniform(6)
    bound = theorem1_bound(six_letter_tree(), src, 9)
    est = average_redundancy(six_letter_tree(), src, 9, trials=10**5, seed=6, exact=False)
    ok = abs(bound - 0.72135) < 5e-6 and est.mean <= 0.72135 + 3 * est.stderr
    verdict(6, ok, f"r^9 = {est.mean:.5f} +- {est.stderr:.2g} vs bound {bound:.5f}")


def test_c07_inverse_count(verdict):
    cells = []
    ok = True
    for mass in (0.05, 0.3, 0.7):
        for t in (3, 10, 100):
            est = inverse_count_mean(mass, t, trials=10**5, seed=int(1000 * mass) + t)
            cap = min(mass, 1 / (t + 1))
            ok &= est.mean <= cap + 3 * est.stderr
            cells.append(f"{est.mean / cap:.3f}")
    verdict(7, ok, f"mean/min(p,1/(t+1)) over 9 cells: {' '.join(cells)}")


def test_c08_escape_three_letters(verdict):
    src = SourceSpec.finite([1 / 3] * 3)
    rep = theorem2_check(src, 100, [2000], trials=10**4, seed=8)
    row = rep.rows[0]
    tr = row.t * row.r_t
    verdict(8, tr <= 3 * 1.25, f"t*r^t = {tr:.4f} +- {row.t * row.stderr:.2g} (limit 3, cap 3.75)")


KT_GRID = [0.5, 0.3, 0.1, 0.01, 0.001, 1e-6]


def test_c09_krichevsky_asymptote(verdict):
    t = 10**4
    grid = [SourceSpec.finite([p, 1 - p]) for p in KT_GRID]
    res = worst_case_sweep(build_flat(2, KRICHEVSKY), grid, t, trials=10**4, seed=9)
    val = 2 * t * res.max_estimate.mean
    ok = 0.75 * LOG2E <= val <= 1.25 * LOG2E
    verdict(9, ok, f"max 2t*r^t = {val:.4f} at p={KT_GRID[res.argmax]} "
                   f"({val / LOG2E:.3f} log2 e)")


def test_c10_code_tree_decay(verdict):
    rep = theorem3_decay(SourceSpec.geometric(0.5), UnaryCode(), LAPLACE,
                         [10, 100, 1000], trials=10**4, seed=10)
    r = [row.r_t for row in rep.rows]
    se = [row.stderr for row in rep.rows]
    separated = all(r[i] - 3 * se[i] > r[i + 1] + 3 * se[i + 1] for i in range(2))
    ok = r[0] > r[1] > r[2] and separated and r[2] < r[0] / 2
    verdict(10, ok, "r^t at 10/100/1000 = " + ", ".join(f"{a:.5f}+-{b:.1g}" for a, b in zip(r, se)))


def test_c11_expected_length(verdict):
    rep = expected_codeword_length(UnaryCode(), SourceSpec.geometric(0.5), tail_eps=1e-9)
    div = expected_codeword_length(PaddedUnaryCode(lambda a: 2 ** (a + 1)), SourceSpec.geometric(0.5))
    ok = (not rep.divergent and rep.remainder <= 1e-9
          and abs(rep.mean - 2) <= 1e-9 + rep.remainder and div.divergent)
    verdict(11, ok, f"unary mean {rep.mean:.12f} (remainder {rep.remainder:.2g}); "
                    f"doubling code divergent={div.divergent}")


def _family_case(rng, family):
    est = rng.choice([LAPLACE, KRICHEVSKY])
    t = rng.randint(0, 80)
    if family == 0:
        n = rng.randint(2, 16)
        return build_flat(n, est), [rng.randrange(n) for _ in range(t)]
    if family == 1:
        n = rng.randint(2, 16)
        letters = list(range(n))
        rng.shuffle(letters)
        cuts = sorted(rng.sample(range(1, n), min(n - 1, rng.randint(1, 3))))
        groups = [letters[i:j] for i, j in zip([0] + cuts, cuts + [n])]
        return build_from_partition(groups, est), [rng.randrange(n) for _ in range(t)]
    if family == 2:
        n = rng.randint(1, 1000)
        used = rng.sample(range(n), min(n, rng.randint(1, 10)))
        return EscapePredictor(n, est), [rng.choice(used) for _ in range(t)]
    code = rng.choice([UnaryCode(), EliasGammaCode()])
    return LazyCodeTreePredictor(code, est), [min(int(rng.expovariate(0.15)), 200) for _ in range(t)]


def test_c12_coder(verdict):
    rng = random.Random(12)
    fails = 0
    worst = -math.inf
    least = math.inf
    for i in range(1000):
        pred, seq = _family_case(rng, i % 4)
        data = encode(seq, pred).to_bytes()
        stream_ok = decode(data) == seq
        s = encode(seq, pred)
        gap = s.payload_bits - ideal_code_length(seq, pred)
        worst, least = max(worst, gap), min(least, gap)
        fails += not (stream_ok and -1e-9 <= gap <= 2)
    seq = sample_sequence(SourceSpec.uniform(4), 10**4, seed=12)
    rate = encode(seq, build_flat(4)).payload_bits / 10**4
    verdict(12, fails == 0 and rate <= 2.01,
            f"1000 round trips, {fails} failures, gap in [{least:.3f}, {worst:.3f}]; "
            f"uniform |A|=4: {rate:.4f} bits/symbol")


def _exact_configs():
    rng = random.Random(13)
    shapes = [(2, t) for t in (1, 3, 6, 9, 12)] + [(3, 7), (4, 6), (6, 4), (8, 4), (16, 3), (64, 2)]
    for n, t in shapes:
        w = np.array([rng.random() + 0.05 for _ in range(n)])
        src = SourceSpec.finite(w / w.sum())
        letters = list(range(n))
        rng.shuffle(letters)
        half = max(1, n // 2)
        yield f"flat n={n} t={t}", build_flat(n), src, t
        if n > 2:
            yield f"partition n={n} t={t}", build_from_partition([letters[:half], letters[half:]]), src, t
        yield f"escape n={n} t={t}", EscapePredictor(n, KRICHEVSKY), src, t
        yield f"code-tree n={n} t={t}", LazyCodeTreePredictor(EliasGammaCode()), src, t


def test_c13_exact_vs_monte_carlo(verdict):
    worst = 0.0
    fails = []
    count = 0
    for name, pred, src, t in _exact_configs():
        assert len(src.probs) ** t <= 4096
        exact = average_redundancy(pred, src, t, exact=True)
        mc = average_redundancy(pred, src, t, trials=10**4, seed=13, exact=False)
        z = abs(mc.mean - exact.mean) / mc.stderr if mc.stderr > 0 else 0.0
        worst = max(worst, z)
        count += 1
        if z > 4:
            fails.append(name)
    verdict(13, not fails, f"{count} configs, largest |MC - exact| = {worst:.2f} stderr"
                           + (f"; failing: {fails}" if fails else ""))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
