import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from treepredict.alphabet import SourceSpec
from treepredict.escape import EscapePredictor
from treepredict.estimators import KRICHEVSKY, LOG2E
from treepredict.prefix_code import LazyCodeTreePredictor, UnaryCode
from treepredict.redundancy import (CSV_COLUMNS, DivergenceError, average_redundancy,
                                    chi_square_bound, cumulative_redundancy, divergence_step,
                                    redundancy_table, running_average, tail_remainder,
                                    worst_case_sweep)
from treepredict.tree import build_flat, build_from_partition, six_letter_tree


def test_divergence_identity():
    assert divergence_step([0.2, 0.8], [0.2, 0.8]) == 0.0


def test_divergence_binary_example():
    assert divergence_step([0.5, 0.5], [0.25, 0.75]) == pytest.approx(
        0.5 + 0.5 * math.log2(2 / 3), abs=1e-12)
    assert divergence_step([0.5, 0.5], [0.25, 0.75]) == pytest.approx(0.207519, abs=1e-6)


def test_divergence_against_short_history_prediction():
    d = divergence_step([1 / 3] * 3, [4 / 7, 1 / 7, 2 / 7])
    want = (math.log2(7 / 12) + math.log2(7 / 3) + math.log2(7 / 6)) / 3
    assert d == pytest.approx(want, abs=1e-12)
    assert d == pytest.approx(0.22239, abs=1e-5)


def test_divergence_zero_prediction():
    with pytest.raises(DivergenceError):
        divergence_step([0.5, 0.5], [1.0, 0.0])
    assert divergence_step([1.0, 0.0], [0.5, 0.5]) == pytest.approx(1.0)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=2, max_size=8),
       st.lists(st.floats(0.001, 1.0), min_size=8, max_size=8))
def test_gibbs_and_chi_square(pw, qw):
    p = np.array(pw)
    if p.sum() == 0:
        return
    p = p / p.sum()
    q = np.array(qw[:len(p)])
    q = q / q.sum()
    d = divergence_step(p, q)
    assert d >= -1e-12
    assert d <= chi_square_bound(p, q) + 1e-9


def test_exact_binary_t1():
    est = average_redundancy(build_flat(2), SourceSpec.uniform(2), 1, exact=True)
    assert est.exact
    assert est.mean == pytest.approx(0.5 * math.log2(9 / 8), abs=1e-12)
    assert est.mean == pytest.approx(0.084963, abs=1e-6)


def test_exact_t0_is_divergence_from_uniform():
    src = SourceSpec.finite([0.7, 0.2, 0.1])
    est = average_redundancy(build_flat(3), src, 0, exact=True)
    assert est.mean == pytest.approx(divergence_step(src.probs, [1 / 3] * 3))


def test_laplace_uniform_under_bound():
    est = average_redundancy(build_flat(4), SourceSpec.uniform(4), 100, trials=20000, seed=3)
    assert est.mean <= 3 * LOG2E / 101 + 3 * est.stderr


def test_running_average_oracles():
    assert np.allclose(running_average([0.3] * 7), 0.3)
    c = 2.5
    r = [c / (i + 1) for i in range(1, 51)]
    R = running_average(r)
    for t in (1, 10, 50):
        harmonic = sum(1 / k for k in range(1, t + 2))
        assert R[t - 1] == pytest.approx(c * (harmonic - 1) / t, rel=1e-12)


def test_cumulative_matches_exact_steps():
    src = SourceSpec.uniform(2)
    table = cumulative_redundancy(build_flat(2), src, 10, trials=4000, seed=1)
    exact = [average_redundancy(build_flat(2), src, i, exact=True).mean for i in range(1, 11)]
    for i in range(10):
        assert abs(table.r[i] - exact[i]) <= 4 * table.r_stderr[i] + 1e-12
    assert abs(table.R[-1] - np.mean(exact)) <= 4 * table.R_stderr[-1] + 1e-12


CONFIGS = [
    (build_flat(2), SourceSpec.uniform(2), 8),
    (build_flat(3, KRICHEVSKY), SourceSpec.finite([0.6, 0.3, 0.1]), 6),
    (build_from_partition([[0, 1], [2]]), SourceSpec.finite([0.2, 0.5, 0.3]), 5),
    (six_letter_tree(), SourceSpec.uniform(6), 4),
    (EscapePredictor(4), SourceSpec.finite([0.5, 0.5, 0.0, 0.0]), 6),
]


@pytest.mark.parametrize("pred,src,t", CONFIGS)
def test_exact_agrees_with_monte_carlo(pred, src, t):
    exact = average_redundancy(pred, src, t, exact=True)
    mc = average_redundancy(pred, src, t, trials=20000, seed=7, exact=False)
    assert exact.mean >= 0
    assert abs(mc.mean - exact.mean) <= 4 * mc.stderr


def test_seeded_determinism():
    a = redundancy_table(build_flat(3), SourceSpec.uniform(3), [5, 50], 3000, seed=9)
    b = redundancy_table(build_flat(3), SourceSpec.uniform(3), [5, 50], 3000, seed=9)
    c = redundancy_table(build_flat(3), SourceSpec.uniform(3), [5, 50], 3000, seed=10)
    assert a.to_csv() == b.to_csv() != c.to_csv()


def test_block_split_is_independent_of_trial_count_within_block():
    src = SourceSpec.uniform(3)
    a = average_redundancy(build_flat(3), src, 20, trials=5000, seed=2)
    b = average_redundancy(build_flat(3), src, 20, trials=5000, seed=2)
    assert a == b


def test_sweep_single_source():
    src = SourceSpec.finite([0.9, 0.1])
    one = worst_case_sweep(build_flat(2), [src], 50, trials=2000, seed=1)
    direct = average_redundancy(build_flat(2), src, 50, trials=2000, seed=1)
    assert one.max_estimate == direct
    assert one.is_lower_bound


def test_sweep_picks_max():
    grid = [SourceSpec.finite([p, 1 - p]) for p in (0.5, 0.1, 0.01)]
    res = worst_case_sweep(build_flat(2), grid, 200, trials=2000, seed=4)
    assert res.max_estimate.mean == max(e.mean for e in res.estimates)


def test_tail_remainder():
    assert tail_remainder(SourceSpec.uniform(3), None, 1e-9) == 0.0
    rem = tail_remainder(SourceSpec.geometric(0.5), lambda a: a + 1, 1e-9)
    assert 0 < rem < 1e-7


def test_report_csv_columns():
    rep = redundancy_table(LazyCodeTreePredictor(UnaryCode()), SourceSpec.geometric(0.5),
                           [10], 500, seed=0, bound=lambda t: 1.0, path_length=lambda a: a + 1)
    lines = rep.to_csv().splitlines()
    assert tuple(lines[0].split(",")) == CSV_COLUMNS
    cells = lines[1].split(",")
    assert cells[0] == "10" and float(cells[3]) == 1.0 and float(cells[4]) > 0 and cells[5] == ""
    assert "trials=500" in rep.format_table()


def test_bad_arguments():
    with pytest.raises(ValueError):
        average_redundancy(build_flat(2), SourceSpec.uniform(2), 5, trials=0)
    with pytest.raises(ValueError):
        average_redundancy(build_flat(2), SourceSpec.uniform(2), 20, exact=True)
    with pytest.raises(ValueError):
        cumulative_redundancy(build_flat(2), SourceSpec.uniform(2), 0)
    with pytest.raises(ValueError):
        worst_case_sweep(build_flat(2), [], 5)


def test_laplace_worse_than_krichevsky_on_skewed_grid():
    # The grid reaches p = 1e-6, where Laplace's worst case is near twice
    # log2(e); the Krichevsky estimator stays near log2(e) everywhere.
    t = 10**4
    grid = [SourceSpec.finite([p, 1 - p]) for p in (0.5, 0.3, 0.1, 0.01, 0.001, 1e-6)]
    lap = worst_case_sweep(build_flat(2), grid, t, trials=10**4, seed=3)
    kt = worst_case_sweep(build_flat(2, KRICHEVSKY), grid, t, trials=10**4, seed=3)
    assert 2 * t * lap.max_estimate.mean > 2 * t * kt.max_estimate.mean
    assert lap.argmax == len(grid) - 1
