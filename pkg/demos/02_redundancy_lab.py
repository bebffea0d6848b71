"""Measured redundancy against the analytic bounds.

Everything is seeded; rerunning prints the same numbers.
"""
import numpy as np

from treepredict import KRICHEVSKY, LAPLACE, build_flat, cumulative_redundancy, laplace_bound
from treepredict.alphabet import SourceSpec
from treepredict.estimators import LOG2E
from treepredict.redundancy import average_redundancy, redundancy_table, worst_case_sweep

src = SourceSpec.uniform(4)
rep = redundancy_table(build_flat(4), src, [10, 100, 1000], trials=20000, seed=0,
                       bound=lambda t: laplace_bound(4, t))
print(rep.format_table())
print()

# small horizons can be enumerated exactly
for t in (1, 2, 3):
    ex = average_redundancy(build_flat(2), SourceSpec.uniform(2), t, exact=True)
    mc = average_redundancy(build_flat(2), SourceSpec.uniform(2), t, trials=20000, seed=1, exact=False)
    print(f"t={t}: exact {ex.mean:.6f}   sampled {mc.mean:.6f} +- {mc.stderr:.1e}")
print()

# running average R^t along trajectories
table = cumulative_redundancy(build_flat(2), SourceSpec.finite([0.8, 0.2]), 200, trials=2000, seed=2)
print("R^t at t=10,50,200:", np.round(table.R[[9, 49, 199]], 5))
print()

# worst case over a grid of binary sources, 2t * r^t in units of log2(e)
t = 10**4
grid = [SourceSpec.finite([p, 1 - p]) for p in (0.5, 0.1, 0.01, 1e-6)]
for est in (LAPLACE, KRICHEVSKY):
    sweep = worst_case_sweep(build_flat(2, est), grid, t, trials=10**4, seed=3)
    vals = [2 * t * e.mean / LOG2E for e in sweep.estimates]
    print(f"{est.name:>10}:", " ".join(f"{v:.3f}" for v in vals))
