"""Tree predictors on a three-letter and a six-letter alphabet.

Prediction is a product of additive estimates along the path to a leaf.
"""
from fractions import Fraction

from treepredict import build_flat, build_from_partition, six_letter_tree, theorem1_bound
from treepredict.alphabet import SourceSpec

history = [0, 2, 0, 0]

# common Laplace: (count + 1) / (t + |A|)
flat = build_flat(3).update_many(history)
print("flat       ", [str(p) for p in flat.distribution(exact=True)])

# group letters 0 and 1 under one vertex; letter 2 sits at the root
grouped = build_from_partition([[0, 1], [2]]).update_many(history)
print("grouped    ", [str(p) for p in grouped.distribution(exact=True)])

# a deeper tree, nine letters of history
tree = six_letter_tree().update_many([2, 0, 4, 4, 1, 4, 3, 1, 2])
dist = tree.distribution(exact=True)
print("six letters", [str(p) for p in dist], "sum", sum(dist, Fraction(0)))
print("vertex counts", tree.node_counts())

# redundancy bound of the six-letter tree under a uniform source
for t in (1, 9, 100, 10**4):
    print(f"t={t:>6}  bound {theorem1_bound(tree, SourceSpec.uniform(6), t):.6f} bits")
