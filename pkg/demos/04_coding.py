"""Arithmetic coding with the predictors; payload stays within 2 bits of the ideal."""
import math

from treepredict import build_flat, decode, encode, ideal_code_length
from treepredict import EscapePredictor, LazyCodeTreePredictor, UnaryCode
from treepredict.alphabet import SourceSpec, sample_sequence

seq = [0, 2, 0, 0, 0]
s = encode(seq, build_flat(3))
print(f"{len(seq)} letters: payload {s.payload_bits} bits, ideal {s.ideal_bits:.4f}"
      f" (= log2 105 = {math.log2(105):.4f})")
print("stream bytes:", s.to_bytes())

for name, pred, src in [
    ("flat |A|=4", build_flat(4), SourceSpec.uniform(4)),
    ("escape |A|=1000", EscapePredictor(1000), SourceSpec.finite([0.5, 0.25, 0.25])),
    ("unary code tree", LazyCodeTreePredictor(UnaryCode()), SourceSpec.geometric(0.5)),
]:
    x = sample_sequence(src, 10**4, seed=7)
    s = encode(x, pred)
    assert decode(s.to_bytes()) == x
    gap = s.payload_bits - ideal_code_length(x, pred)
    print(f"{name:>16}: {s.payload_bits / len(x):.4f} bits/letter, gap {gap:.3f} bits")
