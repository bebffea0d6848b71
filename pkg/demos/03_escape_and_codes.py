"""Unknown and countable alphabets: the escape predictor and code-tree predictors."""
from treepredict import EscapePredictor, UnaryCode, EliasGammaCode, LazyCodeTreePredictor
from treepredict import expected_codeword_length, kraft_check, theorem2_check, theorem3_decay
from treepredict.alphabet import SourceSpec
from treepredict.prefix_code import PaddedUnaryCode

# three letters used out of a hundred
eta = EscapePredictor(100).update_many([5, 17, 5])
print("seen", sorted(eta.seen), "p(5) =", eta.predict(5, exact=True),
      "p(unseen) =", eta.predict(0, exact=True))

src = SourceSpec.finite([1 / 3] * 3)
print(theorem2_check(src, 100, [100, 1000], trials=4000, seed=0).format_table())
print()

# prefix codes
print("unary  ", kraft_check(UnaryCode(), 20).exact_sum)
print("gamma  ", EliasGammaCode().codewords(6))
geo = SourceSpec.geometric(0.5)
print("E|c| unary under geometric(1/2):", expected_codeword_length(UnaryCode(), geo).mean)
print("lengths 2,4,8,...:", expected_codeword_length(PaddedUnaryCode(lambda a: 2 ** (a + 1)), geo).reason)

pred = LazyCodeTreePredictor(UnaryCode()).update_many([0, 0, 0])
print("after 0 0 0: p(0) =", pred.predict(0, exact=True), " p(1) =", pred.predict(1, exact=True))

print(theorem3_decay(geo, UnaryCode(), t_grid=[10, 100, 1000], trials=4000, seed=1).format_table())
