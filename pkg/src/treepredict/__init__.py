"""Tree-structured adaptive predictors for i.i.d. sources over large and
countable alphabets, an arithmetic coder driven by them, and tools that
measure their Kullback-Leibler redundancy."""

from .alphabet import CountTable, SourceSpec, count, pmf, sample_sequence
from .coder import CodecStream, DecodeError, decode, encode, ideal_code_length
from .escape import EscapePredictor, escape_predict, escape_update, theorem2_check
from .estimators import (KRICHEVSKY, LAPLACE, AdditiveEstimator, estimate,
                         krichevsky_asymptote, laplace_bound)
from .prefix_code import (EliasGammaCode, LazyCodeTreePredictor, PaddedUnaryCode,
                          TableCode, UnaryCode, build_code_tree_predictor,
                          expected_codeword_length, kraft_check, theorem3_decay)
from .redundancy import (RedundancyReport, average_redundancy, cumulative_redundancy,
                         divergence_step, worst_case_sweep)
from .tree import (PredictorTree, build_flat, build_from_partition, six_letter_tree,
                   theorem1_bound)

__version__ = "0.1.0"

__all__ = [
    "CountTable", "SourceSpec", "count", "pmf", "sample_sequence",
    "CodecStream", "DecodeError", "decode", "encode", "ideal_code_length",
    "EscapePredictor", "escape_predict", "escape_update", "theorem2_check",
    "KRICHEVSKY", "LAPLACE", "AdditiveEstimator", "estimate", "krichevsky_asymptote",
    "laplace_bound", "EliasGammaCode", "LazyCodeTreePredictor", "PaddedUnaryCode",
    "TableCode", "UnaryCode", "build_code_tree_predictor", "expected_codeword_length",
    "kraft_check", "theorem3_decay", "RedundancyReport", "average_redundancy",
    "cumulative_redundancy", "divergence_step", "worst_case_sweep", "PredictorTree",
    "build_flat", "build_from_partition", "six_letter_tree", "theorem1_bound",
]
