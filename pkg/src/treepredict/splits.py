"""Integer frequency tables for a single node decision.

A split is the coder's view of one internal vertex: ``sigma`` sons, each with
an integer frequency, and the common total.  Frequencies are exact (no
quantization); the coder scales them into its range with floor division.
"""

from __future__ import annotations

from bisect import bisect_right
from itertools import accumulate


class WeightedSplit:
    __slots__ = ("weights", "total", "_cum")

    def __init__(self, weights: list[int]):
        if not weights or min(weights) <= 0:
            raise ValueError("split weights must be positive")
        self.weights = weights
        self._cum = None
        self.total = sum(weights)

    @property
    def sigma(self) -> int:
        return len(self.weights)

    def _cumulative(self) -> list[int]:
        if self._cum is None:
            self._cum = [0, *accumulate(self.weights)]
        return self._cum

    def cum(self, i: int) -> int:
        if i == 0:
            return 0
        return self._cumulative()[i]

    def freq(self, i: int) -> int:
        return self.weights[i]

    def find(self, target: int) -> int:
        """Index ``i`` with ``cum(i) <= target < cum(i + 1)``."""
        return bisect_right(self._cumulative(), target) - 1


class UniformSplit:
    """``sigma`` sons of equal weight; used for the pooled unseen letters."""

    __slots__ = ("sigma", "total")

    def __init__(self, sigma: int):
        if sigma < 1:
            raise ValueError("split needs at least one son")
        self.sigma = sigma
        self.total = sigma

    def cum(self, i: int) -> int:
        return i

    def freq(self, i: int) -> int:
        return 1

    def find(self, target: int) -> int:
        return target


def additive_split(counts, estimator) -> WeightedSplit:
    """Split whose son ``i`` has weight ``counts[i] * q + p`` where ``delta = p/q``."""
    q, p = estimator.integer_weights()
    return WeightedSplit([c * q + p for c in counts])
