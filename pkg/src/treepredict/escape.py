"""Escape predictor for an alphabet whose used part is unknown.

Letters seen so far sit as leaves directly under the root; every letter not
yet seen shares one extra root son (the escape vertex), whose mass is split
uniformly among them.  With the Laplace estimator the prediction is

* ``(nu(a) + 1) / (t + |A+| + 1)`` for a seen letter,
* ``1 / ((t + |A+| + 1) * |A0|)`` for an unseen one,

where ``A+`` are the seen letters and ``A0`` the rest.  Once every letter has
been seen there is no escape vertex and the predictor is the plain additive
one over the whole alphabet.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right, insort
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .alphabet import CountTable, SourceSpec
from .estimators import LAPLACE, AdditiveEstimator
from .redundancy import RedundancyReport, redundancy_table
from .splits import UniformSplit, additive_split


class EscapeError(ValueError):
    pass


class EscapePredictor:
    """Mutable escape-predictor state (seen set, counts, length)."""

    def __init__(self, alphabet_size: int, estimator: AdditiveEstimator = LAPLACE):
        if alphabet_size < 1:
            raise EscapeError("alphabet size must be positive")
        self.size = alphabet_size
        self.estimator = estimator
        self.counts = CountTable()
        # first-seen order fixes the son order of the root when coding
        self._order: list[int] = []
        self._position: dict[int, int] = {}
        self._sorted: list[int] = []

    # -- state --------------------------------------------------------------

    @property
    def t(self) -> int:
        return self.counts.total

    @property
    def seen(self) -> frozenset:
        return frozenset(self._order)

    @property
    def n_seen(self) -> int:
        return len(self._order)

    @property
    def n_unseen(self) -> int:
        return self.size - len(self._order)

    def fresh(self) -> "EscapePredictor":
        return EscapePredictor(self.size, self.estimator)

    def _check(self, a: int) -> None:
        if not 0 <= a < self.size:
            raise EscapeError(f"letter {a} outside alphabet of size {self.size}")

    def update(self, a: int) -> None:
        self._check(a)
        if a not in self._position:
            self._position[a] = len(self._order)
            self._order.append(a)
            insort(self._sorted, a)
        self.counts.add(a)

    def update_many(self, seq: Iterable[int]) -> "EscapePredictor":
        for a in seq:
            self.update(a)
        return self

    # -- prediction ---------------------------------------------------------

    def predict(self, a: int, exact: bool = False):
        self._check(a)
        delta = self.estimator.delta if exact else self.estimator.delta_float
        nu = self.counts[a]
        if self.n_unseen == 0:
            return (nu + delta) / (self.t + delta * self.size)
        denom = self.t + delta * (self.n_seen + 1)
        if nu > 0:
            return (nu + delta) / denom
        return delta / (denom * self.n_unseen)

    def distribution(self, exact: bool = False):
        if exact:
            return [self.predict(a, exact=True) for a in range(self.size)]
        return np.array([self.predict(a) for a in range(self.size)])

    def batch_predict(self, counts: np.ndarray) -> np.ndarray:
        counts = np.asarray(counts, dtype=float)[:, :self.size]
        d = self.estimator.delta_float
        t = counts.sum(axis=1, keepdims=True)
        seen = counts > 0
        n_seen = seen.sum(axis=1, keepdims=True)
        n_unseen = self.size - n_seen
        denom = np.where(n_unseen > 0, t + d * (n_seen + 1), t + d * self.size)
        unseen_p = d / (denom * np.maximum(n_unseen, 1))
        return np.where(seen | (n_unseen == 0), (counts + d) / denom, unseen_p)

    # -- coding hooks -------------------------------------------------------

    def _root_split(self):
        sons = [self.counts[a] for a in self._order]
        if self.n_unseen:
            sons.append(0)
        return additive_split(sons, self.estimator)

    def decision_steps(self, a: int):
        self._check(a)
        root = self._root_split()
        if a in self._position:
            return [(root, self._position[a])]
        rank = a - bisect_left(self._sorted, a)
        return [(root, self.n_seen), (UniformSplit(self.n_unseen), rank)]

    def decode_with(self, choose: Callable) -> int:
        i = choose(self._root_split())
        if i < self.n_seen:
            return self._order[i]
        rank = choose(UniformSplit(self.n_unseen))
        return self._unseen_at(rank)

    def _unseen_at(self, rank: int) -> int:
        # smallest x with x - #{seen <= x} == rank and x unseen
        x = rank
        while True:
            nxt = rank + bisect_right(self._sorted, x)
            if nxt == x:
                return x
            x = nxt

    def descriptor(self) -> dict:
        return {"type": "escape", "alphabet_size": self.size, "estimator": self.estimator.name}


def escape_predict(state: EscapePredictor, a: int, exact: bool = False):
    return state.predict(a, exact=exact)


def escape_update(state: EscapePredictor, a: int) -> EscapePredictor:
    state.update(a)
    return state


def theorem2_limit(support_size: int, alphabet_size: int) -> int:
    """``min(s, |A| - 1)``: the limiting bound on ``t * r^t`` (``2 t r^t`` for Krichevsky)."""
    return min(support_size, alphabet_size - 1)


def theorem2_check(src: SourceSpec, alphabet_size: Optional[int] = None,
                   t_grid: Sequence[int] = (10, 100, 1000), trials: int = 10**4,
                   seed: int = 0, estimator: AdditiveEstimator = LAPLACE) -> RedundancyReport:
    """Monte-Carlo ``r^t`` of the escape predictor on a finite source.

    The ``bound`` column holds ``min(s, |A|-1) / t`` (``/ (2t)`` for the
    Krichevsky variant), so ``t * r_t`` can be read against ``min(s, |A|-1)``.
    That limit is in natural-log units; ``r_t`` is in bits, so a source whose
    redundancy sits at the limit shows ``t * r_t`` near ``log2(e) * min(s, |A|-1)``.
    """
    if not src.is_finite:
        raise EscapeError("the escape predictor needs a finite alphabet")
    n = alphabet_size or src.size
    if n < src.size:
        raise EscapeError("alphabet smaller than the source pmf")
    if n > src.size:
        src = SourceSpec.finite(list(src.probs) + [0.0] * (n - src.size), seed=src.seed)
    limit = theorem2_limit(src.support_size, n)
    scale = 1 if estimator.delta == 1 else 2
    pred = EscapePredictor(n, estimator)
    return redundancy_table(
        pred, src, t_grid, trials, seed,
        bound=lambda t: limit / (scale * t) if t else float("inf"),
        note=f"limit of {'t' if scale == 1 else '2t'}*r_t <= min(s, |A|-1) = {limit} (nats)")
