"""Tree-structured predictors.

A :class:`PredictorTree` is a rooted tree whose leaves are letters.  Each
vertex keeps the number of observed letters that fall in its subtree, and the
probability of the next letter is the product of the per-vertex additive
estimates along its root-to-leaf path.  A root whose sons are all leaves is the
ordinary Laplace (or Krichevsky) predictor.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .alphabet import SourceSpec, pmf
from .estimators import LAPLACE, LOG2E, AdditiveEstimator, estimate
from .splits import additive_split


class TreeError(ValueError):
    pass


class Node:
    __slots__ = ("children", "letter", "count")

    def __init__(self, children: Optional[list["Node"]] = None, letter: Optional[int] = None):
        self.children = children or []
        self.letter = letter
        self.count = 0

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def sigma(self) -> int:
        return len(self.children)

    def letters(self) -> list[int]:
        if self.is_leaf:
            return [self.letter]
        out = []
        for c in self.children:
            out.extend(c.letters())
        return out

    def clone_shape(self) -> "Node":
        return Node([c.clone_shape() for c in self.children], self.letter)


# Paths longer than this are multiplied out in the log domain.
_LOG_PATH = 48


class PredictorTree:
    """Predictor driven by a fixed tree topology and mutable vertex counts."""

    def __init__(self, root: Node, estimator: AdditiveEstimator = LAPLACE):
        if root.is_leaf:
            raise TreeError("the root must have at least one son")
        self.root = root
        self.estimator = estimator
        self._paths: dict[int, list[tuple[Node, int]]] = {}
        self.internal: list[tuple[str, Node]] = []
        self._index(root, [], "root")
        letters = sorted(self._paths)
        if letters != list(range(len(letters))):
            raise TreeError("leaf letters must be exactly the ids 0..n-1")
        self.size = len(letters)

    def _index(self, node: Node, path: list, label: str) -> None:
        if node.is_leaf:
            if node.letter is None or node.letter < 0:
                raise TreeError("every leaf needs a non-negative letter id")
            if node.letter in self._paths:
                raise TreeError(f"letter {node.letter} marks two leaves")
            self._paths[node.letter] = path
            return
        self.internal.append((label, node))
        for i, child in enumerate(node.children):
            sub = f"{i}" if label == "root" else f"{label}.{i}"
            self._index(child, path + [(node, i)], sub)

    # -- state --------------------------------------------------------------

    @property
    def t(self) -> int:
        return self.root.count

    def fresh(self) -> "PredictorTree":
        """Same topology and estimator, zero counts."""
        return PredictorTree(self.root.clone_shape(), self.estimator)

    def path(self, letter: int) -> list[tuple[Node, int]]:
        try:
            return self._paths[letter]
        except KeyError:
            raise TreeError(f"letter {letter} is not a leaf of this tree") from None

    def update(self, letter: int) -> None:
        steps = self.path(letter)
        self.root.count += 1
        for node, i in steps:
            node.children[i].count += 1

    def update_many(self, seq: Iterable[int]) -> "PredictorTree":
        for a in seq:
            self.update(a)
        return self

    def node_counts(self) -> dict[str, int]:
        return {label: node.count for label, node in self.internal}

    # -- prediction ---------------------------------------------------------

    def predict(self, letter: int, exact: bool = False):
        """Probability of ``letter`` as the next symbol."""
        steps = self.path(letter)
        e = self.estimator
        if exact:
            prob = Fraction(1)
            for node, i in steps:
                if node.sigma > 1:
                    prob *= estimate(e, node.children[i].count, node.count, node.sigma, exact=True)
            return prob
        if len(steps) > _LOG_PATH:
            return 2.0 ** self.log2_predict(letter)
        prob = 1.0
        for node, i in steps:
            if node.sigma > 1:
                prob *= estimate(e, node.children[i].count, node.count, node.sigma)
        return prob

    def log2_predict(self, letter: int) -> float:
        d = self.estimator.delta_float
        acc = 0.0
        for node, i in self.path(letter):
            if node.sigma > 1:
                acc += math.log2((node.children[i].count + d) / (node.count + d * node.sigma))
        return acc

    def distribution(self, exact: bool = False):
        """Predicted pmf over letters ``0..size-1``."""
        if exact:
            return [self.predict(a, exact=True) for a in range(self.size)]
        return np.array([self.predict(a) for a in range(self.size)])

    def batch_predict(self, counts: np.ndarray) -> np.ndarray:
        """Predictions for many histories at once, given their letter counts.

        ``counts`` has shape ``(N, size)``; the result has the same shape.
        """
        counts = np.asarray(counts, dtype=float)
        if counts.ndim != 2 or counts.shape[1] < self.size:
            raise TreeError(f"counts must have shape (N, >= {self.size})")
        out = np.empty((counts.shape[0], self.size))
        d = self.estimator.delta_float

        def subtotal(node: Node) -> np.ndarray:
            if node.is_leaf:
                return counts[:, node.letter]
            return sum(subtotal(c) for c in node.children)

        def visit(node: Node, nu: np.ndarray, acc) -> None:
            if node.is_leaf:
                out[:, node.letter] = acc
                return
            child_nu = [subtotal(c) for c in node.children]
            if node.sigma == 1:
                visit(node.children[0], child_nu[0], acc)
                return
            denom = nu + d * node.sigma
            for c, cn in zip(node.children, child_nu):
                visit(c, cn, acc * (cn + d) / denom)

        visit(self.root, counts[:, :self.size].sum(axis=1), np.ones(counts.shape[0]))
        return out

    # -- coding hooks -------------------------------------------------------

    def decision_steps(self, letter: int):
        """``(split, son index)`` for every vertex on the path of ``letter``."""
        return [(additive_split([c.count for c in node.children], self.estimator), i)
                for node, i in self.path(letter)]

    def decode_with(self, choose: Callable) -> int:
        node = self.root
        while not node.is_leaf:
            i = choose(additive_split([c.count for c in node.children], self.estimator))
            node = node.children[i]
        return node.letter

    # -- serialization ------------------------------------------------------

    def to_nested(self) -> dict:
        return to_nested(self.root)

    @property
    def is_flat(self) -> bool:
        return [c.letter for c in self.root.children] == list(range(self.size))

    def descriptor(self) -> dict:
        if self.is_flat:
            return {"type": "flat", "alphabet_size": self.size, "estimator": self.estimator.name}
        return {"type": "tree", "estimator": self.estimator.name, "tree": self.to_nested()}


def to_nested(node: Node) -> dict:
    if node.is_leaf:
        return {"letter": node.letter}
    return {"children": [to_nested(c) for c in node.children]}


def _from_nested(doc) -> Node:
    if not isinstance(doc, dict):
        raise TreeError(f"tree node must be an object, got {type(doc).__name__}")
    if "letter" in doc:
        if "children" in doc:
            raise TreeError("a node cannot have both 'letter' and 'children'")
        letter = doc["letter"]
        if not isinstance(letter, int) or isinstance(letter, bool):
            raise TreeError(f"leaf letter must be an integer id, got {letter!r}")
        return Node(letter=letter)
    children = doc.get("children")
    if not isinstance(children, list) or not children:
        raise TreeError("internal node needs a non-empty 'children' list")
    return Node([_from_nested(c) for c in children])


def from_nested(doc: dict, estimator: AdditiveEstimator = LAPLACE) -> PredictorTree:
    return PredictorTree(_from_nested(doc), estimator)


def from_json(text: str, estimator: AdditiveEstimator = LAPLACE) -> PredictorTree:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TreeError(f"malformed tree JSON: {exc}") from exc
    return from_nested(doc, estimator)


def build_flat(alphabet_size: int, estimator: AdditiveEstimator = LAPLACE) -> PredictorTree:
    """Root with one leaf son per letter: the common additive predictor."""
    if alphabet_size < 2:
        raise TreeError("alphabet size must be at least 2")
    return PredictorTree(Node([Node(letter=a) for a in range(alphabet_size)]), estimator)


def build_from_partition(groups: Sequence[Sequence[int]],
                         estimator: AdditiveEstimator = LAPLACE) -> PredictorTree:
    """Depth-two tree: one root son per group, a leaf per member.

    Singleton groups become leaves directly under the root.
    """
    if not groups:
        raise TreeError("need at least one group")
    seen: set[int] = set()
    sons = []
    for g in groups:
        g = list(g)
        if not g:
            raise TreeError("groups must be non-empty")
        overlap = seen.intersection(g)
        if overlap or len(set(g)) != len(g):
            raise TreeError(f"groups overlap on {sorted(overlap) or g}")
        seen.update(g)
        sons.append(Node(letter=g[0]) if len(g) == 1 else Node([Node(letter=a) for a in g]))
    return PredictorTree(Node(sons), estimator)


def six_letter_tree(estimator: AdditiveEstimator = LAPLACE) -> PredictorTree:
    """Six-letter example tree: root sons {a1,a3,a6}, {a2}, {a4,a5} (ids 0-based)."""
    return from_nested({"children": [
        {"children": [{"letter": 2}, {"letter": 0}, {"letter": 5}]},
        {"letter": 1},
        {"children": [{"letter": 3}, {"letter": 4}]},
    ]}, estimator)


@dataclass(frozen=True)
class BoundTerm:
    label: str
    sigma: int
    mass: float
    term: float


def theorem1_terms(tree: PredictorTree, src, t: int,
                   scale_by_sons: bool = False) -> list[BoundTerm]:
    """Per-internal-vertex terms of the tree redundancy bound (in bits).

    The default term is ``log2(e) * min((sigma - 1)/(t + 1), p(A))``.  With
    ``scale_by_sons`` it is ``log2(e) * (sigma - 1) * min(p(A), 1/(t + 1))``,
    which is larger whenever ``p(A) < 1/(t + 1)`` and ``sigma > 2``.  Leaves
    contribute nothing and are omitted.
    """
    if t < 0:
        raise TreeError("t must be >= 0")
    prob = src if callable(src) else (lambda a: pmf(src, a))
    terms = []
    for label, node in tree.internal:
        mass = math.fsum(prob(a) for a in node.letters())
        if scale_by_sons:
            val = (node.sigma - 1) * min(mass, 1.0 / (t + 1))
        else:
            val = min((node.sigma - 1) / (t + 1), mass)
        terms.append(BoundTerm(label, node.sigma, mass, LOG2E * val))
    return terms


def theorem1_bound(tree: PredictorTree, src: SourceSpec, t: int,
                   scale_by_sons: bool = False) -> float:
    """Upper bound on the average redundancy of ``tree`` after ``t`` letters."""
    return math.fsum(term.term for term in theorem1_terms(tree, src, t, scale_by_sons))
