"""Prefix codes, their code trees, and the lazily materialized code-tree predictor.

A prefix code over a channel alphabet (binary here) induces a trie whose
leaves are the letters.  Running the tree predictor on that trie gives a
predictor for countable alphabets: only vertices on the paths of letters seen
so far are ever stored, and an untouched subtree behaves like one son with
count zero.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .alphabet import SourceSpec
from .estimators import LAPLACE, AdditiveEstimator, estimate
from .redundancy import RedundancyReport, redundancy_table, tail_remainder
from .splits import additive_split
from .tree import Node, PredictorTree, theorem1_terms


class CodeError(ValueError):
    pass


class PrefixViolation(CodeError):
    def __init__(self, first: tuple[int, str], second: tuple[int, str]):
        self.pair = (first, second)
        super().__init__(f"codeword {first[1]!r} (letter {first[0]}) is a prefix of "
                         f"{second[1]!r} (letter {second[0]})")


class PrefixCode:
    """Letter -> codeword map over ``arity`` channel symbols ``'0'..``.

    Subclasses supply :meth:`codeword`, :meth:`sons` and :meth:`leaf_letter`.
    ``size`` is ``None`` for codes over a countable alphabet.
    """

    arity = 2
    size: Optional[int] = None
    rule = "abstract"

    @property
    def symbols(self) -> str:
        return "0123456789"[:self.arity]

    def codeword(self, letter: int) -> str:
        raise NotImplementedError

    def length(self, letter: int) -> int:
        return len(self.codeword(letter))

    def sons(self, prefix: str) -> str:
        """Channel symbols ``s`` such that ``prefix + s`` is a vertex of the code tree."""
        raise NotImplementedError

    def leaf_letter(self, prefix: str) -> Optional[int]:
        """Letter whose codeword is ``prefix``, else ``None``."""
        raise NotImplementedError

    def codewords(self, n: Optional[int] = None) -> list[str]:
        n = self.size if n is None else (n if self.size is None else min(n, self.size))
        if n is None:
            raise CodeError("countable code: give the number of letters to enumerate")
        return [self.codeword(a) for a in range(n)]

    def to_dict(self) -> dict:
        return {"rule": self.rule}

    def _check_letter(self, letter: int) -> None:
        if letter < 0 or (self.size is not None and letter >= self.size):
            raise CodeError(f"letter {letter} has no codeword")


class UnaryCode(PrefixCode):
    """``a_i -> 1^(i-1) 0``: 0, 10, 110, 1110, ..."""

    rule = "unary"

    def codeword(self, letter: int) -> str:
        self._check_letter(letter)
        return "1" * letter + "0"

    def length(self, letter: int) -> int:
        return letter + 1

    def sons(self, prefix: str) -> str:
        return "01" if "0" not in prefix else ""

    def leaf_letter(self, prefix: str) -> Optional[int]:
        if prefix.endswith("0") and "0" not in prefix[:-1]:
            return len(prefix) - 1
        return None


class EliasGammaCode(PrefixCode):
    """Elias gamma code of ``letter + 1``: 1, 010, 011, 00100, ..."""

    rule = "elias-gamma"

    def codeword(self, letter: int) -> str:
        self._check_letter(letter)
        b = format(letter + 1, "b")
        return "0" * (len(b) - 1) + b

    def length(self, letter: int) -> int:
        return 2 * (letter + 1).bit_length() - 1

    def _shape(self, prefix: str) -> tuple[int, int]:
        z = len(prefix) - len(prefix.lstrip("0"))
        return z, len(prefix) - z  # leading zeros, bits after them

    def sons(self, prefix: str) -> str:
        z, rest = self._shape(prefix)
        return "01" if rest <= z else ""

    def leaf_letter(self, prefix: str) -> Optional[int]:
        z, rest = self._shape(prefix)
        if rest == z + 1:
            return int(prefix[z:], 2) - 1
        return None


class PaddedUnaryCode(PrefixCode):
    """Unary code padded with zeros to a prescribed length ``length_fn(letter)``.

    With ``length_fn(i) = 2**(i+1)`` this gives codeword lengths 2, 4, 8, ...
    The padding vertices have a single son.
    """

    rule = "padded-unary"

    def __init__(self, length_fn: Callable[[int], int], name: str = "padded-unary"):
        self.length_fn = length_fn
        self.rule = name

    def length(self, letter: int) -> int:
        n = self.length_fn(letter)
        if n < letter + 1:
            raise CodeError(f"length {n} too short for letter {letter}")
        return n

    def codeword(self, letter: int) -> str:
        self._check_letter(letter)
        return "1" * letter + "0" * (self.length(letter) - letter)

    def _letter_of(self, prefix: str) -> Optional[int]:
        k = prefix.find("0")
        return None if k < 0 else k

    def sons(self, prefix: str) -> str:
        a = self._letter_of(prefix)
        if a is None:
            return "01"
        return "0" if len(prefix) < self.length(a) else ""

    def leaf_letter(self, prefix: str) -> Optional[int]:
        a = self._letter_of(prefix)
        if a is not None and len(prefix) == self.length(a) and "1" not in prefix[a:]:
            return a
        return None

    def to_dict(self) -> dict:
        raise CodeError("padded codes are not serializable")


class TableCode(PrefixCode):
    """Explicit finite codeword table.  Prefix-freeness is checked by
    :func:`kraft_check` and when a predictor is built on it."""

    rule = "table"

    def __init__(self, table: Sequence[str], arity: int = 2):
        if not 2 <= arity <= 10:
            raise CodeError("channel arity must be between 2 and 10")
        self.arity = arity
        self.table = list(table)
        self.size = len(self.table)
        if not self.table:
            raise CodeError("empty code table")
        for w in self.table:
            if not w or any(ch not in self.symbols for ch in w):
                raise CodeError(f"codeword {w!r} is not a non-empty word over {self.symbols!r}")
        self._letter = {w: i for i, w in enumerate(self.table)}
        sons: dict[str, set] = defaultdict(set)
        for w in self.table:
            for k in range(len(w)):
                sons[w[:k]].add(w[k])
        self._sons = {p: "".join(sorted(s)) for p, s in sons.items()}

    def codeword(self, letter: int) -> str:
        self._check_letter(letter)
        return self.table[letter]

    def sons(self, prefix: str) -> str:
        return self._sons.get(prefix, "")

    def leaf_letter(self, prefix: str) -> Optional[int]:
        return self._letter.get(prefix)

    def to_dict(self) -> dict:
        return {"table": list(self.table)}


def code_from_dict(doc: dict) -> PrefixCode:
    """``{"rule": "unary" | "elias-gamma"}`` or ``{"table": [...]}``."""
    if not isinstance(doc, dict):
        raise CodeError("code spec must be a JSON object")
    if "table" in doc:
        return TableCode(doc["table"], int(doc.get("arity", 2)))
    rule = doc.get("rule")
    if rule == "unary":
        return UnaryCode()
    if rule in ("elias-gamma", "gamma"):
        return EliasGammaCode()
    raise CodeError(f"unknown code rule {rule!r}")


def code_from_json(text: str) -> PrefixCode:
    return code_from_dict(json.loads(text))


# -- Kraft / prefix checks ---------------------------------------------------

@dataclass(frozen=True)
class KraftResult:
    sum: float
    exact_sum: Fraction
    ok: bool
    n_letters: int
    violation: Optional[tuple] = None


def kraft_check(code: PrefixCode, max_letters: int = 1000) -> KraftResult:
    """Kraft sum and prefix-freeness over the first ``max_letters`` codewords."""
    words = code.codewords(max_letters)
    exact = sum((Fraction(1, code.arity ** len(w)) for w in words), Fraction(0))
    order = sorted(range(len(words)), key=lambda i: words[i])
    violation = None
    for i, j in zip(order, order[1:]):
        if words[j].startswith(words[i]):
            violation = ((i, words[i]), (j, words[j]))
            break
    ok = violation is None and exact <= 1
    return KraftResult(float(exact), exact, ok, len(words), violation)


def require_prefix_free(code: PrefixCode, max_letters: int = 1000) -> None:
    res = kraft_check(code, max_letters)
    if res.violation:
        raise PrefixViolation(*res.violation)
    if res.exact_sum > 1:
        raise CodeError(f"Kraft sum {res.sum} exceeds 1")


@dataclass(frozen=True)
class CodeLengthReport:
    """Expected codeword length ``sum p(a_i)|c_i|`` (bits for a binary code)."""

    mean: float
    tail_mass: float
    remainder: float
    n_letters: int
    divergent: bool
    reason: str = ""


def expected_codeword_length(code: PrefixCode, src: SourceSpec, tail_eps: float = 1e-9,
                             cap: float = 1e3, max_letters: int = 10**6) -> CodeLengthReport:
    """Truncated expected codeword length under ``src``.

    The sum stops once the dropped probability mass is at most ``tail_eps``
    and a ratio-test estimate of the dropped length contribution is too.
    Divergence is detected heuristically: a partial sum above ``cap`` or no
    convergence within ``max_letters`` letters is reported as divergent.
    """
    acc = 0.0
    mass = 0.0
    prev = None
    remainder = 0.0
    n = 0
    for a, _ in src.iter_pmf():
        if code.size is not None and a >= code.size:
            if src.pmf(a) > 0:
                raise CodeError(f"letter {a} has no codeword")
            continue
        lp = src.log2_pmf(a)
        term = 0.0 if lp == -math.inf else 2.0 ** (lp + math.log2(code.length(a)))
        mass += 2.0 ** lp if lp != -math.inf else 0.0
        acc += term
        n = a + 1
        if acc > cap:
            return CodeLengthReport(acc, max(0.0, 1 - mass), math.inf, n, True,
                                    f"partial sum exceeded cap={cap:g} after {n} letters")
        if src.is_finite:
            prev = term
            continue
        if 1.0 - mass <= tail_eps and prev:
            ratio = term / prev
            if ratio < 1:
                remainder = term * ratio / (1 - ratio)
                if remainder <= tail_eps:
                    return CodeLengthReport(acc, max(0.0, 1 - mass), remainder, n, False)
        prev = term
        if n >= max_letters:
            return CodeLengthReport(acc, max(0.0, 1 - mass), math.inf, n, True,
                                    f"no convergence within {max_letters} letters")
    return CodeLengthReport(acc, 0.0, 0.0, n, False)


# -- the code-tree predictor -------------------------------------------------

class LazyCodeTreePredictor:
    """Tree predictor on the trie of a prefix code, materialized on demand.

    Vertices are keyed by their channel-symbol prefix; unstored vertices have
    count zero.
    """

    def __init__(self, code: PrefixCode, estimator: AdditiveEstimator = LAPLACE,
                 check_letters: int = 1000):
        require_prefix_free(code, check_letters)
        self.code = code
        self.estimator = estimator
        self.counts: dict[str, int] = {}

    @property
    def size(self) -> Optional[int]:
        return self.code.size

    @property
    def t(self) -> int:
        return self.counts.get("", 0)

    @property
    def n_materialized(self) -> int:
        return len(self.counts)

    def fresh(self) -> "LazyCodeTreePredictor":
        new = LazyCodeTreePredictor.__new__(LazyCodeTreePredictor)
        new.code, new.estimator, new.counts = self.code, self.estimator, {}
        return new

    def path_length(self, letter: int) -> int:
        return self.code.length(letter)

    def update(self, letter: int) -> None:
        w = self.code.codeword(letter)
        for k in range(len(w) + 1):
            key = w[:k]
            self.counts[key] = self.counts.get(key, 0) + 1

    def update_many(self, seq: Iterable[int]) -> "LazyCodeTreePredictor":
        for a in seq:
            self.update(a)
        return self

    def predict(self, letter: int, exact: bool = False):
        w = self.code.codeword(letter)
        e = self.estimator
        get = self.counts.get
        if exact:
            prob = Fraction(1)
            for k in range(len(w)):
                sigma = len(self.code.sons(w[:k]))
                if sigma > 1:
                    prob *= estimate(e, get(w[:k + 1], 0), get(w[:k], 0), sigma, exact=True)
            return prob
        return 2.0 ** self.log2_predict(letter)

    def log2_predict(self, letter: int) -> float:
        w = self.code.codeword(letter)
        d = self.estimator.delta_float
        get = self.counts.get
        acc = 0.0
        for k in range(len(w)):
            sigma = len(self.code.sons(w[:k]))
            if sigma > 1:
                acc += math.log2((get(w[:k + 1], 0) + d) / (get(w[:k], 0) + d * sigma))
        return acc

    def batch_predict(self, counts: np.ndarray) -> np.ndarray:
        counts = np.asarray(counts, dtype=float)
        n, m = counts.shape
        if self.size is not None:
            m = min(m, self.size)
        words = [self.code.codeword(a) for a in range(m)]
        nu: dict[str, np.ndarray] = {}
        for a, w in enumerate(words):
            col = counts[:, a]
            if not col.any():
                continue
            for k in range(len(w) + 1):
                key = w[:k]
                nu[key] = nu[key] + col if key in nu else col.copy()
        zero = np.zeros(n)
        d = self.estimator.delta_float
        logq = np.zeros((n, m))
        for a, w in enumerate(words):
            acc = np.zeros(n)
            for k in range(len(w)):
                sigma = len(self.code.sons(w[:k]))
                if sigma > 1:
                    acc += np.log2((nu.get(w[:k + 1], zero) + d) / (nu.get(w[:k], zero) + d * sigma))
            logq[:, a] = acc
        return np.exp2(logq)

    def decision_steps(self, letter: int):
        w = self.code.codeword(letter)
        steps = []
        for k in range(len(w)):
            node = w[:k]
            sons = self.code.sons(node)
            split = additive_split([self.counts.get(node + s, 0) for s in sons], self.estimator)
            steps.append((split, sons.index(w[k])))
        return steps

    def decode_with(self, choose: Callable) -> int:
        node = ""
        while True:
            letter = self.code.leaf_letter(node)
            if letter is not None:
                return letter
            sons = self.code.sons(node)
            if not sons:
                raise CodeError(f"prefix {node!r} is neither a codeword nor internal")
            split = additive_split([self.counts.get(node + s, 0) for s in sons], self.estimator)
            node += sons[choose(split)]

    def descriptor(self) -> dict:
        return {"type": "code-tree", "code": self.code.to_dict(), "estimator": self.estimator.name}


def build_code_tree_predictor(code: PrefixCode,
                              estimator: AdditiveEstimator = LAPLACE) -> LazyCodeTreePredictor:
    return LazyCodeTreePredictor(code, estimator)


def eager_tree(code: PrefixCode, n_letters: int,
               estimator: AdditiveEstimator = LAPLACE) -> tuple[PredictorTree, dict[int, str]]:
    """Explicit tree for the first ``n_letters`` codewords.

    Sons of the full code tree that lead to none of those letters become
    placeholder leaves numbered from ``n_letters`` upward; the returned map
    gives each placeholder's prefix.
    """
    words = code.codewords(n_letters)
    letter_of = {w: a for a, w in enumerate(words)}
    prefixes = {w[:k] for w in words for k in range(len(w))}
    tails: dict[int, str] = {}

    def build(prefix: str) -> Node:
        if prefix in letter_of:
            return Node(letter=letter_of[prefix])
        if prefix not in prefixes:
            tails[len(words) + len(tails)] = prefix
            return Node(letter=len(words) + len(tails) - 1)
        return Node([build(prefix + s) for s in code.sons(prefix)])

    return PredictorTree(build(""), estimator), tails


@dataclass(frozen=True)
class CodeTreeBound:
    value: float
    remainder: float
    terms: list

    @property
    def total(self) -> float:
        return self.value + self.remainder


def code_tree_bound(code: PrefixCode, src: SourceSpec, t: int,
                    tail_eps: float = 1e-9) -> CodeTreeBound:
    """Tree redundancy bound on the code trie, truncated at tail mass ``tail_eps``.

    Vertices are those on the paths of the kept letters; the dropped letters
    add ``log2(e) * sum p(a) |c(a)|``.
    """
    probs, _ = src.truncation(tail_eps)
    if code.size is not None:
        probs = probs[:code.size]
    k = len(probs)
    tree, _ = eager_tree(code, k)
    prob = lambda a: float(probs[a]) if a < k else 0.0
    terms = theorem1_terms(tree, prob, t)
    value = math.fsum(term.term for term in terms)
    return CodeTreeBound(value, tail_remainder(src, code.length, tail_eps), terms)


def theorem3_decay(src: SourceSpec, code: PrefixCode, estimator: AdditiveEstimator = LAPLACE,
                   t_grid: Sequence[int] = (10, 100, 1000), trials: int = 10**4,
                   seed: int = 0, tail_eps: float = 1e-9) -> RedundancyReport:
    """Monte-Carlo ``r^t`` of the code-tree predictor on a countable source.

    Refuses sources under which the code has infinite expected length, since
    such a code cannot even transmit the first letter.
    """
    report = expected_codeword_length(code, src, tail_eps)
    if report.divergent:
        raise CodeError(f"expected codeword length is infinite under this source ({report.reason})")
    pred = LazyCodeTreePredictor(code, estimator)
    return redundancy_table(
        pred, src, t_grid, trials, seed,
        bound=lambda t: code_tree_bound(code, src, t, tail_eps).total,
        tail_eps=tail_eps, path_length=code.length,
        note=f"expected codeword length {report.mean:.6g}; r_t -> 0 as t grows")
