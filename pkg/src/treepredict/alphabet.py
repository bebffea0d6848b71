"""Alphabets, i.i.d. sources and letter counts.

Letters are dense non-negative integer ids (``a_1`` is id 0, ``a_2`` is id 1
and so on).  A :class:`SourceSpec` describes a memoryless source over either a
finite alphabet (explicit pmf) or a countable one (geometric, or a custom
callable pmf).
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional, Sequence

import numpy as np

#: Name of the bit generator behind every sampler; recorded in reports.
RNG_NAME = "numpy.PCG64"

PMF_TOLERANCE = 1e-12


class SourceError(ValueError):
    """Raised for an invalid source specification or an out-of-range letter."""


def make_rng(seed) -> np.random.Generator:
    """Seeded generator using the fixed :data:`RNG_NAME` algorithm.

    ``seed`` may be an int or a :class:`numpy.random.SeedSequence`.
    """
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class SourceSpec:
    """An i.i.d. source.

    Parameters
    ----------
    kind : {"finite", "geometric", "custom"}
        ``finite`` uses ``probs``; ``geometric`` has
        ``p(a_i) = (1 - ratio) * ratio**(i - 1)``; ``custom`` is a countable
        source defined by the callable ``pmf_fn(letter_id) -> probability``.
    probs : tuple of float
        Letter probabilities for the finite case.
    ratio : float
        Geometric ratio, strictly inside (0, 1).
    seed : int
        Default seed for :func:`sample_sequence`.
    """

    kind: str = "finite"
    probs: tuple = ()
    ratio: float = 0.5
    seed: int = 0
    pmf_fn: Optional[Callable[[int], float]] = field(default=None, compare=False)
    name: str = ""

    def __post_init__(self):
        if self.kind == "finite":
            probs = tuple(float(p) for p in self.probs)
            object.__setattr__(self, "probs", probs)
            if not probs:
                raise SourceError("finite source needs a non-empty pmf")
            if any(not math.isfinite(p) or p < 0 for p in probs):
                raise SourceError(f"pmf entries must be finite and >= 0: {probs}")
            total = math.fsum(probs)
            if abs(total - 1.0) > PMF_TOLERANCE:
                raise SourceError(f"pmf sums to {total!r}, not 1")
        elif self.kind == "geometric":
            if not 0.0 < self.ratio < 1.0:
                raise SourceError(f"geometric ratio must lie in (0, 1), got {self.ratio}")
        elif self.kind == "custom":
            if self.pmf_fn is None:
                raise SourceError("custom source needs pmf_fn")
        else:
            raise SourceError(f"unknown source kind {self.kind!r}")

    # -- constructors -------------------------------------------------------

    @classmethod
    def finite(cls, probs: Iterable[float], seed: int = 0) -> "SourceSpec":
        return cls(kind="finite", probs=tuple(probs), seed=seed)

    @classmethod
    def uniform(cls, size: int, seed: int = 0) -> "SourceSpec":
        if size < 1:
            raise SourceError("uniform source needs at least one letter")
        return cls.finite([1.0 / size] * size, seed=seed)

    @classmethod
    def geometric(cls, ratio: float = 0.5, seed: int = 0) -> "SourceSpec":
        return cls(kind="geometric", ratio=float(ratio), seed=seed)

    @classmethod
    def custom(cls, pmf_fn: Callable[[int], float], name: str = "custom",
               seed: int = 0) -> "SourceSpec":
        return cls(kind="custom", pmf_fn=pmf_fn, name=name, seed=seed)

    # -- properties ---------------------------------------------------------

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"

    @property
    def size(self) -> Optional[int]:
        """Alphabet size, or ``None`` for countable sources."""
        return len(self.probs) if self.is_finite else None

    @property
    def support_size(self) -> Optional[int]:
        """Number of letters with non-zero probability (finite sources only)."""
        return sum(1 for p in self.probs if p > 0) if self.is_finite else None

    def descriptor(self) -> dict:
        if self.kind == "finite":
            return {"kind": "finite", "probs": list(self.probs), "seed": self.seed}
        if self.kind == "geometric":
            return {"kind": "geometric", "ratio": self.ratio, "seed": self.seed}
        return {"kind": "custom", "name": self.name, "seed": self.seed}

    # -- JSON ---------------------------------------------------------------

    def to_json(self) -> str:
        if self.kind == "custom":
            raise SourceError("custom sources are not serializable")
        return json.dumps(self.descriptor())

    @classmethod
    def from_dict(cls, doc: dict) -> "SourceSpec":
        kind = doc.get("kind")
        seed = int(doc.get("seed", 0))
        if kind == "finite":
            if "probs" not in doc:
                raise SourceError("finite source document lacks 'probs'")
            return cls.finite(doc["probs"], seed=seed)
        if kind == "geometric":
            if "ratio" not in doc:
                raise SourceError("geometric source document lacks 'ratio'")
            return cls.geometric(float(doc["ratio"]), seed=seed)
        if kind == "uniform":
            return cls.uniform(int(doc["size"]), seed=seed)
        raise SourceError(f"unknown source kind {kind!r}")

    @classmethod
    def from_json(cls, text: str) -> "SourceSpec":
        return cls.from_dict(json.loads(text))

    # -- probabilities ------------------------------------------------------

    def pmf(self, letter: int) -> float:
        return pmf(self, letter)

    def log2_pmf(self, letter: int) -> float:
        """``log2 p(letter)`` without underflow for the geometric family."""
        if self.kind == "geometric":
            return math.log2(1.0 - self.ratio) + letter * math.log2(self.ratio)
        p = pmf(self, letter)
        return math.log2(p) if p > 0 else -math.inf

    def iter_pmf(self) -> Iterator[tuple[int, float]]:
        """Yield ``(letter, p)`` for every letter in id order (endless if countable)."""
        if self.is_finite:
            yield from enumerate(self.probs)
            return
        i = 0
        while True:
            yield i, pmf(self, i)
            i += 1

    def truncation(self, tail_eps: float = 1e-9, max_letters: int = 10**7) -> tuple[np.ndarray, float]:
        """Leading probabilities whose tail mass is at most ``tail_eps``.

        Returns ``(probs, tail_mass)``.  Finite sources return the whole pmf
        with zero tail.
        """
        if self.is_finite:
            return np.asarray(self.probs, dtype=float), 0.0
        if self.kind == "geometric":
            # tail after k letters is ratio**k
            k = max(1, math.ceil(math.log(tail_eps) / math.log(self.ratio)))
            i = np.arange(k)
            return (1.0 - self.ratio) * self.ratio ** i, self.ratio ** k
        probs = []
        mass = 0.0
        for i, p in self.iter_pmf():
            probs.append(p)
            mass += p
            if 1.0 - mass <= tail_eps or i + 1 >= max_letters:
                break
        return np.asarray(probs, dtype=float), max(0.0, 1.0 - mass)


@dataclass
class CountTable:
    """Sparse letter counts ``nu^t(a)`` with running total ``t``."""

    counts: Counter = field(default_factory=Counter)
    total: int = 0

    def add(self, letter: int, k: int = 1) -> None:
        if letter < 0:
            raise SourceError(f"letters are non-negative ids, got {letter}")
        self.counts[letter] += k
        self.total += k

    def __getitem__(self, letter: int) -> int:
        return self.counts.get(letter, 0)

    def __len__(self) -> int:
        return len(self.counts)

    def as_dict(self) -> dict[int, int]:
        return dict(self.counts)

    def copy(self) -> "CountTable":
        return CountTable(Counter(self.counts), self.total)


def pmf(src: SourceSpec, a: int) -> float:
    """Exact probability of letter ``a`` under ``src``."""
    if a < 0:
        raise SourceError(f"letters are non-negative ids, got {a}")
    if src.kind == "finite":
        if a >= len(src.probs):
            raise SourceError(f"letter {a} outside alphabet of size {len(src.probs)}")
        return src.probs[a]
    if src.kind == "geometric":
        return (1.0 - src.ratio) * src.ratio ** a
    return float(src.pmf_fn(a))


def count(seq: Iterable[int]) -> CountTable:
    table = CountTable()
    for a in seq:
        table.add(int(a))
    return table


def _custom_sampler(src: SourceSpec, rng: np.random.Generator, t: int) -> np.ndarray:
    u = rng.random(t)
    cdf = []
    acc = 0.0
    for i, p in src.iter_pmf():
        acc += p
        cdf.append(acc)
        if acc >= u.max(initial=0.0) or 1.0 - acc < 1e-15 or i > 10**7:
            break
    idx = np.searchsorted(np.asarray(cdf), u, side="right")
    return np.minimum(idx, len(cdf) - 1)


def sample_array(src: SourceSpec, shape, rng: np.random.Generator) -> np.ndarray:
    """Draw an integer array of i.i.d. letters with the given shape."""
    shape = tuple(np.atleast_1d(shape)) if not isinstance(shape, tuple) else shape
    n = int(np.prod(shape)) if shape else 1
    if src.kind == "finite":
        p = np.asarray(src.probs)
        out = rng.choice(len(p), size=n, p=p / p.sum())
    elif src.kind == "geometric":
        out = rng.geometric(1.0 - src.ratio, size=n) - 1
    else:
        out = _custom_sampler(src, rng, n)
    return np.asarray(out, dtype=np.int64).reshape(shape)


def sample_sequence(src: SourceSpec, t: int, seed: Optional[int] = None) -> list[int]:
    """``t`` i.i.d. letters from ``src``; reproducible for a fixed seed.

    ``seed`` defaults to ``src.seed``.
    """
    if t < 0:
        raise SourceError(f"sequence length must be >= 0, got {t}")
    if t == 0:
        return []
    rng = make_rng(src.seed if seed is None else seed)
    return sample_array(src, (t,), rng).tolist()


def counts_matrix(samples: np.ndarray, width: Optional[int] = None) -> np.ndarray:
    """Per-row letter counts of a 2-D integer sample array."""
    samples = np.asarray(samples)
    n = samples.shape[0]
    if width is None:
        width = int(samples.max(initial=-1)) + 1
    out = np.zeros((n, max(width, 1)), dtype=np.int64)
    rows = np.repeat(np.arange(n), samples.shape[1])
    np.add.at(out, (rows, samples.ravel()), 1)
    return out


def validate_letters(seq: Sequence[int], size: Optional[int]) -> None:
    for a in seq:
        if a < 0 or (size is not None and a >= size):
            raise SourceError(f"letter {a} outside alphabet of size {size}")
