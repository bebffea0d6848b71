"""Redundancy measurement: per-history divergence, Monte-Carlo averages,
running (cumulative) averages, worst-case sweeps and CSV reports.

Every predictor handed to this module must provide

* ``fresh()`` -- an empty copy with the same configuration,
* ``update(letter)`` and ``predict(letter)`` -- the sequential interface,
* ``batch_predict(counts)`` -- predictions for many histories given an
  ``(N, M)`` count matrix, returning an ``(N, M')`` matrix with ``M' >= K``
  for the ``K`` letters the source can emit (after tail truncation),
* ``descriptor()`` -- a JSON-able description.

All predictors in this package depend on the history only through its letter
counts, so Monte-Carlo runs sample count vectors (finite sources) or letter
arrays (countable sources) instead of replaying sequences one by one.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .alphabet import RNG_NAME, SourceSpec, counts_matrix, make_rng, sample_array
from .estimators import LOG2E

#: Largest ``|A|**t`` handled by exhaustive enumeration.
EXACT_LIMIT = 4096
#: Trials per replica block.  Fixed so results never depend on scheduling.
BLOCK = 2048


class DivergenceError(ArithmeticError):
    """A predicted probability is zero where the true one is positive."""


def divergence_step(p, q, tail_eps: float = 0.0) -> float:
    """Kullback-Leibler divergence ``D(p || q)`` in bits.

    ``p`` and ``q`` are aligned probability vectors.  Terms with ``p(a) = 0``
    contribute nothing.  For truncated countable pmfs, pass the leading part
    of both; ``tail_eps`` only documents the mass that was dropped and is
    checked against ``1 - sum(p)``.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {q.shape}")
    if tail_eps and 1.0 - p.sum() > tail_eps + 1e-12:
        raise ValueError(f"dropped mass {1.0 - p.sum():.3g} exceeds tail_eps={tail_eps}")
    mask = p > 0
    if np.any(q[mask] <= 0):
        bad = int(np.flatnonzero(mask & (q <= 0))[0])
        raise DivergenceError(f"q({bad}) = 0 while p({bad}) > 0: divergence is infinite")
    pm, qm = p[mask], q[mask]
    return float(np.sum(pm * (np.log2(pm) - np.log2(qm))))


def _batch_divergence(p: np.ndarray, logp: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Row-wise ``D(p || q_row)`` over the positive-mass letters of ``p``."""
    K = p.shape[0]
    qk = q[:, :K]
    if np.any(qk <= 0):
        raise DivergenceError("predictor assigned zero probability to a possible letter")
    return (p * logp).sum() - np.log2(qk) @ p


@dataclass(frozen=True)
class RedundancyEstimate:
    """Average redundancy ``r^t`` at one horizon."""

    t: int
    mean: float
    stderr: float
    trials: int
    exact: bool = False
    remainder: float = 0.0

    @property
    def interval(self) -> tuple[float, float]:
        """Three-standard-error interval."""
        return self.mean - 3 * self.stderr, self.mean + 3 * self.stderr


def _support(src: SourceSpec, tail_eps: float) -> tuple[np.ndarray, float]:
    probs, tail = src.truncation(tail_eps)
    return probs, tail


def tail_remainder(src: SourceSpec, path_length: Optional[Callable[[int], int]],
                   tail_eps: float) -> float:
    """``log2(e) * sum over dropped letters of p(a) * chi(a)``.

    ``path_length(a)`` is the number of vertices on the root-to-leaf path of
    ``a``; for finite sources the remainder is zero.
    """
    if src.is_finite or path_length is None:
        return 0.0
    probs, _ = src.truncation(tail_eps)
    acc = 0.0
    a = len(probs)
    for _ in range(10**6):
        term = src.pmf(a) * path_length(a)
        acc += term
        a += 1
        if acc > 0 and term <= 1e-18 * acc:
            break
    return LOG2E * acc


def _exact_average(predictor, src: SourceSpec, t: int) -> float:
    """Exhaustive expectation over ``A^t`` using the sequential interface."""
    probs = np.asarray(src.probs)
    letters = np.flatnonzero(probs > 0)
    p = probs[letters]
    logp = np.log2(p)
    total = 0.0
    n = len(probs)
    for seq in itertools.product(range(n), repeat=t):
        weight = math.prod(probs[a] for a in seq)
        if weight == 0.0:
            continue
        pred = predictor.fresh()
        for a in seq:
            pred.update(a)
        q = np.array([pred.predict(int(a)) for a in letters])
        if np.any(q <= 0):
            raise DivergenceError("predictor assigned zero probability to a possible letter")
        total += weight * float(np.sum(p * (logp - np.log2(q))))
    return total


def _block_seeds(seed: int, trials: int) -> list[tuple[np.random.SeedSequence, int]]:
    n_blocks = max(1, math.ceil(trials / BLOCK))
    children = np.random.SeedSequence(seed).spawn(n_blocks)
    sizes = [BLOCK] * (n_blocks - 1) + [trials - BLOCK * (n_blocks - 1)]
    return list(zip(children, sizes))


def _sample_counts(src: SourceSpec, t: int, n: int, rng, width: int) -> np.ndarray:
    if src.is_finite:
        counts = rng.multinomial(t, np.asarray(src.probs), size=n)
    elif t == 0:
        counts = np.zeros((n, 1), dtype=np.int64)
    else:
        counts = counts_matrix(sample_array(src, (n, t), rng))
    if counts.shape[1] < width:
        counts = np.pad(counts, ((0, 0), (0, width - counts.shape[1])))
    return counts


def _predictor_width(predictor, k: int) -> int:
    size = getattr(predictor, "size", None)
    return max(k, size or 0)


def history_divergences(predictor, src: SourceSpec, t: int, trials: int,
                        seed: int = 0, tail_eps: float = 1e-9) -> np.ndarray:
    """Sampled per-history divergences ``r_{gamma,p}(x_1..x_t)`` (length ``trials``)."""
    probs, _ = _support(src, tail_eps)
    mask = probs > 0
    letters = np.flatnonzero(mask)
    p = probs[letters]
    logp = np.log2(p)
    width = _predictor_width(predictor, len(probs))
    out = []
    for child, size in _block_seeds(seed, trials):
        rng = make_rng(child)
        counts = _sample_counts(src, t, size, rng, width)
        q = predictor.batch_predict(counts)
        out.append(_batch_divergence(p, logp, q[:, letters]))
    return np.concatenate(out)


def average_redundancy(predictor, src: SourceSpec, t: int, trials: int = 10**4,
                       seed: int = 0, exact: Optional[bool] = None,
                       tail_eps: float = 1e-9,
                       path_length: Optional[Callable[[int], int]] = None) -> RedundancyEstimate:
    """Average redundancy ``r^t(p || predictor)``.

    With ``exact=None`` exhaustive enumeration is used whenever the source is
    finite and ``|A|**t <= 4096``; otherwise ``trials`` histories are sampled.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if t < 0:
        raise ValueError("t must be >= 0")
    feasible = src.is_finite and len(src.probs) ** t <= EXACT_LIMIT
    if exact is None:
        exact = feasible
    if exact:
        if not feasible:
            raise ValueError(f"exact mode needs a finite source with |A|^t <= {EXACT_LIMIT}")
        return RedundancyEstimate(t, _exact_average(predictor, src, t), 0.0, 0, exact=True)
    r = history_divergences(predictor, src, t, trials, seed, tail_eps)
    stderr = float(r.std(ddof=1) / math.sqrt(trials)) if trials > 1 else math.inf
    return RedundancyEstimate(t, float(r.mean()), stderr, trials,
                              remainder=tail_remainder(src, path_length, tail_eps))


def inverse_count_mean(mass: float, t: int, trials: int = 10**5, seed: int = 0) -> RedundancyEstimate:
    """Monte-Carlo mean of ``mass / (count + 1)`` with ``count ~ Binomial(t, mass)``.

    ``count`` is how often a vertex of probability ``mass`` is visited in
    ``t`` letters; the mean never exceeds ``min(mass, 1/(t + 1))``.
    """
    if not 0.0 <= mass <= 1.0:
        raise ValueError("mass must lie in [0, 1]")
    vals = []
    for child, size in _block_seeds(seed, trials):
        vals.append(mass / (make_rng(child).binomial(t, mass, size=size) + 1.0))
    v = np.concatenate(vals)
    stderr = float(v.std(ddof=1) / math.sqrt(trials)) if trials > 1 else math.inf
    return RedundancyEstimate(t, float(v.mean()), stderr, trials)


def chi_square_bound(p, q) -> float:
    """``log2(e) * (sum p(a)^2 / q(a) - 1)``, an upper bound on ``D(p || q)`` in bits."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    mask = p > 0
    if np.any(q[mask] <= 0):
        return math.inf
    return LOG2E * (float(np.sum(p[mask] ** 2 / q[mask])) - 1.0)


def running_average(r: Sequence[float]) -> np.ndarray:
    """``R^t = (1/t) * sum_{i=1..t} r^i`` for ``t = 1..len(r)``."""
    r = np.asarray(r, dtype=float)
    return np.cumsum(r) / np.arange(1, len(r) + 1)


@dataclass(frozen=True)
class CumulativeTable:
    t: np.ndarray
    r: np.ndarray
    r_stderr: np.ndarray
    R: np.ndarray
    R_stderr: np.ndarray
    trials: int


def cumulative_redundancy(predictor, src: SourceSpec, t_max: int, trials: int = 1000,
                          seed: int = 0, tail_eps: float = 1e-9) -> CumulativeTable:
    """Per-step divergences ``r^i`` and running averages ``R^i`` along sampled
    trajectories, ``i = 1..t_max``."""
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    probs, _ = _support(src, tail_eps)
    letters = np.flatnonzero(probs > 0)
    p = probs[letters]
    logp = np.log2(p)
    r_blocks, R_blocks = [], []
    for child, size in _block_seeds(seed, trials):
        rng = make_rng(child)
        seqs = sample_array(src, (size, t_max), rng)
        width = _predictor_width(predictor, max(len(probs), int(seqs.max()) + 1))
        counts = np.zeros((size, width), dtype=np.int64)
        rows = np.arange(size)
        r = np.empty((size, t_max))
        for i in range(t_max):
            counts[rows, seqs[:, i]] += 1
            q = predictor.batch_predict(counts)
            r[:, i] = _batch_divergence(p, logp, q[:, letters])
        r_blocks.append(r)
        R_blocks.append(np.cumsum(r, axis=1) / np.arange(1, t_max + 1))
    r = np.concatenate(r_blocks)
    R = np.concatenate(R_blocks)
    scale = math.sqrt(trials) if trials > 1 else math.inf
    ddof = 1 if trials > 1 else 0
    return CumulativeTable(np.arange(1, t_max + 1), r.mean(axis=0), r.std(axis=0, ddof=ddof) / scale,
                           R.mean(axis=0), R.std(axis=0, ddof=ddof) / scale, trials)


@dataclass(frozen=True)
class SweepResult:
    """Maximum over a source grid.  A lower bound on the true supremum."""

    max_estimate: RedundancyEstimate
    argmax: int
    estimates: list
    sources: list
    is_lower_bound: bool = True


def worst_case_sweep(predictor, sources: Sequence[SourceSpec], t: int, trials: int = 10**4,
                     seed: int = 0, exact: Optional[bool] = None,
                     tail_eps: float = 1e-9) -> SweepResult:
    """Largest average redundancy over a grid of sources (same seed for each)."""
    if not sources:
        raise ValueError("source grid is empty")
    ests = [average_redundancy(predictor, s, t, trials, seed, exact=exact, tail_eps=tail_eps)
            for s in sources]
    best = max(range(len(ests)), key=lambda i: ests[i].mean)
    return SweepResult(ests[best], best, ests, list(sources))


# -- reports -----------------------------------------------------------------

CSV_COLUMNS = ("t", "r_t", "stderr", "bound", "remainder", "R_t")


@dataclass
class ReportRow:
    t: int
    r_t: float
    stderr: float
    bound: Optional[float] = None
    remainder: float = 0.0
    R_t: Optional[float] = None


@dataclass
class RedundancyReport:
    predictor: dict
    source: dict
    trials: int
    seed: int
    rows: list = field(default_factory=list)
    rng: str = RNG_NAME
    note: str = ""

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in self.rows:
            w.writerow([row.t, _num(row.r_t), _num(row.stderr), _num(row.bound),
                        _num(row.remainder), _num(row.R_t)])
        return buf.getvalue()

    def format_table(self) -> str:
        lines = [f"predictor: {self.predictor}", f"source: {self.source}",
                 f"trials={self.trials} seed={self.seed} rng={self.rng}"]
        if self.note:
            lines.append(self.note)
        lines.append(f"{'t':>8} {'r_t':>14} {'stderr':>12} {'t*r_t':>10} {'bound':>12} {'remainder':>11}")
        for row in self.rows:
            bound = "-" if row.bound is None else f"{row.bound:.6g}"
            lines.append(f"{row.t:>8} {row.r_t:>14.6g} {row.stderr:>12.3g} "
                         f"{row.t * row.r_t:>10.4g} {bound:>12} {row.remainder:>11.3g}")
        return "\n".join(lines)


def _num(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


def redundancy_table(predictor, src: SourceSpec, t_grid: Sequence[int], trials: int,
                     seed: int = 0, bound: Optional[Callable[[int], float]] = None,
                     exact: Optional[bool] = False, tail_eps: float = 1e-9,
                     path_length: Optional[Callable[[int], int]] = None,
                     note: str = "") -> RedundancyReport:
    """Report with one row per horizon in ``t_grid``."""
    report = RedundancyReport(predictor.descriptor(), src.descriptor(), trials, seed, note=note)
    for t in t_grid:
        est = average_redundancy(predictor, src, t, trials, seed, exact=exact,
                                 tail_eps=tail_eps, path_length=path_length)
        report.rows.append(ReportRow(t, est.mean, est.stderr,
                                     None if bound is None else bound(t), est.remainder))
    return report
