"""Additive (``nu + delta``) probability estimators used at every tree node."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

LOG2E = math.log2(math.e)

Number = Union[int, float, Fraction]


class EstimatorError(ValueError):
    pass


@dataclass(frozen=True)
class AdditiveEstimator:
    """Smoothing rule ``(nu + delta) / (total + delta * sigma)``.

    ``delta`` is held as an exact :class:`~fractions.Fraction` of its decimal
    literal, so the Krichevsky constant 0.50922 is exactly 25461/50000.  That
    exactness is what lets the coder work with integer frequencies.
    """

    delta: Fraction
    name: str = ""

    def __post_init__(self):
        d = self.delta
        if isinstance(d, float):
            d = Fraction(repr(d))
        elif isinstance(d, str):
            d = Fraction(d)
        else:
            d = Fraction(d)
        if d <= 0:
            raise EstimatorError(f"delta must be positive, got {self.delta}")
        object.__setattr__(self, "delta", d)
        if not self.name:
            object.__setattr__(self, "name", f"additive:{_fmt(d)}")

    @property
    def delta_float(self) -> float:
        return float(self.delta)

    def integer_weights(self) -> tuple[int, int]:
        """``(q, p)`` with ``delta = p / q``: a count ``nu`` has integer weight ``nu*q + p``."""
        return self.delta.denominator, self.delta.numerator

    def __call__(self, nu: Number, total: Number, sigma: int, exact: bool = False):
        return estimate(self, nu, total, sigma, exact=exact)


def _fmt(d: Fraction) -> str:
    s = f"{float(d):.12g}"
    return s if Fraction(s) == d else f"{d.numerator}/{d.denominator}"


LAPLACE = AdditiveEstimator(Fraction(1), "laplace")
# Truncated to the five decimals that are published; not a refined value.
KRICHEVSKY = AdditiveEstimator(Fraction("0.50922"), "krichevsky")


def estimate(e: AdditiveEstimator, nu: Number, total: Number, sigma: int,
             exact: bool = False):
    """Probability of a son with count ``nu`` at a node with count ``total``
    and ``sigma`` sons.

    With ``exact=True`` the result is a :class:`~fractions.Fraction`.

    >>> estimate(LAPLACE, 3, 4, 3, exact=True)
    Fraction(4, 7)
    """
    if sigma < 1:
        raise EstimatorError(f"a node needs at least one son, got sigma={sigma}")
    if nu < 0 or nu > total:
        raise EstimatorError(f"need 0 <= nu <= total, got nu={nu}, total={total}")
    if exact:
        return (Fraction(nu) + e.delta) / (Fraction(total) + e.delta * sigma)
    d = e.delta_float
    return (nu + d) / (total + d * sigma)


def from_name(name: str) -> AdditiveEstimator:
    """Parse ``"laplace"``, ``"krichevsky"`` or ``"additive:<delta>"``."""
    key = name.strip().lower()
    if key == "laplace":
        return LAPLACE
    if key in ("krichevsky", "kt"):
        return KRICHEVSKY
    if key.startswith("additive:"):
        try:
            return AdditiveEstimator(Fraction(key.split(":", 1)[1]))
        except (ValueError, ZeroDivisionError) as exc:
            raise EstimatorError(f"bad estimator spec {name!r}") from exc
    raise EstimatorError(f"unknown estimator {name!r}")


def laplace_bound(alphabet_size: int, t: int) -> float:
    """Upper bound ``(sigma - 1) log2(e) / (t + 1)`` on the Laplace
    predictor's average redundancy after ``t`` letters, in bits."""
    if alphabet_size < 2:
        raise EstimatorError("alphabet size must be at least 2")
    if t < 0:
        raise EstimatorError("t must be >= 0")
    return (alphabet_size - 1) * LOG2E / (t + 1)


def krichevsky_asymptote(alphabet_size: int) -> float:
    """Limit of ``2 t r^t`` for the Krichevsky predictor: ``(sigma - 1) log2(e)``."""
    return (alphabet_size - 1) * LOG2E
