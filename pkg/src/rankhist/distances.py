"""Flatness distances and the threshold classifier.

Three scalar distances between a histogram and the perfectly flat histogram
back the three classical uniformity tests: the squared distance (chi-square
test), the absolute distance (reliability-index test) and the entropy form
(Kullback-Leibler divergence of the bin frequencies from uniform).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError

ACCEPT = "accept"
REJECT = "reject"


class DistanceKind(str, Enum):
    L2 = "l2"
    L1 = "l1"
    KL = "kl"

    @classmethod
    def coerce(cls, value) -> "DistanceKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DomainError(
                f"unknown distance kind {value!r}; expected one of "
                f"{[m.value for m in cls]}"
            ) from None


@dataclass(frozen=True)
class ThresholdSet:
    """Pessimist / best-fit / optimist acceptance thresholds for one distance."""

    kind: DistanceKind
    c_minus: float
    c_acc: float
    c_plus: float

    def __post_init__(self):
        if not (0 <= self.c_minus <= self.c_acc <= self.c_plus):
            raise DomainError(
                "thresholds must satisfy 0 <= c_minus <= c_acc <= c_plus"
            )


# Shipped defaults calibrated by the labeling study; use `rankhist study`
# to derive personal values.
DEFAULT_THRESHOLDS: dict[DistanceKind, ThresholdSet] = {
    DistanceKind.L2: ThresholdSet(DistanceKind.L2, 0.05, 0.10, 0.20),
    DistanceKind.L1: ThresholdSet(DistanceKind.L1, 0.15, 0.25, 0.35),
    DistanceKind.KL: ThresholdSet(DistanceKind.KL, 0.02, 0.05, 0.09),
}


def _as_heights(histogram_or_heights) -> np.ndarray:
    heights = getattr(histogram_or_heights, "heights", histogram_or_heights)
    return np.asarray(heights, dtype=np.float64)


def distance_rows(heights: np.ndarray, kind: DistanceKind) -> np.ndarray:
    """Distance of each row of a (replicates, bins) height matrix.

    Hot path for the Monte-Carlo simulators; inputs are trusted to be
    non-negative rows of valid heights.
    """
    kind = DistanceKind.coerce(kind)
    h = np.asarray(heights, dtype=np.float64)
    if kind is DistanceKind.L2:
        return ((h - 1.0) ** 2).mean(axis=-1)
    if kind is DistanceKind.L1:
        return np.abs(h - 1.0).mean(axis=-1)
    terms = np.zeros_like(h)
    pos = h > 0
    terms[pos] = h[pos] * np.log(h[pos])
    return terms.mean(axis=-1)


def distance(histogram_or_heights, kind: DistanceKind) -> float:
    """Distance from flatness: ``(1/k) sum f(h_j)`` with ``f`` per kind.

    L2 uses ``(h-1)^2``, L1 uses ``|h-1|`` and KL uses ``h log h`` (natural
    logarithm, with ``0 log 0 = 0``).
    """
    h = _as_heights(histogram_or_heights)
    if h.ndim != 1 or h.size == 0:
        raise DomainError("expected a non-empty 1-D sequence of heights")
    if (h < 0).any():
        raise DomainError("heights must be non-negative")
    return float(distance_rows(h, kind))


def classify(d: float, c: float) -> str:
    """Accept unless the observed distance strictly exceeds the threshold."""
    return REJECT if d > c else ACCEPT
