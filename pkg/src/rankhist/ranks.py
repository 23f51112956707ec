"""Randomized rank transformation and histogram binning.

Observation ranks from an ``m``-member ensemble live on ``{1, ..., m+1}``.
Dividing the unit interval into ``m+1`` rank cells and placing each rank
uniformly at random inside its cell,

    value_i = (r_i - 1 + U_i) / (m + 1),    U_i ~ Uniform[0, 1),

yields values that are exactly uniform on ``[0, 1)`` whenever the ranks are
uniform, so the transformed sample can be binned into any number of bins.
When the bin count divides ``m + 1`` the randomization never moves a rank
across a bin edge and the histogram coincides with the plain rank histogram.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError
from .rng import stream_key, uniform_block

_SUM_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class RankSeries:
    """Observed ranks ``r_1..r_n`` in ``{1..m+1}`` for ensemble size ``m``."""

    ensemble_size: int
    ranks: np.ndarray

    def __post_init__(self):
        if self.ensemble_size < 1:
            raise DomainError(f"ensemble size must be >= 1, got {self.ensemble_size}")
        ranks = np.asarray(self.ranks, dtype=np.int64)
        if ranks.ndim != 1 or ranks.size < 1:
            raise DomainError("ranks must be a non-empty 1-D sequence")
        top = self.ensemble_size + 1
        bad = np.flatnonzero((ranks < 1) | (ranks > top))
        if bad.size:
            i = int(bad[0])
            raise DomainError(
                f"rank {int(ranks[i])} at index {i} outside {{1..{top}}}"
            )
        ranks.flags.writeable = False
        object.__setattr__(self, "ranks", ranks)

    def __len__(self) -> int:
        return int(self.ranks.size)


@dataclass(frozen=True, eq=False)
class TransformedSample:
    """Ranks mapped to ``[0, 1)`` plus the seed that produced the jitter."""

    values: np.ndarray
    seed_trace: int


@dataclass(eq=False)
class Histogram:
    """A ``k``-bin histogram normalized so a flat histogram has height 1.

    ``heights[j] = k * counts[j] / n``, hence ``sum(heights) == k``.
    Histograms built directly from prescribed heights (the study deck) carry
    no counts; ``counts`` and ``sample_size`` are then ``None``.
    """

    bin_count: int
    heights: np.ndarray
    counts: np.ndarray | None = None
    sample_size: int | None = None

    def __post_init__(self):
        if self.bin_count < 2:
            raise DomainError(f"bin count must be >= 2, got {self.bin_count}")
        heights = np.asarray(self.heights, dtype=np.float64)
        if heights.shape != (self.bin_count,):
            raise DomainError("heights must have one entry per bin")
        if (heights < 0).any():
            raise DomainError("heights must be non-negative")
        if abs(float(heights.sum()) - self.bin_count) > _SUM_TOL * self.bin_count:
            raise DomainError("heights must sum to the bin count")
        self.heights = heights
        if self.counts is not None:
            counts = np.asarray(self.counts, dtype=np.int64)
            if counts.shape != (self.bin_count,) or (counts < 0).any():
                raise DomainError("counts must be non-negative, one per bin")
            n = int(counts.sum())
            if self.sample_size is None:
                self.sample_size = n
            elif self.sample_size != n:
                raise DomainError("sample_size does not match the count total")
            if n < 1:
                raise DomainError("histogram must contain at least one sample")
            expected = counts * (self.bin_count / n)
            if not np.allclose(heights, expected, atol=1e-9):
                raise DomainError("heights inconsistent with counts")
            self.counts = counts

    def to_dict(self) -> dict:
        out = {"k": self.bin_count, "heights": [float(h) for h in self.heights]}
        if self.counts is not None:
            out["counts"] = [int(c) for c in self.counts]
            out["n"] = int(self.sample_size)
        return out

    @classmethod
    def from_dict(cls, payload: dict) -> "Histogram":
        try:
            k = int(payload["k"])
            heights = payload["heights"]
        except (KeyError, TypeError) as exc:
            raise DomainError(f"histogram payload missing field: {exc}") from exc
        counts = payload.get("counts")
        n = payload.get("n")
        return cls(
            bin_count=k,
            heights=heights,
            counts=None if counts is None else counts,
            sample_size=None if n is None else int(n),
        )


def transform_values(ranks: np.ndarray, ensemble_size: int, u: np.ndarray) -> np.ndarray:
    """The bare transformation ``(r - 1 + u) / (m + 1)``."""
    out = (np.asarray(ranks, dtype=np.float64) - 1.0 + u) / (ensemble_size + 1)
    # (m + u) / (m + 1) can round up to exactly 1.0 when u is within one ulp
    # of 1; clamp to keep the half-open [0, 1) contract
    return np.minimum(out, np.nextafter(1.0, 0.0))


def transform_ranks(series: RankSeries, seed: int) -> TransformedSample:
    """Map integer ranks to ``[0, 1)`` using seeded uniform jitter.

    Observation ``i`` consumes position ``i`` of the ``(seed, "transform")``
    stream, so the output is reproducible and independent of evaluation
    order.
    """
    u = uniform_block(stream_key(seed, "transform"), 0, len(series))
    values = transform_values(series.ranks, series.ensemble_size, u)
    values.flags.writeable = False
    return TransformedSample(values=values, seed_trace=seed)


def bin_samples(values, bin_count: int) -> Histogram:
    """Count values from ``[0, 1)`` into ``bin_count`` equal half-open bins.

    Bin ``j`` (1-based) covers ``[(j-1)/k, j/k)``; heights are rescaled so
    that a perfectly even split has height one in every bin.
    """
    if bin_count < 2:
        raise DomainError(f"bin count must be >= 2, got {bin_count}")
    vals = np.asarray(values, dtype=np.float64)
    if vals.ndim != 1 or vals.size == 0:
        raise DomainError("no samples")
    bad = np.flatnonzero((vals < 0.0) | (vals >= 1.0))
    if bad.size:
        i = int(bad[0])
        raise DomainError(f"value {vals[i]!r} at index {i} outside [0, 1)")
    idx = np.minimum((vals * bin_count).astype(np.int64), bin_count - 1)
    counts = np.bincount(idx, minlength=bin_count)
    n = vals.size
    return Histogram(
        bin_count=bin_count,
        heights=counts * (bin_count / n),
        counts=counts,
        sample_size=n,
    )


def rank_histogram(series: RankSeries, bin_count: int, seed: int) -> Histogram:
    """Transform ranks and bin them in one step."""
    return bin_samples(transform_ranks(series, seed).values, bin_count)


def load_ranks(path: str | Path) -> np.ndarray:
    """Read ranks from a JSON array or a one-column CSV with header ``rank``."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json" or text.lstrip().startswith("["):
        data = json.loads(text)
        if not isinstance(data, list):
            raise DomainError(f"{path}: expected a JSON array of ranks")
        return np.asarray(data, dtype=np.int64)
    rows = [row for row in csv.reader(text.splitlines()) if row]
    if not rows:
        raise DomainError(f"{path}: no ranks found")
    if rows[0] and not rows[0][0].strip().lstrip("-").isdigit():
        rows = rows[1:]  # header line
    try:
        return np.asarray([int(row[0]) for row in rows], dtype=np.int64)
    except ValueError as exc:
        raise DomainError(f"{path}: non-integer rank: {exc}") from exc
