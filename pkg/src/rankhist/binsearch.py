"""Choosing the bin count that aligns intuition with a formal test.

For a candidate range of bin counts the Monte-Carlo threshold
``c(alpha, k, n)`` is computed and compared to the inspector's acceptance
threshold ``c_target``. ``c(alpha, k, n)`` grows with ``k``, so the selected
bin count is the largest one whose threshold still sits at or below
``c_target``: with that many bins, an inspector who rejects above
``c_target`` commits a false reject with probability at most ``alpha``.
When even two bins overshoot the target, the closest threshold wins (ties
toward fewer bins).
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .distances import DistanceKind, distance_rows
from .errors import DomainError
from .montecarlo import (
    MCConfig,
    _block_ranges,
    bin_rows,
    empirical_critical_value,
    false_reject_probability,
)
from .rng import replicate_uniforms, stream_key


@dataclass(frozen=True)
class BinSearchSpec:
    kind: DistanceKind
    alpha: float
    n: int
    c_target: float
    k_min: int = 2
    k_max: int = 12
    mc: MCConfig = field(default_factory=MCConfig)

    def __post_init__(self):
        object.__setattr__(self, "kind", DistanceKind.coerce(self.kind))
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.n < 1:
            raise DomainError(f"sample size must be >= 1, got {self.n}")
        if self.c_target < 0:
            raise DomainError(f"c_target must be >= 0, got {self.c_target}")
        if self.k_min < 2 or self.k_max < self.k_min:
            raise DomainError("bin range must satisfy 2 <= k_min <= k_max")

    @property
    def k_range(self) -> range:
        return range(self.k_min, self.k_max + 1)


@dataclass(frozen=True)
class BinCandidate:
    k: int
    c: float
    gap: float  # |c - c_target|


@dataclass(frozen=True)
class BinSearchResult:
    k_opt: int
    per_k: tuple[BinCandidate, ...]
    spec: BinSearchSpec

    def to_dict(self) -> dict:
        return {
            "kind": self.spec.kind.value,
            "alpha": self.spec.alpha,
            "n": self.spec.n,
            "c_target": self.spec.c_target,
            "replications": self.spec.mc.replications,
            "k_opt": self.k_opt,
            "per_k": [{"k": row.k, "c": row.c, "gap": row.gap} for row in self.per_k],
        }


def _multi_k_block(args) -> np.ndarray:
    key, start, stop, kind_value, ks, n = args
    u = replicate_uniforms(key, start, stop - start, n)
    kind = DistanceKind(kind_value)
    out = np.empty((len(ks), stop - start))
    for i, k in enumerate(ks):
        out[i] = distance_rows(bin_rows(u, k) * (k / n), kind)
    return out


def _null_distances_by_k(spec: BinSearchSpec) -> dict[int, np.ndarray]:
    # One pass over the uniform stream serves every candidate k; replicate i
    # sees exactly the draws it would see in a standalone critical_value run.
    cfg = spec.mc
    key = stream_key(cfg.master_seed, "null")
    ks = tuple(spec.k_range)
    jobs = [
        (key, start, stop, spec.kind.value, ks, spec.n)
        for start, stop in _block_ranges(cfg.replications)
    ]
    if cfg.worker_hint is None or cfg.worker_hint <= 1 or len(jobs) <= 1:
        parts = [_multi_k_block(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=cfg.worker_hint) as pool:
            parts = list(pool.map(_multi_k_block, jobs))
    stacked = np.concatenate(parts, axis=1) if len(parts) > 1 else parts[0]
    return {k: stacked[i] for i, k in enumerate(ks)}


def select_bin_count(candidates: list[BinCandidate], c_target: float) -> int:
    """Largest k with ``c <= c_target``; closest gap (smaller k wins ties) otherwise."""
    below = [row.k for row in candidates if row.c <= c_target]
    if below:
        return max(below)
    return min(candidates, key=lambda row: (row.gap, row.k)).k


def optimal_bin_count(spec: BinSearchSpec) -> BinSearchResult:
    """Evaluate every candidate bin count and pick the calibrated one.

    ``per_k`` reports the simulated threshold and its distance to the
    target for each candidate; the thresholds are bit-identical to what
    :func:`rankhist.montecarlo.critical_value` returns for the same seed.
    """
    distances = _null_distances_by_k(spec)
    per_k = [
        BinCandidate(
            k=k,
            c=(c := empirical_critical_value(distances[k], spec.alpha)),
            gap=abs(c - spec.c_target),
        )
        for k in spec.k_range
    ]
    return BinSearchResult(
        k_opt=select_bin_count(per_k, spec.c_target),
        per_k=tuple(per_k),
        spec=spec,
    )


@dataclass(frozen=True)
class FalseRejectCell:
    k: int
    n: int
    probability: float


def false_reject_curve(
    kind: DistanceKind,
    c: float,
    k_list: list[int],
    n_list: list[int],
    cfg: MCConfig,
) -> list[FalseRejectCell]:
    """False-rejection probability at threshold ``c`` for each (k, n) cell."""
    kind = DistanceKind.coerce(kind)
    cells = []
    for n in n_list:
        for k in k_list:
            cells.append(
                FalseRejectCell(k=k, n=n, probability=false_reject_probability(kind, c, k, n, cfg))
            )
    return cells
