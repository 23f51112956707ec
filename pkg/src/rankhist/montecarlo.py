"""Monte-Carlo estimation of critical values and false-rejection rates.

No closed-form null distributions are used anywhere: the null distribution
of each flatness distance is simulated by drawing ``n`` uniforms per
replicate, binning them, and evaluating the distance. Replicate ``i`` of a
run always reads the same fixed slice of the ``(master_seed, "null")``
stream (see :mod:`rankhist.rng`), which makes every result a pure function
of the configuration: worker count and scheduling cannot change a single
bit of the output.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .distances import DistanceKind, distance_rows
from .errors import DomainError
from .rng import check_seed, replicate_uniforms, stream_key

# Replicates per work unit. Fixed: results must not depend on how blocks
# are spread over workers, only on the block contents themselves.
BLOCK_REPLICATES = 1 << 14

DEFAULT_REPLICATIONS = 1_000_000


@dataclass(frozen=True)
class MCConfig:
    """Replication count, master seed and an optional worker-count hint."""

    replications: int = DEFAULT_REPLICATIONS
    master_seed: int = 0
    worker_hint: int | None = None

    def __post_init__(self):
        if self.replications < 1:
            raise DomainError("replications must be >= 1")
        check_seed(self.master_seed)
        if self.worker_hint is not None and self.worker_hint < 1:
            raise DomainError("worker_hint must be >= 1 when given")


@dataclass(frozen=True)
class CriticalValueResult:
    kind: DistanceKind
    alpha: float
    k: int
    n: int
    c: float
    replications: int

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "alpha": self.alpha,
            "k": self.k,
            "n": self.n,
            "c": self.c,
            "replications": self.replications,
        }


def _block_ranges(total: int) -> list[tuple[int, int]]:
    return [(s, min(s + BLOCK_REPLICATES, total)) for s in range(0, total, BLOCK_REPLICATES)]


def bin_rows(values: np.ndarray, k: int) -> np.ndarray:
    """Per-row bin counts of a (replicates, n) matrix of values in [0, 1)."""
    nrows, n = values.shape
    idx = np.minimum((values * k).astype(np.int64), k - 1)
    idx += np.arange(nrows, dtype=np.int64)[:, None] * k
    return np.bincount(idx.ravel(), minlength=nrows * k).reshape(nrows, k)


def _null_block(args) -> np.ndarray:
    key, start, stop, kind_value, k, n = args
    u = replicate_uniforms(key, start, stop - start, n)
    heights = bin_rows(u, k) * (k / n)
    return distance_rows(heights, DistanceKind(kind_value))


def _run_blocks(worker, jobs, workers: int | None) -> list:
    if workers is None or workers <= 1 or len(jobs) <= 1:
        return [worker(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, jobs))


def _validate_k_n(k: int, n: int) -> None:
    if k < 2:
        raise DomainError(f"bin count must be >= 2, got {k}")
    if n < 1:
        raise DomainError(f"sample size must be >= 1, got {n}")


def simulate_null_distances(
    kind: DistanceKind, k: int, n: int, cfg: MCConfig
) -> np.ndarray:
    """Distances of ``cfg.replications`` histograms of uniform data.

    Each replicate bins ``n`` independent uniforms into ``k`` bins and
    evaluates the requested distance on the heights.
    """
    kind = DistanceKind.coerce(kind)
    _validate_k_n(k, n)
    key = stream_key(cfg.master_seed, "null")
    jobs = [
        (key, start, stop, kind.value, k, n)
        for start, stop in _block_ranges(cfg.replications)
    ]
    parts = _run_blocks(_null_block, jobs, cfg.worker_hint)
    return np.concatenate(parts) if len(parts) > 1 else parts[0]


def empirical_critical_value(distances: np.ndarray, alpha: float) -> float:
    """Smallest sampled value ``c`` with ``#{d > c} / N <= alpha``.

    With the distances sorted ascending this is the order statistic at
    position ``N - floor(alpha * N)`` (clamped to the minimum for
    ``alpha = 1``), which also resolves ties in the discrete support.
    """
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    d = np.sort(np.asarray(distances))
    m = max(d.size - math.floor(alpha * d.size), 1)
    return float(d[m - 1])


def critical_value(
    kind: DistanceKind,
    alpha: float,
    k: int,
    n: int,
    cfg: MCConfig,
    cache: "CriticalValueCache | None" = None,
) -> CriticalValueResult:
    """Monte-Carlo estimate of the test threshold ``c(alpha, k, n)``.

    ``c`` is the smallest value such that a histogram of ``n`` uniform data
    points in ``k`` bins has distance above ``c`` with probability at most
    ``alpha``.
    """
    kind = DistanceKind.coerce(kind)
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    _validate_k_n(k, n)
    if cache is not None:
        hit = cache.get(kind, alpha, k, n, cfg.replications, cfg.master_seed)
        if hit is not None:
            return CriticalValueResult(kind, alpha, k, n, hit, cfg.replications)
    c = empirical_critical_value(simulate_null_distances(kind, k, n, cfg), alpha)
    if cache is not None:
        cache.put(kind, alpha, k, n, cfg.replications, cfg.master_seed, c)
    return CriticalValueResult(kind, alpha, k, n, c, cfg.replications)


def false_reject_probability(
    kind: DistanceKind, c: float, k: int, n: int, cfg: MCConfig
) -> float:
    """Probability that uniform data lands strictly above threshold ``c``."""
    if c < 0:
        raise DomainError(f"threshold must be >= 0, got {c}")
    distances = simulate_null_distances(kind, k, n, cfg)
    return int(np.count_nonzero(distances > c)) / cfg.replications


class CriticalValueCache:
    """Advisory JSON cache of computed thresholds; always recomputable."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._table: dict[str, float] | None = None

    @staticmethod
    def _cache_key(kind, alpha, k, n, replications, master_seed) -> str:
        return f"{DistanceKind.coerce(kind).value}:{alpha!r}:{k}:{n}:{replications}:{master_seed}"

    def _load(self) -> dict[str, float]:
        if self._table is None:
            if self.path.exists():
                self._table = {
                    key: float(v) for key, v in json.loads(self.path.read_text()).items()
                }
            else:
                self._table = {}
        return self._table

    def get(self, kind, alpha, k, n, replications, master_seed) -> float | None:
        return self._load().get(self._cache_key(kind, alpha, k, n, replications, master_seed))

    def put(self, kind, alpha, k, n, replications, master_seed, c: float) -> None:
        table = self._load()
        table[self._cache_key(kind, alpha, k, n, replications, master_seed)] = float(c)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text(json.dumps(table, sort_keys=True, indent=2) + "\n")
