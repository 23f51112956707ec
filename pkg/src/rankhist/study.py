"""Labeling-study machinery: deck generation and label analysis.

A study deck is a shuffled collection of synthetic histograms with
prescribed bin counts and L1 distances from flatness. Humans label each
histogram accept/reject; the analyses here compare those verdicts to the
threshold classifier over a grid of thresholds, locate the personally
calibrated acceptance threshold (plus pessimist/optimist companions), and
summarize how the verdicts relate to distance and bin count.
"""

from __future__ import annotations

import datetime
import json
import secrets
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .distances import ACCEPT, DistanceKind, ThresholdSet, classify, distance
from .errors import DomainError, HistogramGenerationError
from .ranks import Histogram
from .rng import derive_seed, stream_key

DEFAULT_BIN_COUNTS = (5, 6, 8, 10)
DEFAULT_TARGET_DISTANCES = (0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.6)
DEFAULT_PER_CATEGORY = 25
DEFAULT_STEPS = 50

# Threshold grids for misclassification curves, finer than the reported
# threshold precision. KL distances run smaller, hence the tighter grid.
_GRID_STEP = {DistanceKind.L2: 0.01, DistanceKind.L1: 0.01, DistanceKind.KL: 0.005}
_GRID_STOP = {DistanceKind.L2: 0.70, DistanceKind.L1: 0.70, DistanceKind.KL: 0.35}

# Aggregation window for acceptance-rate curves.
_RATE_WINDOW = {DistanceKind.L2: 0.1, DistanceKind.L1: 0.1, DistanceKind.KL: 0.05}


@dataclass(frozen=True)
class GeneratorSpec:
    """Recipe for one synthetic histogram: bin count, L1 target, step count."""

    k: int
    target_d: float
    steps: int = DEFAULT_STEPS
    seed: int = 0

    def __post_init__(self):
        if self.k < 2:
            raise DomainError(f"bin count must be >= 2, got {self.k}")
        if self.steps < 1:
            raise DomainError("steps must be >= 1")
        limit = 2.0 * (self.k - 1) / self.k
        if not 0.0 <= self.target_d < limit:
            raise DomainError(
                f"target distance {self.target_d} not attainable with {self.k} bins "
                f"(must lie in [0, {limit}))"
            )


def generate_histogram(spec: GeneratorSpec) -> Histogram:
    """Build a random histogram whose L1 distance from flat equals the target.

    Starting flat, each of ``steps`` rounds raises one bin and lowers
    another by ``target_d * k / (2 * steps)``. A bin that has ever been
    raised is only ever raised again, and vice versa, so every move adds
    ``target_d / steps`` of L1 distance and the total lands exactly on the
    target while the heights keep summing to ``k``. A lowered bin must keep
    enough height for the move; when no bin can absorb a decrease the
    generation fails and the caller retries with a fresh seed.
    """
    step = spec.target_d * spec.k / (2 * spec.steps)
    rng = np.random.Generator(np.random.Philox(key=stream_key(spec.seed, "histgen")))
    marks = np.zeros(spec.k, dtype=np.int64)
    moves = np.zeros(spec.k, dtype=np.int64)  # signed step count per bin

    for _ in range(spec.steps):
        up = np.flatnonzero(marks >= 0)
        j = int(up[rng.integers(up.size)])
        moves[j] += 1
        marks[j] = 1

        heights = 1.0 + moves * step
        down = np.flatnonzero((marks <= 0) & (heights >= step - 1e-12))
        if down.size == 0:
            raise HistogramGenerationError(
                f"no bin can be lowered further (k={spec.k}, target={spec.target_d}, "
                f"seed={spec.seed})"
            )
        j = int(down[rng.integers(down.size)])
        moves[j] -= 1
        marks[j] = -1

    heights = np.maximum(1.0 + moves * step, 0.0)
    return Histogram(bin_count=spec.k, heights=heights)


def generate_valid_histogram(spec: GeneratorSpec, max_attempts: int = 32) -> Histogram:
    """Retry dead-ended generations with seeds derived from ``spec.seed``."""
    last: HistogramGenerationError | None = None
    for attempt in range(max_attempts):
        candidate = spec if attempt == 0 else replace(
            spec, seed=derive_seed(spec.seed, "retry", attempt)
        )
        try:
            return generate_histogram(candidate)
        except HistogramGenerationError as exc:
            last = exc
    raise HistogramGenerationError(
        f"generation failed {max_attempts} times: {last}"
    )


def paper_categories() -> list[tuple[int, float]]:
    """The default deck categories: bin counts x target distances."""
    return [(k, d) for k in DEFAULT_BIN_COUNTS for d in DEFAULT_TARGET_DISTANCES]


@dataclass(frozen=True)
class DeckItem:
    histogram_id: str
    histogram: Histogram
    target_d: float

    @property
    def k(self) -> int:
        return self.histogram.bin_count

    def to_dict(self) -> dict:
        return {
            "id": self.histogram_id,
            "k": self.k,
            "heights": [float(h) for h in self.histogram.heights],
            "target_d": self.target_d,
        }

    def display_payload(self) -> dict:
        # Blinding: labelers never see the target distance or category.
        return {
            "histogram_id": self.histogram_id,
            "k": self.k,
            "heights": [float(h) for h in self.histogram.heights],
        }


@dataclass
class StudyDeck:
    items: list[DeckItem]
    shuffle_seed: int | None = None

    def __len__(self) -> int:
        return len(self.items)

    def __post_init__(self):
        self._by_id = {item.histogram_id: item for item in self.items}
        if len(self._by_id) != len(self.items):
            raise DomainError("duplicate histogram ids in deck")

    def item(self, histogram_id: str) -> DeckItem:
        try:
            return self._by_id[histogram_id]
        except KeyError:
            raise DomainError(f"unknown histogram id {histogram_id!r}") from None

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps([item.to_dict() for item in self.items], indent=2) + "\n"
        )

    @classmethod
    def load(cls, path: str | Path) -> "StudyDeck":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise DomainError(f"{path}: malformed deck file: {exc}") from exc
        if not isinstance(data, list):
            raise DomainError(f"{path}: deck file must be a JSON array")
        items = []
        for entry in data:
            try:
                items.append(
                    DeckItem(
                        histogram_id=str(entry["id"]),
                        histogram=Histogram(bin_count=int(entry["k"]), heights=entry["heights"]),
                        target_d=float(entry["target_d"]),
                    )
                )
            except (KeyError, TypeError) as exc:
                raise DomainError(f"{path}: malformed deck entry: {exc}") from exc
        return cls(items=items)


def generate_deck(
    categories: list[tuple[int, float]] | None = None,
    per_category: int = DEFAULT_PER_CATEGORY,
    shuffle_seed: int = 0,
    steps: int = DEFAULT_STEPS,
) -> StudyDeck:
    """Generate and shuffle the full study deck.

    Item ids are assigned after shuffling so they reveal nothing about the
    category. The same seed always reproduces the same deck.
    """
    if per_category < 1:
        raise DomainError("per_category must be >= 1")
    cats = paper_categories() if categories is None else list(categories)
    if not cats:
        raise DomainError("at least one category required")
    histograms: list[tuple[Histogram, float]] = []
    for ci, (k, target_d) in enumerate(cats):
        for ii in range(per_category):
            spec = GeneratorSpec(
                k=k,
                target_d=target_d,
                steps=steps,
                seed=derive_seed(shuffle_seed, "deck", ci, ii),
            )
            histograms.append((generate_valid_histogram(spec), target_d))
    rng = np.random.Generator(np.random.Philox(key=stream_key(shuffle_seed, "deck-shuffle")))
    order = rng.permutation(len(histograms))
    width = len(str(len(histograms)))
    items = [
        DeckItem(
            histogram_id=f"h{pos:0{width}d}",
            histogram=histograms[int(src)][0],
            target_d=histograms[int(src)][1],
        )
        for pos, src in enumerate(order, start=1)
    ]
    return StudyDeck(items=items, shuffle_seed=shuffle_seed)


@dataclass(frozen=True)
class LabelRecord:
    histogram_id: str
    verdict: str
    labeler_id: str
    timestamp: str

    def __post_init__(self):
        if self.verdict not in ("accept", "reject"):
            raise DomainError(f"verdict must be accept or reject, got {self.verdict!r}")

    @classmethod
    def new(cls, histogram_id: str, verdict: str, labeler_id: str | None = None) -> "LabelRecord":
        return cls(
            histogram_id=histogram_id,
            verdict=verdict,
            # anonymous by default: an opaque session token
            labeler_id=labeler_id or secrets.token_hex(8),
            timestamp=datetime.datetime.now(datetime.timezone.utc).isoformat(),
        )

    def to_dict(self) -> dict:
        return {
            "histogram_id": self.histogram_id,
            "verdict": self.verdict,
            "labeler_id": self.labeler_id,
            "timestamp": self.timestamp,
        }


def append_label(path: str | Path, record: LabelRecord) -> None:
    """Append one record to a JSON-lines label store."""
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")
        fh.flush()


def read_labels(path: str | Path) -> list[LabelRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            raw = json.loads(line)
            records.append(
                LabelRecord(
                    histogram_id=raw["histogram_id"],
                    verdict=raw["verdict"],
                    labeler_id=raw.get("labeler_id", ""),
                    timestamp=raw.get("timestamp", ""),
                )
            )
    return records


def synthetic_labels(
    deck: StudyDeck, kind: DistanceKind, c: float, labeler_id: str = "synthetic"
) -> list[LabelRecord]:
    """Labels produced by the threshold classifier itself (test oracle)."""
    kind = DistanceKind.coerce(kind)
    return [
        LabelRecord(
            histogram_id=item.histogram_id,
            verdict=classify(distance(item.histogram, kind), c),
            labeler_id=labeler_id,
            timestamp="",
        )
        for item in deck.items
    ]


def join_labels(
    deck: StudyDeck, labels: list[LabelRecord]
) -> list[tuple[DeckItem, LabelRecord]]:
    """Pair each label with its deck item; unknown ids are an error."""
    return [(deck.item(rec.histogram_id), rec) for rec in labels]


def default_c_grid(kind: DistanceKind) -> np.ndarray:
    kind = DistanceKind.coerce(kind)
    step = _GRID_STEP[kind]
    n_steps = round(_GRID_STOP[kind] / step)
    return np.round(np.arange(n_steps + 1) * step, 10)


@dataclass(frozen=True)
class MisclassificationCurve:
    kind: DistanceKind
    c_values: np.ndarray
    mcr: np.ndarray

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "c": [float(c) for c in self.c_values],
            "mcr": [float(m) for m in self.mcr],
        }


def misclassification_curve(
    joined: list[tuple[DeckItem, LabelRecord]],
    kind: DistanceKind,
    c_grid: np.ndarray | None = None,
) -> MisclassificationCurve:
    """Disagreement rate between the threshold classifier and the labels.

    For every threshold ``c`` in the grid, the classifier accepts items with
    distance at most ``c``; the curve reports the fraction of labeled items
    where that verdict differs from the human one.
"""
    if not joined:
        raise DomainError("no labels to analyze")
    kind = DistanceKind.coerce(kind)
    grid = default_c_grid(kind) if c_grid is None else np.asarray(c_grid, dtype=np.float64)
    if grid.size == 0:
        raise DomainError("threshold grid is empty")
    d = np.array([distance(item.histogram, kind) for item, _ in joined])
    accepted = np.array([rec.verdict == ACCEPT for _, rec in joined])
    predicted = d[:, None] <= grid[None, :]
    mcr = (predicted != accepted[:, None]).mean(axis=0)
    return MisclassificationCurve(kind=kind, c_values=grid, mcr=mcr)


@dataclass(frozen=True)
class ThresholdEstimate:
    """Personal thresholds read off a misclassification curve.

    ``c_acc`` minimizes the curve (smallest threshold on ties); the
    pessimist/optimist values sit at the nearest grid points, below and
    above, where the curve has climbed ``delta`` above its minimum. A side
    that never climbs that far falls back to the end of the grid and is
    marked as not crossed.
    """

    kind: DistanceKind
    c_minus: float
    c_acc: float
    c_plus: float
    mcr_min: float
    delta: float
    minus_crossed: bool
    plus_crossed: bool

    def to_threshold_set(self) -> ThresholdSet:
        return ThresholdSet(self.kind, self.c_minus, self.c_acc, self.c_plus)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "c_minus": self.c_minus,
            "c_acc": self.c_acc,
            "c_plus": self.c_plus,
            "mcr_min": self.mcr_min,
            "delta": self.delta,
            "minus_crossed": self.minus_crossed,
            "plus_crossed": self.plus_crossed,
        }


def derive_thresholds(curve: MisclassificationCurve, delta: float = 0.05) -> ThresholdEstimate:
    """Locate ``c_acc`` (argmin) and the ``+delta`` crossings around it."""
    if curve.c_values.size == 0:
        raise DomainError("empty curve")
    grid, mcr = curve.c_values, curve.mcr
    i_acc = int(np.argmin(mcr))  # first minimum = smallest c on ties
    mcr_min = float(mcr[i_acc])
    level = mcr_min + delta

    left = np.flatnonzero(mcr[:i_acc] >= level)
    right = np.flatnonzero(mcr[i_acc + 1 :] >= level)
    minus_crossed = left.size > 0
    plus_crossed = right.size > 0
    i_minus = int(left[-1]) if minus_crossed else 0
    i_plus = int(right[0]) + i_acc + 1 if plus_crossed else grid.size - 1
    return ThresholdEstimate(
        kind=curve.kind,
        c_minus=float(grid[min(i_minus, i_acc)]),
        c_acc=float(grid[i_acc]),
        c_plus=float(grid[max(i_plus, i_acc)]),
        mcr_min=mcr_min,
        delta=delta,
        minus_crossed=minus_crossed,
        plus_crossed=plus_crossed,
    )


@dataclass(frozen=True)
class AcceptanceRatePoint:
    bin_count: int
    lower: float
    upper: float
    rate: float
    n_labels: int

    def to_dict(self) -> dict:
        return {
            "k": self.bin_count,
            "lower": self.lower,
            "upper": self.upper,
            "rate": self.rate,
            "n_labels": self.n_labels,
        }


def acceptance_rate_curve(
    joined: list[tuple[DeckItem, LabelRecord]], kind: DistanceKind
) -> list[AcceptanceRatePoint]:
    """Acceptance rate per bin count, aggregated over distance windows.

    Distances are pooled into half-open intervals ``(a, a + w]`` of width
    0.1 (0.05 for the KL distance); empty intervals produce no point.
    """
    if not joined:
        raise DomainError("no labels to analyze")
    kind = DistanceKind.coerce(kind)
    w = _RATE_WINDOW[kind]
    buckets: dict[tuple[int, int], list[bool]] = {}
    for item, rec in joined:
        d = distance(item.histogram, kind)
        idx = int(np.ceil(d / w - 1e-9)) - 1  # interval (idx*w, (idx+1)*w]
        buckets.setdefault((item.k, idx), []).append(rec.verdict == ACCEPT)
    points = [
        AcceptanceRatePoint(
            bin_count=k,
            lower=round(idx * w, 10),
            upper=round((idx + 1) * w, 10),
            rate=float(np.mean(flags)),
            n_labels=len(flags),
        )
        for (k, idx), flags in sorted(buckets.items())
    ]
    return points


def bin_decision_correlation(joined: list[tuple[DeckItem, LabelRecord]]) -> float:
    """Pearson correlation between bin count and verdict (accept = 1)."""
    if len(joined) < 2:
        raise DomainError("need at least two labels for a correlation")
    ks = np.array([item.k for item, _ in joined], dtype=np.float64)
    ys = np.array([1.0 if rec.verdict == ACCEPT else 0.0 for _, rec in joined])
    if np.ptp(ks) == 0 or np.ptp(ys) == 0:
        raise DomainError("correlation undefined: constant bin count or verdict")
    ks -= ks.mean()
    ys -= ys.mean()
    return float((ks * ys).sum() / np.sqrt((ks**2).sum() * (ys**2).sum()))


@dataclass
class StudyAnalysis:
    n_labels: int
    mcr_curves: dict[DistanceKind, MisclassificationCurve]
    thresholds: dict[DistanceKind, ThresholdEstimate]
    acceptance_rates: dict[DistanceKind, list[AcceptanceRatePoint]]
    correlation: float | None
    correlation_error: str | None

    def to_dict(self) -> dict:
        return {
            "n_labels": self.n_labels,
            "mcr_curves": {k.value: c.to_dict() for k, c in self.mcr_curves.items()},
            "thresholds": {k.value: t.to_dict() for k, t in self.thresholds.items()},
            "acceptance_rate_curves": {
                k.value: [p.to_dict() for p in pts]
                for k, pts in self.acceptance_rates.items()
            },
            "bin_decision_correlation": self.correlation,
            "correlation_error": self.correlation_error,
        }


def analyze_study(
    deck: StudyDeck, labels: list[LabelRecord], delta: float = 0.05
) -> StudyAnalysis:
    """Run the full analysis: curves, thresholds, rates and correlation."""
    if not labels:
        raise DomainError("no labels to analyze")
    joined = join_labels(deck, labels)
    curves = {kind: misclassification_curve(joined, kind) for kind in DistanceKind}
    thresholds = {kind: derive_thresholds(curves[kind], delta) for kind in DistanceKind}
    rates = {kind: acceptance_rate_curve(joined, kind) for kind in DistanceKind}
    try:
        correlation, corr_error = bin_decision_correlation(joined), None
    except DomainError as exc:
        correlation, corr_error = None, str(exc)
    return StudyAnalysis(
        n_labels=len(labels),
        mcr_curves=curves,
        thresholds=thresholds,
        acceptance_rates=rates,
        correlation=correlation,
        correlation_error=corr_error,
    )
