"""Bin-count selection and flatness testing for ensemble-forecast rank histograms."""

from .alternatives import (
    AlternativeKind,
    PowerResult,
    rejection_probability,
    sample_sloped,
    sample_ushaped,
)
from .binsearch import (
    BinSearchResult,
    BinSearchSpec,
    false_reject_curve,
    optimal_bin_count,
)
from .distances import (
    ACCEPT,
    DEFAULT_THRESHOLDS,
    REJECT,
    DistanceKind,
    ThresholdSet,
    classify,
    distance,
)
from .errors import DomainError, HistogramGenerationError
from .montecarlo import (
    CriticalValueCache,
    CriticalValueResult,
    MCConfig,
    critical_value,
    false_reject_probability,
    simulate_null_distances,
)
from .ranks import (
    Histogram,
    RankSeries,
    TransformedSample,
    bin_samples,
    rank_histogram,
    transform_ranks,
)
from .study import (
    DeckItem,
    GeneratorSpec,
    LabelRecord,
    StudyAnalysis,
    StudyDeck,
    analyze_study,
    bin_decision_correlation,
    derive_thresholds,
    generate_deck,
    generate_histogram,
    generate_valid_histogram,
    misclassification_curve,
    acceptance_rate_curve,
)

__version__ = "0.1.0"

__all__ = [
    "ACCEPT",
    "DEFAULT_THRESHOLDS",
    "REJECT",
    "AlternativeKind",
    "BinSearchResult",
    "BinSearchSpec",
    "CriticalValueCache",
    "CriticalValueResult",
    "DeckItem",
    "DistanceKind",
    "DomainError",
    "GeneratorSpec",
    "Histogram",
    "HistogramGenerationError",
    "LabelRecord",
    "MCConfig",
    "PowerResult",
    "RankSeries",
    "StudyAnalysis",
    "StudyDeck",
    "ThresholdSet",
    "TransformedSample",
    "acceptance_rate_curve",
    "analyze_study",
    "bin_decision_correlation",
    "bin_samples",
    "classify",
    "critical_value",
    "derive_thresholds",
    "distance",
    "false_reject_curve",
    "false_reject_probability",
    "generate_deck",
    "generate_histogram",
    "generate_valid_histogram",
    "misclassification_curve",
    "optimal_bin_count",
    "rank_histogram",
    "rejection_probability",
    "sample_sloped",
    "sample_ushaped",
    "simulate_null_distances",
    "transform_ranks",
]
