"""SOAR: deterministic manuscript scoring from term counts.

Score = cube root of (sota_count^2 * novel_count), counted outside
related-work (and, by default, bibliography) sections, displayed with a
"/10" suffix and thresholded into a read/don't-read recommendation.
"""

from .ingest import (
    EmptyDocumentError,
    IngestConfig,
    effective_tokens,
    load_abstract,
    load_latex,
    load_plain_text,
)
from .matcher import (
    MatchConfig,
    NovelMorphology,
    SotaVariants,
    count_novel,
    count_sota,
    count_terms,
)
from .model import (
    Document,
    Recommendation,
    SectionKind,
    SectionSpan,
    SectionTermCounts,
    SoarScore,
    SourceKind,
    TermCountReport,
    Token,
    Verdict,
)
from .scoring import (
    DEFAULT_THRESHOLD,
    FilterPolicy,
    SuccessionEvent,
    ThresholdPolicy,
    TopKPolicy,
    filter_submissions,
    format_display,
    recommend,
    soar_score,
    sota_succession,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_THRESHOLD",
    "Document",
    "EmptyDocumentError",
    "FilterPolicy",
    "IngestConfig",
    "MatchConfig",
    "NovelMorphology",
    "Recommendation",
    "SectionKind",
    "SectionSpan",
    "SectionTermCounts",
    "SoarScore",
    "SotaVariants",
    "SourceKind",
    "SuccessionEvent",
    "TermCountReport",
    "ThresholdPolicy",
    "Token",
    "TopKPolicy",
    "Verdict",
    "count_novel",
    "count_sota",
    "count_terms",
    "effective_tokens",
    "filter_submissions",
    "format_display",
    "load_abstract",
    "load_latex",
    "load_plain_text",
    "recommend",
    "soar_score",
    "sota_succession",
    "__version__",
]
