"""dateval: discriminability-aware evaluation for audio captions and QA.

The package scores free-text candidates against reference sets with a
metric that pairs tf-idf weighted embedding similarity with a
cross-sample rank term, aggregates per-sample scores into hierarchical
benchmark tables, applies the benchmark's quality-control filters, and
analyzes how well metrics separate right, safe and wrong answers.
"""

__version__ = "0.1.0"

from .aggregation import (
    CAPTION_CELLS,
    QA_CELLS,
    CaptionBreakdown,
    CellScores,
    MissingCellError,
    QaBreakdown,
    per_cell_scores,
    score_caption,
    score_qa,
)
from .analysis import (
    CdfCurve,
    DiscriminationReport,
    MetricDiscrimination,
    PROXY_NOTE,
    QualityTier,
    build_tier_corpora,
    cdf_csv,
    default_safe_template,
    discrimination_report,
    empirical_cdf,
    median_span,
    report_to_dict,
    seeded_derangement,
)
from .baselines import BaselineResult, MetricId, bleu1, bleu1_corpus, cosine_baseline
from .embedding import (
    DEFAULT_DIMENSION,
    DEFAULT_SEED,
    EmbeddingMatrix,
    EmbedServiceError,
    RemoteBackend,
    TestBackend,
    TokenizedText,
    tokenize,
)
from .metric import (
    DateResult,
    SampleScore,
    SimilarityMatrix,
    build_matrix,
    clamped_cosine,
    date_corpus,
    date_sample,
    discriminability,
    reference_stats,
    semantic_similarity,
)
from .quality import (
    Confidence,
    DEFAULT_THRESHOLD,
    DISTRACTOR_COUNT,
    FilterConfig,
    FilterInput,
    FilterResult,
    FilterVerdict,
    RULE_CONFIDENCE,
    RULE_DOMAIN,
    RULE_HALLUCINATION,
    RULE_SIMILARITY,
    filter_corpus,
    load_filter_inputs,
    model_based_filter,
    parse_filter_inputs,
    rule_based_filter,
    serialize_verdicts,
)
from .records import (
    Corpus,
    CorpusFormatError,
    CaptionCategory,
    CaptionSubCategory,
    DomainCode,
    EvalRecord,
    QaCategory,
    QaSubCategory,
    Task,
    group_by,
    load_corpus,
    parse_corpus,
    serialize_corpus,
    serialize_record,
)
from .tfidf import CorpusStats, WeightedVector, build_stats, stats_from_texts, weighted_pool

__all__ = [
    "__version__",
    "CAPTION_CELLS",
    "QA_CELLS",
    "BaselineResult",
    "CaptionBreakdown",
    "CaptionCategory",
    "CaptionSubCategory",
    "CdfCurve",
    "CellScores",
    "Confidence",
    "Corpus",
    "CorpusFormatError",
    "CorpusStats",
    "DateResult",
    "DEFAULT_DIMENSION",
    "DEFAULT_SEED",
    "DEFAULT_THRESHOLD",
    "DISTRACTOR_COUNT",
    "DiscriminationReport",
    "DomainCode",
    "EmbedServiceError",
    "EmbeddingMatrix",
    "EvalRecord",
    "FilterConfig",
    "FilterInput",
    "FilterResult",
    "FilterVerdict",
    "MetricDiscrimination",
    "MetricId",
    "MissingCellError",
    "PROXY_NOTE",
    "QaBreakdown",
    "QaCategory",
    "QaSubCategory",
    "QualityTier",
    "RULE_CONFIDENCE",
    "RULE_DOMAIN",
    "RULE_HALLUCINATION",
    "RULE_SIMILARITY",
    "RemoteBackend",
    "SampleScore",
    "SimilarityMatrix",
    "Task",
    "TestBackend",
    "TokenizedText",
    "WeightedVector",
    "bleu1",
    "bleu1_corpus",
    "build_matrix",
    "build_stats",
    "build_tier_corpora",
    "cdf_csv",
    "clamped_cosine",
    "cosine_baseline",
    "date_corpus",
    "date_sample",
    "default_safe_template",
    "discriminability",
    "discrimination_report",
    "empirical_cdf",
    "filter_corpus",
    "group_by",
    "load_corpus",
    "load_filter_inputs",
    "median_span",
    "model_based_filter",
    "parse_corpus",
    "parse_filter_inputs",
    "per_cell_scores",
    "reference_stats",
    "report_to_dict",
    "rule_based_filter",
    "score_caption",
    "score_qa",
    "seeded_derangement",
    "semantic_similarity",
    "serialize_corpus",
    "serialize_record",
    "serialize_verdicts",
    "stats_from_texts",
    "tokenize",
    "weighted_pool",
]
