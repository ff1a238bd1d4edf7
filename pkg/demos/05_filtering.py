"""
Quality-control gates over annotated clips
==========================================

A clip survives when (a) its matched audio-caption similarity beats
the mean of six distractor captions by at least the threshold, and
(b) none of the metadata rules trip: low labeler confidence, domain
disagreement, or a hallucination phrase in the caption.
"""

from dateval import (
    Confidence,
    DomainCode,
    FilterConfig,
    FilterInput,
    filter_corpus,
)

items = [
    FilterInput(
        id="solid",
        pair_similarity=71.0,
        distractor_similarities=(22.0, 18.0, 25.0, 30.0, 21.0, 19.0),
        llm_confidence=Confidence.HIGH,
        classifier_domain=DomainCode.SPEECH,
        llm_domain=DomainCode.SPEECH,
        caption_text="a woman reads the news",
    ),
    FilterInput(
        id="too-close",  # margin 4.5 < 6
        pair_similarity=40.0,
        distractor_similarities=(35.0, 34.0, 36.0, 37.0, 35.0, 36.0),
        llm_confidence=Confidence.HIGH,
        classifier_domain=DomainCode.MUSIC,
        llm_domain=DomainCode.MUSIC,
        caption_text="gentle piano music",
    ),
    FilterInput(
        id="domain-clash",
        pair_similarity=80.0,
        distractor_similarities=(10.0,) * 6,
        llm_confidence=Confidence.HIGH,
        classifier_domain=DomainCode.MUSIC,
        llm_domain=DomainCode.SPEECH,
        caption_text="a tune on a guitar",
    ),
    FilterInput(
        id="refusal",
        pair_similarity=80.0,
        distractor_similarities=(10.0,) * 6,
        llm_confidence=Confidence.LOW,
        classifier_domain=DomainCode.SOUND,
        llm_domain=DomainCode.SOUND,
        caption_text="as an AI I cannot listen to audio",
    ),
]

config = FilterConfig(threshold=6.0, hallucination_patterns=("as an ai",))
result = filter_corpus(items, config)

for verdict in result.verdicts:
    status = "keep" if verdict.keep else "drop " + ",".join(verdict.failed_rules)
    print(f"{verdict.id:14s} {status}")

print("\nkept:", result.kept_ids)
print("failures by rule:", dict(result.rule_counts))

# the margin gate alone, swept over thresholds
from dateval import model_based_filter

for threshold in (0, 3, 6, 9):
    kept = [item.id for item in items if model_based_filter(item, threshold)]
    print(f"threshold {threshold}: margin gate keeps {kept}")
