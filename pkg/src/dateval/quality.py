"""Sample-filtering rules for benchmark construction.

Two independent gates decide whether an annotated clip is kept:

* a model-based check that the correct audio-caption similarity beats
  the average of six random distractor captions by a margin (the
  ``similarity`` rule);
* rule-based checks on annotation metadata: labeler confidence, domain
  agreement between the audio classifier and the labeler, and an
  optional hallucination phrase list.

All similarities are on the 0-100 point scale, so the default margin of
6 means six points. The boundary is inclusive: a margin of exactly the
threshold passes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
import json
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping, Sequence

from .records import CorpusFormatError, DomainCode

DISTRACTOR_COUNT = 6
DEFAULT_THRESHOLD = 6.0

RULE_SIMILARITY = "similarity"
RULE_CONFIDENCE = "confidence"
RULE_DOMAIN = "domain"
RULE_HALLUCINATION = "hallucination"


class Confidence(str, Enum):
    HIGH = "High"
    LOW = "Low"


@dataclass(frozen=True)
class FilterInput:
    """Precomputed similarities and metadata for one annotated clip."""

    id: str
    pair_similarity: float
    distractor_similarities: tuple[float, ...]
    llm_confidence: Confidence
    classifier_domain: DomainCode
    llm_domain: DomainCode
    caption_text: str

    def __post_init__(self):
        if len(self.distractor_similarities) != DISTRACTOR_COUNT:
            raise ValueError(
                f"{self.id!r}: expected {DISTRACTOR_COUNT} distractor similarities, "
                f"got {len(self.distractor_similarities)}"
            )
        object.__setattr__(
            self,
            "distractor_similarities",
            tuple(float(x) for x in self.distractor_similarities),
        )


@dataclass(frozen=True)
class FilterVerdict:
    id: str
    keep: bool
    failed_rules: tuple[str, ...]

    def __post_init__(self):
        if self.keep != (len(self.failed_rules) == 0):
            raise ValueError("keep must be true exactly when no rules failed")


@dataclass(frozen=True)
class FilterConfig:
    threshold: float = DEFAULT_THRESHOLD
    hallucination_patterns: tuple[str, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class FilterResult:
    verdicts: tuple[FilterVerdict, ...]
    kept_ids: tuple[str, ...]
    rule_counts: Mapping[str, int]


def model_based_filter(
    item: FilterInput, threshold: float = DEFAULT_THRESHOLD
) -> bool:
    """True when the matched pair beats the distractor mean by >= threshold."""
    margin = item.pair_similarity - sum(item.distractor_similarities) / DISTRACTOR_COUNT
    return margin >= threshold


def rule_based_filter(
    item: FilterInput, config: FilterConfig | None = None
) -> tuple[bool, tuple[str, ...]]:
    """Metadata checks; returns (passed, names of failed rules).

    Domain agreement compares only the three content flags, so the
    classifier and labeler must agree on the presence of speech, music
    and sound events.
    """
    config = config or FilterConfig()
    failed = []
    if item.llm_confidence is Confidence.LOW:
        failed.append(RULE_CONFIDENCE)
    if item.classifier_domain.content_flags != item.llm_domain.content_flags:
        failed.append(RULE_DOMAIN)
    lowered = item.caption_text.lower()
    if any(pattern.lower() in lowered for pattern in config.hallucination_patterns):
        failed.append(RULE_HALLUCINATION)
    return (not failed, tuple(failed))


def filter_corpus(
    items: Sequence[FilterInput], config: FilterConfig | None = None
) -> FilterResult:
    """Apply both gates to every item; keep only double-passes."""
    config = config or FilterConfig()
    verdicts = []
    rule_counts = {
        RULE_SIMILARITY: 0,
        RULE_CONFIDENCE: 0,
        RULE_DOMAIN: 0,
        RULE_HALLUCINATION: 0,
    }
    for item in items:
        failed = []
        if not model_based_filter(item, config.threshold):
            failed.append(RULE_SIMILARITY)
        _, rule_failures = rule_based_filter(item, config)
        failed.extend(rule_failures)
        for name in failed:
            rule_counts[name] += 1
        verdicts.append(
            FilterVerdict(id=item.id, keep=not failed, failed_rules=tuple(failed))
        )
    kept = tuple(v.id for v in verdicts if v.keep)
    return FilterResult(
        verdicts=tuple(verdicts), kept_ids=kept, rule_counts=rule_counts
    )


_REQUIRED_KEYS = {
    "id",
    "pair_similarity",
    "distractor_similarities",
    "llm_confidence",
    "classifier_domain",
    "llm_domain",
    "caption_text",
}


def _parse_filter_input(raw: Mapping, line_number: int) -> FilterInput:
    missing = _REQUIRED_KEYS - raw.keys()
    if missing:
        raise CorpusFormatError(
            f"missing keys: {sorted(missing)}", line_number=line_number
        )
    try:
        confidence = Confidence(raw["llm_confidence"])
    except ValueError:
        raise CorpusFormatError(
            f"llm_confidence must be one of {[c.value for c in Confidence]}, "
            f"got {raw['llm_confidence']!r}",
            line_number=line_number,
        ) from None
    try:
        classifier = DomainCode(raw["classifier_domain"])
        llm = DomainCode(raw["llm_domain"])
    except ValueError as exc:
        raise CorpusFormatError(str(exc), line_number=line_number) from None
    distractors = raw["distractor_similarities"]
    if not isinstance(distractors, list):
        raise CorpusFormatError(
            "distractor_similarities must be a list", line_number=line_number
        )
    try:
        return FilterInput(
            id=str(raw["id"]),
            pair_similarity=float(raw["pair_similarity"]),
            distractor_similarities=tuple(float(x) for x in distractors),
            llm_confidence=confidence,
            classifier_domain=classifier,
            llm_domain=llm,
            caption_text=str(raw["caption_text"]),
        )
    except (TypeError, ValueError) as exc:
        raise CorpusFormatError(str(exc), line_number=line_number) from None


def parse_filter_inputs(stream: str | IO[str] | Iterable[str]) -> list[FilterInput]:
    """Read filter inputs from JSON lines; blank lines are skipped."""
    if isinstance(stream, str):
        lines: Iterator[str] = iter(stream.split("\n"))
    else:
        lines = iter(stream)
    items = []
    seen = set()
    for line_number, line in enumerate(lines, start=1):
        text = line.strip()
        if not text:
            continue
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CorpusFormatError(
                f"invalid JSON: {exc}", line_number=line_number
            ) from None
        if not isinstance(raw, dict):
            raise CorpusFormatError(
                "each line must be a JSON object", line_number=line_number
            )
        item = _parse_filter_input(raw, line_number)
        if item.id in seen:
            raise CorpusFormatError(
                f"duplicate id {item.id!r}", line_number=line_number
            )
        seen.add(item.id)
        items.append(item)
    return items


def load_filter_inputs(path: str | Path) -> list[FilterInput]:
    with open(path, encoding="utf-8") as handle:
        return parse_filter_inputs(handle)


def serialize_verdicts(verdicts: Iterable[FilterVerdict]) -> str:
    lines = [
        json.dumps(
            {"id": v.id, "keep": v.keep, "failed_rules": list(v.failed_rules)},
            sort_keys=True,
            ensure_ascii=False,
        )
        for v in verdicts
    ]
    return "\n".join(lines) + ("\n" if lines else "")
