"""Metric-discrimination analysis.

A metric worth trusting should separate three kinds of candidate:

* Right: a detailed, correct paraphrase of the reference;
* Safe: a generic description that fits almost any clip;
* Wrong: a fluent caption that belongs to a different clip.

This module builds those tiers from a reference corpus (paraphrase
variants stand in for human rephrasings; reports say so), and compares
metrics on them via empirical CDFs and median score spans.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .records import Corpus, EvalRecord

PROXY_NOTE = (
    "Right-tier candidates are paraphrase variants of the references, "
    "a proxy for human-written rephrasings."
)

DEFAULT_SPEECH_TEMPLATE = "A man is speaking"
DEFAULT_GENERAL_TEMPLATE = "Sounds are heard"


class QualityTier(str, Enum):
    RIGHT = "Right"
    SAFE = "Safe"
    WRONG = "Wrong"


@dataclass(frozen=True)
class CdfCurve:
    """Empirical CDF: F(x) = fraction of scores <= x."""

    points: np.ndarray
    fractions: np.ndarray

    def at(self, x: float) -> float:
        """Evaluate the step function; right-continuous."""
        idx = int(np.searchsorted(self.points, x, side="right"))
        return 0.0 if idx == 0 else float(self.fractions[idx - 1])


@dataclass(frozen=True)
class MetricDiscrimination:
    metric: str
    medians: Mapping[str, float]
    right_wrong_span: float
    right_safe_span: float
    ordered_right_above_safe: bool
    ordered_safe_above_wrong: bool
    curves: Mapping[str, CdfCurve]


@dataclass(frozen=True)
class DiscriminationReport:
    metrics: tuple[MetricDiscrimination, ...]
    note: str = PROXY_NOTE


def default_safe_template(corpus: Corpus) -> str:
    """Speech template when every record's domain contains speech."""
    if len(corpus) and all(rec.domain.contains_speech for rec in corpus):
        return DEFAULT_SPEECH_TEMPLATE
    return DEFAULT_GENERAL_TEMPLATE


def seeded_derangement(n: int, seed: int) -> np.ndarray:
    """Random permutation of range(n) with no fixed point.

    Rejection-samples full permutations so every derangement stays
    equally likely. Needs n >= 2.
    """
    if n < 2:
        raise ValueError("a derangement needs at least 2 elements")
    rng = np.random.default_rng(seed)
    while True:
        perm = rng.permutation(n)
        if not np.any(perm == np.arange(n)):
            return perm


def build_tier_corpora(
    base: Corpus, safe_template: str | None = None, seed: int = 0
) -> dict[QualityTier, Corpus]:
    """Derive the three candidate tiers from one reference corpus.

    Right swaps in each record's second reference variant (the first
    when a record has only one). Safe gives every record the same
    generic template. Wrong gives each record the primary reference of
    a different record via a seeded derangement.
    """
    if len(base) < 2:
        raise ValueError("tier construction needs at least 2 records")
    if safe_template is None:
        safe_template = default_safe_template(base)

    records = list(base.records)

    def rebuild(candidates: Sequence[str]) -> Corpus:
        return Corpus(
            records=tuple(
                replace(rec, candidate=cand)
                for rec, cand in zip(records, candidates)
            ),
            task=base.task,
        )

    right = rebuild(
        [rec.references[1] if len(rec.references) > 1 else rec.references[0]
         for rec in records]
    )
    safe = rebuild([safe_template] * len(records))
    perm = seeded_derangement(len(records), seed)
    wrong = rebuild([records[perm[i]].references[0] for i in range(len(records))])
    return {QualityTier.RIGHT: right, QualityTier.SAFE: safe, QualityTier.WRONG: wrong}


def empirical_cdf(scores: Sequence[float]) -> CdfCurve:
    """CDF over the distinct score values of a non-empty sample."""
    if len(scores) == 0:
        raise ValueError("cannot build a CDF from no scores")
    values = np.sort(np.asarray(scores, dtype=np.float64))
    points, first_index = np.unique(values, return_index=True)
    # scores <= points[k] run through the last duplicate of that point,
    # i.e. up to the first index of the next distinct value
    counts = np.append(first_index[1:], len(values))
    return CdfCurve(points=points, fractions=counts / len(values))


def median_span(a: Sequence[float], b: Sequence[float]) -> float:
    """|median(a) - median(b)| on the x100 scale."""
    if len(a) == 0 or len(b) == 0:
        raise ValueError("median_span needs two non-empty samples")
    return abs(float(np.median(a)) - float(np.median(b))) * 100.0


def discrimination_report(
    tier_scores: Mapping[str, Mapping[QualityTier, Sequence[float]]],
) -> DiscriminationReport:
    """Summarize how widely each metric separates the three tiers.

    ``tier_scores`` maps metric name to per-tier score lists; all three
    tiers must be present for every metric.
    """
    metrics = []
    for metric_name, tiers in tier_scores.items():
        missing = [t.value for t in QualityTier if t not in tiers]
        if missing:
            raise ValueError(f"metric {metric_name!r} lacks tiers: {missing}")
        medians = {
            tier.value: float(np.median(np.asarray(tiers[tier]))) * 100.0
            for tier in QualityTier
        }
        curves = {
            tier.value: empirical_cdf(tiers[tier]) for tier in QualityTier
        }
        metrics.append(
            MetricDiscrimination(
                metric=metric_name,
                medians=medians,
                right_wrong_span=median_span(
                    tiers[QualityTier.RIGHT], tiers[QualityTier.WRONG]
                ),
                right_safe_span=median_span(
                    tiers[QualityTier.RIGHT], tiers[QualityTier.SAFE]
                ),
                ordered_right_above_safe=medians["Right"] > medians["Safe"],
                ordered_safe_above_wrong=medians["Safe"] > medians["Wrong"],
                curves=curves,
            )
        )
    return DiscriminationReport(metrics=tuple(metrics))


def report_to_dict(report: DiscriminationReport) -> dict:
    """JSON-friendly view; CDF curves as parallel point/fraction lists."""
    return {
        "note": report.note,
        "metrics": [
            {
                "metric": m.metric,
                "medians": dict(m.medians),
                "right_wrong_span": m.right_wrong_span,
                "right_safe_span": m.right_safe_span,
                "ordered_right_above_safe": m.ordered_right_above_safe,
                "ordered_safe_above_wrong": m.ordered_safe_above_wrong,
                "curves": {
                    tier: {
                        "points": curve.points.tolist(),
                        "fractions": curve.fractions.tolist(),
                    }
                    for tier, curve in m.curves.items()
                },
            }
            for m in report.metrics
        ],
    }


def cdf_csv(report: DiscriminationReport) -> str:
    """Plot data: one row per (metric, tier, x, F(x))."""
    lines = ["metric,tier,x,cdf"]
    for m in report.metrics:
        for tier, curve in m.curves.items():
            for x, f in zip(curve.points, curve.fractions):
                lines.append(f"{m.metric},{tier},{float(x)!r},{float(f)!r}")
    return "\n".join(lines) + "\n"
