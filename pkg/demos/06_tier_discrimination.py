"""
How widely does a metric separate right, safe and wrong answers?
================================================================

From one reference corpus we derive three candidate sets: Right
(paraphrase variants of the references), Safe (one generic caption for
every clip), Wrong (another clip's reference, via a seeded
derangement). A discriminative metric should score them in that order
and put real distance between Right and Wrong.
"""

import itertools
import random

from dateval import (
    CaptionSubCategory,
    Corpus,
    DomainCode,
    EvalRecord,
    QualityTier,
    Task,
    TestBackend,
    bleu1_corpus,
    build_tier_corpora,
    cosine_baseline,
    date_corpus,
    discrimination_report,
)

words = [
    "dog", "cat", "piano", "guitar", "rain", "wind", "engine", "crowd",
    "bell", "voice", "drum", "violin", "thunder", "siren", "whistle", "train",
]
pairs = random.Random(4).sample(list(itertools.combinations(words, 2)), 40)

records = tuple(
    EvalRecord(
        id=f"clip{i:02d}",
        task=Task.CAPTION,
        sub_category=CaptionSubCategory.SHORT,
        domain=DomainCode.SOUND,
        candidate="unused here",
        references=(
            f"{a} and {b} sounds are heard",
            f"sounds of {a} and {b} are heard",
        ),
    )
    for i, (a, b) in enumerate(pairs)
)
base = Corpus(records=records, task=Task.CAPTION)

tiers = build_tier_corpora(base, seed=1)
embedder = TestBackend(dimension=128, seed=0)

tier_scores = {"date": {}, "cosine": {}, "bleu1": {}}
for tier, corpus in tiers.items():
    tier_scores["date"][tier] = [s.date for s in date_corpus(corpus, embedder).samples]
    tier_scores["cosine"][tier] = [
        s.score for s in cosine_baseline(corpus, embedder).samples
    ]
    tier_scores["bleu1"][tier] = [s.score for s in bleu1_corpus(corpus).samples]

report = discrimination_report(tier_scores)
print(report.note, "\n")
for m in report.metrics:
    r, s, w = (m.medians[t.value] for t in QualityTier)
    ordered = m.ordered_right_above_safe and m.ordered_safe_above_wrong
    print(
        f"{m.metric:7s} medians {r:5.1f} / {s:5.1f} / {w:5.1f}   "
        f"right-wrong span {m.right_wrong_span:5.1f}   ordered={ordered}"
    )
