"""Reference metrics the weighted metric is compared against.

* ``cosine_baseline``: plain mean-pooled sentence embedding cosine, no
  idf weighting and no cross-sample term.
* ``bleu1``: clipped unigram precision with a brevity penalty, the
  classic n=1 surface-overlap score.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import Enum
import math
from typing import Sequence

import numpy as np

from .embedding import tokenize
from .records import Corpus


class MetricId(str, Enum):
    DATE = "date"
    COSINE = "cosine"
    BLEU1 = "bleu1"


@dataclass(frozen=True)
class BaselineScore:
    id: str
    score: float


@dataclass(frozen=True)
class BaselineResult:
    samples: tuple[BaselineScore, ...]
    mean_score: float


def _clamped_cos(a: np.ndarray, b: np.ndarray) -> float:
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return min(max(float(a @ b) / (na * nb), 0.0), 1.0)


def cosine_baseline(corpus: Corpus, embedder) -> BaselineResult:
    """Unweighted sentence-cosine per record, max over references."""
    if len(corpus) == 0:
        raise ValueError("cannot score an empty corpus")
    samples = []
    for rec in corpus:
        cand = embedder.embed_sentence(rec.candidate)
        score = max(
            _clamped_cos(cand, embedder.embed_sentence(ref)) for ref in rec.references
        )
        samples.append(BaselineScore(id=rec.id, score=score))
    return BaselineResult(
        samples=tuple(samples),
        mean_score=float(np.mean([s.score for s in samples])),
    )


def bleu1(candidate: str, references: Sequence[str]) -> float:
    """Unigram BLEU: clipped precision times brevity penalty.

    Counts are clipped at the maximum occurrence across references. The
    effective reference length is the one closest to the candidate
    length, ties going to the shorter. Empty candidates and candidates
    with no overlap score 0.
    """
    if not references:
        raise ValueError("at least one reference is required")
    cand_tokens = tokenize(candidate).tokens
    c = len(cand_tokens)
    if c == 0:
        return 0.0

    max_ref_counts: Counter = Counter()
    for ref in references:
        for token, count in Counter(tokenize(ref).tokens).items():
            if count > max_ref_counts[token]:
                max_ref_counts[token] = count
    cand_counts = Counter(cand_tokens)
    clipped = sum(min(count, max_ref_counts[tok]) for tok, count in cand_counts.items())
    if clipped == 0:
        return 0.0
    precision = clipped / c

    ref_lengths = [len(tokenize(ref).tokens) for ref in references]
    r = min(ref_lengths, key=lambda length: (abs(length - c), length))
    penalty = 1.0 if c > r else math.exp(1.0 - r / c)
    return precision * penalty


def bleu1_corpus(corpus: Corpus) -> BaselineResult:
    """bleu1 applied record-wise with the corpus mean."""
    if len(corpus) == 0:
        raise ValueError("cannot score an empty corpus")
    samples = tuple(
        BaselineScore(id=rec.id, score=bleu1(rec.candidate, rec.references))
        for rec in corpus
    )
    return BaselineResult(
        samples=samples, mean_score=float(np.mean([s.score for s in samples]))
    )
