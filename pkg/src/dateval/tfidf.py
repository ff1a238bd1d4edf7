"""Corpus statistics and tf-idf weighted embedding pooling.

The pooled vector for a text T is

    v_T = sum over token occurrences of idf(token) * E(occurrence)

which equals the classic sum over distinct tokens of
tf(t, T) * idf(t) * E(t) whenever token vectors are position
independent. Contextual backends contribute one vector per occurrence,
each weighted by the idf of its token string.

idf uses the smoothed form ln((1 + N) / (1 + df)) + 1 so ubiquitous
tokens keep a small positive weight instead of vanishing; this is the
mechanism that damps generic terms relative to discriminative ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

import numpy as np

from .embedding import EmbeddingMatrix, TokenizedText, tokenize


@dataclass(frozen=True)
class CorpusStats:
    """Document frequencies and idf weights over a reference corpus."""

    document_count: int
    doc_frequency: dict
    idf: dict

    def idf_of(self, token: str) -> float:
        """idf for ``token``; unseen tokens get the maximum (df = 0) weight."""
        weight = self.idf.get(token)
        if weight is None:
            return math.log(1 + self.document_count) + 1.0
        return weight

    def dump(self, handle: IO[str]):
        """Write one ``token<TAB>df<TAB>idf`` line per token, sorted."""
        for token in sorted(self.doc_frequency):
            handle.write(f"{token}\t{self.doc_frequency[token]}\t{self.idf[token]!r}\n")


@dataclass(frozen=True)
class WeightedVector:
    """A pooled embedding with its precomputed L2 norm."""

    vector: np.ndarray
    norm: float


def build_stats(documents: Sequence[TokenizedText]) -> CorpusStats:
    """Count document frequencies (documents, not occurrences) and derive idf."""
    if not documents:
        raise ValueError("at least one document is required to build idf stats")
    doc_frequency: dict[str, int] = {}
    for doc in documents:
        for token in doc.counts:
            doc_frequency[token] = doc_frequency.get(token, 0) + 1
    n_docs = len(documents)
    idf = {
        token: math.log((1 + n_docs) / (1 + df)) + 1.0
        for token, df in doc_frequency.items()
    }
    return CorpusStats(document_count=n_docs, doc_frequency=doc_frequency, idf=idf)


def stats_from_texts(texts: Iterable[str], tokenizer=tokenize) -> CorpusStats:
    return build_stats([tokenizer(text) for text in texts])


def weighted_pool(
    text: TokenizedText, embeddings: EmbeddingMatrix, stats: CorpusStats
) -> WeightedVector:
    """Pool token vectors into v_T with idf weights per occurrence.

    Empty text pools to the zero vector with norm 0.
    """
    if text.tokens != embeddings.tokens:
        raise ValueError("embedding matrix tokens do not align with the text tokens")
    if not text.tokens:
        return WeightedVector(vector=np.zeros(embeddings.dimension), norm=0.0)
    weights = np.array([stats.idf_of(token) for token in text.tokens])
    vector = weights @ embeddings.vectors
    return WeightedVector(vector=vector, norm=float(np.linalg.norm(vector)))
