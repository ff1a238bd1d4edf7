"""The DATE metric: weighted semantic similarity fused with cross-sample
rank discriminability.

Per sample i the metric combines

* ``s_sim``: cosine between tf-idf weighted embeddings of candidate and
  reference, clamped to [0, 1], maximized over the reference variants;
* ``s_dis``: 1 - r_i / N, where r_i is the competition rank of the
  matched entry M[i][i] within row i of the cross-sample similarity
  matrix M (M[i][j] scores reference i against candidate j);
* ``DATE_i``: the harmonic mean of the two, 0 when both are 0.

The dataset score is the arithmetic mean of the per-sample values.
Cross-sample matrices are built per sub-category by default so captions
of different kinds are never compared against each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .records import Corpus, group_by
from .tfidf import CorpusStats, WeightedVector, build_stats, weighted_pool

GLOBAL_SCOPE_KEY = "global"

# Matrix rows score this reference variant against every candidate; the
# first listed reference is the primary caption, later ones paraphrases.
PRIMARY_REFERENCE_INDEX = 0


@dataclass(frozen=True)
class SampleScore:
    """Per-record scores; ``s_dis`` is None when no matrix was available."""

    id: str
    s_sim: float
    s_dis: float | None
    date: float


@dataclass(frozen=True)
class SimilarityMatrix:
    """N x N reference-vs-candidate scores with per-row diagonal ranks.

    ``ranks[i]`` is the competition rank of entries[i][i] within row i:
    1 plus the number of strictly greater entries, so ties resolve in
    the diagonal's favor.
    """

    entries: np.ndarray
    ids: tuple[str, ...]
    ranks: np.ndarray

    @property
    def size(self) -> int:
        return len(self.ids)

    @classmethod
    def from_entries(
        cls, entries: np.ndarray, ids: Sequence[str] | None = None
    ) -> "SimilarityMatrix":
        entries = np.asarray(entries, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"similarity matrix must be square, got {entries.shape}")
        n = entries.shape[0]
        if n < 2:
            raise ValueError("cross-sample matrix needs at least 2 samples")
        if ids is None:
            ids = tuple(str(i) for i in range(n))
        elif len(ids) != n:
            raise ValueError("id list length does not match matrix size")
        diag = np.diagonal(entries)
        ranks = 1 + (entries > diag[:, None]).sum(axis=1)
        return cls(entries=entries, ids=tuple(ids), ranks=ranks)

    def save(self, path_prefix: str | Path):
        """Dump entries as little-endian float64 plus a sidecar id list.

        Extensions are appended, not substituted, so a prefix may
        contain dots (e.g. a group name) without being clobbered.
        """
        prefix = Path(path_prefix)
        prefix.parent.mkdir(parents=True, exist_ok=True)
        prefix.with_name(prefix.name + ".bin").write_bytes(
            self.entries.astype("<f8").tobytes()
        )
        prefix.with_name(prefix.name + ".ids").write_text(
            "".join(f"{i}\n" for i in self.ids), encoding="utf-8"
        )


@dataclass(frozen=True)
class DateResult:
    """date_corpus output: per-sample scores plus the dataset mean."""

    samples: tuple[SampleScore, ...]
    dataset_score: float
    low_sample_fallback: bool
    matrices: Mapping


def clamped_cosine(a: WeightedVector, b: WeightedVector) -> float:
    """Cosine clamped to [0, 1]; zero-norm on either side scores 0."""
    if a.norm == 0.0 or b.norm == 0.0:
        return 0.0
    if a.vector.shape != b.vector.shape:
        raise ValueError(
            f"dimension mismatch: {a.vector.shape[0]} vs {b.vector.shape[0]}"
        )
    value = float(a.vector @ b.vector) / (a.norm * b.norm)
    return min(max(value, 0.0), 1.0)


def semantic_similarity(
    candidate: WeightedVector, references: Sequence[WeightedVector]
) -> float:
    """Max over references of the clamped cosine against the candidate.

    The reference variants are paraphrases of one another, so matching
    any one of them counts.
    """
    if not references:
        raise ValueError("at least one reference is required")
    return max(clamped_cosine(candidate, ref) for ref in references)


def discriminability(matrix: SimilarityMatrix, i: int) -> float:
    """1 - r_i / N: near 1 for top-ranked samples, 0 for bottom-ranked."""
    if not 0 <= i < matrix.size:
        raise IndexError(f"sample index {i} out of range for N={matrix.size}")
    return 1.0 - matrix.ranks[i] / matrix.size


def date_sample(s_sim: float, s_dis: float) -> float:
    """Harmonic mean of similarity and discriminability; 0 at (0, 0)."""
    for name, value in (("s_sim", s_sim), ("s_dis", s_dis)):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {value}")
    total = s_sim + s_dis
    if total == 0.0:
        return 0.0
    return 2.0 * s_sim * s_dis / total


def _pool(text: str, embedder, stats: CorpusStats) -> WeightedVector:
    return weighted_pool(embedder.tokenize(text), embedder.embed_tokens(text), stats)


def _normalized_rows(vectors: Sequence[WeightedVector], dimension: int) -> np.ndarray:
    rows = np.zeros((len(vectors), dimension))
    for k, wv in enumerate(vectors):
        if wv.norm > 0.0:
            rows[k] = wv.vector / wv.norm
    return rows


def _matrix_from_vectors(
    candidate_vectors: Sequence[WeightedVector],
    reference_vectors: Sequence[Sequence[WeightedVector]],
    ids: Sequence[str],
    dimension: int,
    reference_reduction: str,
) -> SimilarityMatrix:
    cand_rows = _normalized_rows(candidate_vectors, dimension)
    if reference_reduction == "first":
        ref_rows = _normalized_rows(
            [refs[PRIMARY_REFERENCE_INDEX] for refs in reference_vectors], dimension
        )
        entries = np.clip(ref_rows @ cand_rows.T, 0.0, 1.0)
    elif reference_reduction == "max":
        flat = [wv for refs in reference_vectors for wv in refs]
        ref_rows = _normalized_rows(flat, dimension)
        scores = np.clip(ref_rows @ cand_rows.T, 0.0, 1.0)
        entries = np.empty((len(ids), len(ids)))
        offset = 0
        for i, refs in enumerate(reference_vectors):
            entries[i] = scores[offset : offset + len(refs)].max(axis=0)
            offset += len(refs)
    else:
        raise ValueError(
            f"reference_reduction must be 'first' or 'max', got {reference_reduction!r}"
        )
    return SimilarityMatrix.from_entries(entries, ids=ids)


def build_matrix(
    corpus: Corpus,
    embedder,
    stats: CorpusStats,
    reference_reduction: str = "first",
) -> SimilarityMatrix:
    """Cross-sample matrix for one sub-category group of records.

    M[i][j] scores record i's reference against record j's candidate.
    Requires N >= 2 and a single shared sub-category.
    """
    if len(corpus) < 2:
        raise ValueError("cross-sample matrix needs at least 2 records")
    if len({rec.sub_category for rec in corpus}) > 1:
        raise ValueError("matrix records must share one sub-category")
    cand_vectors = [_pool(rec.candidate, embedder, stats) for rec in corpus]
    ref_vectors = [
        [_pool(ref, embedder, stats) for ref in rec.references] for rec in corpus
    ]
    return _matrix_from_vectors(
        cand_vectors,
        ref_vectors,
        [rec.id for rec in corpus],
        embedder.dimension,
        reference_reduction,
    )


def reference_stats(corpus: Corpus, embedder) -> CorpusStats:
    """idf statistics over every reference text of the corpus.

    Candidates are deliberately excluded so they cannot shift weights.
    """
    return build_stats([embedder.tokenize(text) for text in corpus.reference_texts()])


def date_corpus(
    corpus: Corpus,
    embedder,
    stats: CorpusStats | None = None,
    *,
    matrix_scope: str = "per-subcategory",
    reference_reduction: str = "first",
    keep_matrices: bool = False,
) -> DateResult:
    """Score every record and average the per-sample DATE values.

    Groups with fewer than 2 records cannot form a matrix; their records
    fall back to similarity-only scoring (``s_dis`` None, DATE = s_sim)
    and the result carries ``low_sample_fallback=True``.
    """
    if len(corpus) == 0:
        raise ValueError("cannot score an empty corpus")
    if matrix_scope not in ("per-subcategory", "global"):
        raise ValueError(
            f"matrix_scope must be 'per-subcategory' or 'global', got {matrix_scope!r}"
        )
    if stats is None:
        stats = reference_stats(corpus, embedder)

    cand_vectors = {
        rec.id: _pool(rec.candidate, embedder, stats) for rec in corpus
    }
    ref_vectors = {
        rec.id: [_pool(ref, embedder, stats) for ref in rec.references]
        for rec in corpus
    }
    s_sim = {
        rec.id: semantic_similarity(cand_vectors[rec.id], ref_vectors[rec.id])
        for rec in corpus
    }

    if matrix_scope == "global":
        groups = {GLOBAL_SCOPE_KEY: list(corpus.records)}
    else:
        groups = group_by(corpus, "sub_category")

    s_dis: dict[str, float | None] = {}
    matrices: dict = {}
    fallback = False
    for key, records in groups.items():
        if len(records) < 2:
            fallback = True
            for rec in records:
                s_dis[rec.id] = None
            continue
        matrix = _matrix_from_vectors(
            [cand_vectors[rec.id] for rec in records],
            [ref_vectors[rec.id] for rec in records],
            [rec.id for rec in records],
            embedder.dimension,
            reference_reduction,
        )
        if keep_matrices:
            matrices[key] = matrix
        for i, rec in enumerate(records):
            s_dis[rec.id] = discriminability(matrix, i)

    samples = []
    for rec in corpus:
        sim = s_sim[rec.id]
        dis = s_dis[rec.id]
        score = sim if dis is None else date_sample(sim, dis)
        samples.append(SampleScore(id=rec.id, s_sim=sim, s_dis=dis, date=score))
    dataset_score = float(np.mean([s.date for s in samples]))
    return DateResult(
        samples=tuple(samples),
        dataset_score=dataset_score,
        low_sample_fallback=fallback,
        matrices=matrices,
    )
