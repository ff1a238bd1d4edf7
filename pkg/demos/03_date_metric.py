"""
The two halves of a DATE score
==============================

Semantic similarity answers "does the candidate match its own
references"; discriminability answers "does the candidate match its
own references better than everyone else's candidates do". The final
score is the harmonic mean, so a caption has to do both.
"""

import numpy as np

from dateval import (
    CaptionSubCategory,
    Corpus,
    DomainCode,
    EvalRecord,
    Task,
    TestBackend,
    date_corpus,
)


def record(rid, candidate, *references):
    return EvalRecord(
        id=rid,
        task=Task.CAPTION,
        sub_category=CaptionSubCategory.SHORT,
        domain=DomainCode.SOUND,
        candidate=candidate,
        references=tuple(references),
    )


corpus = Corpus(
    records=(
        record("good", "a dog barks loudly", "a dog barks", "a dog is barking"),
        record("generic", "sounds can be heard", "a violin plays", "violin music"),
        record("swapped", "a violin plays", "rain falls on a roof", "rain patters"),
        record("close", "rain drops fall", "thunder rumbles far away", "distant thunder"),
    ),
    task=Task.CAPTION,
)

embedder = TestBackend(dimension=96, seed=0)
result = date_corpus(corpus, embedder, keep_matrices=True)

print(f"{'id':8s} {'s_sim':>7s} {'s_dis':>7s} {'date':>7s}")
for s in result.samples:
    print(f"{s.id:8s} {s.s_sim:7.3f} {s.s_dis:7.3f} {s.date:7.3f}")
print(f"\ndataset mean: {result.dataset_score:.3f}")

# the cross-sample matrix behind s_dis: row i holds reference i
# against every candidate j; the diagonal should win its row
(matrix,) = result.matrices.values()
print("\ncross-sample matrix (rows=references, cols=candidates)")
with np.printoptions(precision=2, suppress=True):
    print(matrix.entries)
print("ranks per row:", matrix.ranks.tolist())
