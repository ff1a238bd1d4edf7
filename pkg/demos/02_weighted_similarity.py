"""
tf-idf weighted pooling and why generic terms stop mattering
============================================================
"""

from dateval import TestBackend, clamped_cosine, stats_from_texts, tokenize, weighted_pool

references = [
    "a dog barks in the yard",
    "a cat meows in the kitchen",
    "a violin plays in the hall",
    "a siren wails in the distance",
]

stats = stats_from_texts(references)

# "a" and "in" / "the" appear in every document, so they bottom out at
# the minimum idf; content words get the largest weight
for token in ("a", "in", "dog", "violin"):
    print(f"idf({token!r}) = {stats.idf_of(token):.4f}")

embedder = TestBackend(dimension=64, seed=0)


def vector(text):
    return weighted_pool(tokenize(text), embedder.embed_tokens(text), stats)


def similarity(a, b):
    return clamped_cosine(vector(a), vector(b))


candidate = "a dog barks in the yard"
generic = "a sound in the distance"

print()
print("exact match     ", round(similarity(candidate, references[0]), 4))
print("generic caption ", round(similarity(generic, references[0]), 4))
print("wrong topic     ", round(similarity("a violin plays", references[0]), 4))

# the idf weighting is what separates the generic caption from the
# exact one: with flat weights the shared function words would pull
# the generic caption's cosine up
