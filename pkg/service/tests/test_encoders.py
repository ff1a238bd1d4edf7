"""Encoder unit tests: tokenization, the keyed-hash scheme, batching."""

import hashlib

import numpy as np
import pytest

from embed_service.encoders import (
    HASHED_DEFAULT_DIMENSION,
    HashedEncoder,
    load_encoder,
    tokenize,
)

# HashedEncoder(dimension=8, seed=0) vector for "dog", float32. Frozen
# from one run of the documented procedure (keyed BLAKE2b -> Philox ->
# standard normals -> L2 normalize); guards the scheme against drift.
GOLDEN_DOG_8 = [
    0.03697437420487404,
    0.18452347815036774,
    0.7444729208946228,
    -0.3198082447052002,
    -0.433291494846344,
    -0.10777335613965988,
    -0.025983663275837898,
    0.3286867141723633,
]


class TestTokenize:
    def test_lowercases_and_splits(self):
        assert tokenize("A dog Barks") == ["a", "dog", "barks"]

    def test_strips_edge_punctuation(self):
        assert tokenize("(Hello), world!") == ["hello", "world"]

    def test_keeps_inner_punctuation(self):
        assert tokenize("rock'n'roll") == ["rock'n'roll"]

    def test_pure_punctuation_vanishes(self):
        assert tokenize("!!! ... ??") == []

    def test_empty_text(self):
        assert tokenize("") == []

    def test_repeated_words_stay_repeated(self):
        assert tokenize("dog dog") == ["dog", "dog"]


class TestHashedEncoder:
    def test_golden_vector(self):
        enc = HashedEncoder(dimension=8, seed=0)
        ((tokens, vectors),) = enc.embed_tokens(["dog"])
        assert tokens == ["dog"]
        assert vectors.dtype == np.dtype("<f4")
        np.testing.assert_array_equal(vectors[0], np.array(GOLDEN_DOG_8, dtype="<f4"))

    def test_matches_documented_procedure(self):
        enc = HashedEncoder(dimension=16, seed=42)
        for token in ("dog", "barking", "a"):
            digest = hashlib.blake2b(
                token.encode("utf-8"), digest_size=8, key=(42).to_bytes(8, "little")
            ).digest()
            rng = np.random.Generator(
                np.random.Philox(key=int.from_bytes(digest, "little"))
            )
            expected = rng.standard_normal(16)
            expected /= np.linalg.norm(expected)
            ((_, vectors),) = enc.embed_tokens([token])
            np.testing.assert_array_equal(vectors[0], expected.astype("<f4"))

    def test_unit_norm(self):
        enc = HashedEncoder(dimension=64, seed=3)
        ((_, vectors),) = enc.embed_tokens(["one two three four five"])
        norms = np.linalg.norm(vectors.astype(np.float64), axis=1)
        np.testing.assert_allclose(norms, 1.0, atol=1e-6)

    def test_same_token_same_vector_regardless_of_position(self):
        enc = HashedEncoder(dimension=32)
        ((_, vectors),) = enc.embed_tokens(["dog chases dog"])
        np.testing.assert_array_equal(vectors[0], vectors[2])
        assert not np.array_equal(vectors[0], vectors[1])

    def test_two_instances_agree(self):
        a = HashedEncoder(dimension=32, seed=5)
        b = HashedEncoder(dimension=32, seed=5)
        ((_, va),) = a.embed_tokens(["thunder"])
        ((_, vb),) = b.embed_tokens(["thunder"])
        np.testing.assert_array_equal(va, vb)

    def test_seed_changes_vectors(self):
        ((_, v0),) = HashedEncoder(dimension=32, seed=0).embed_tokens(["dog"])
        ((_, v1),) = HashedEncoder(dimension=32, seed=1).embed_tokens(["dog"])
        assert not np.array_equal(v0, v1)

    def test_sentence_is_mean_of_token_vectors(self):
        enc = HashedEncoder(dimension=32)
        ((_, vectors),) = enc.embed_tokens(["dog cat bird"])
        (sentence,) = enc.embed_sentences(["dog cat bird"])
        expected = vectors.mean(axis=0, dtype=np.float64).astype("<f4")
        np.testing.assert_array_equal(sentence, expected)

    def test_empty_text(self):
        enc = HashedEncoder(dimension=16)
        ((tokens, vectors),) = enc.embed_tokens([""])
        assert tokens == []
        assert vectors.shape == (0, 16)
        (sentence,) = enc.embed_sentences([""])
        np.testing.assert_array_equal(sentence, np.zeros(16, dtype="<f4"))

    def test_batch_matches_single_calls(self):
        enc = HashedEncoder(dimension=24)
        texts = ["a dog", "rain falls", ""]
        batched = enc.embed_tokens(texts)
        singles = [enc.embed_tokens([t])[0] for t in texts]
        for (bt, bv), (st, sv) in zip(batched, singles):
            assert bt == st
            np.testing.assert_array_equal(bv, sv)

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            HashedEncoder(dimension=0)
        with pytest.raises(ValueError):
            HashedEncoder(dimension=8, seed=-1)
        with pytest.raises(ValueError):
            HashedEncoder(dimension=8, seed=2**64)

    def test_model_id_forms(self):
        assert HashedEncoder().model_id == "hashed"
        assert HashedEncoder(dimension=64, seed=7).model_id == "hashed:64:7"


class TestLoadEncoder:
    def test_plain_hashed(self):
        enc = load_encoder("hashed")
        assert isinstance(enc, HashedEncoder)
        assert enc.dimension == HASHED_DEFAULT_DIMENSION
        assert enc.seed == 0

    def test_hashed_with_dimension(self):
        enc = load_encoder("hashed:16")
        assert enc.dimension == 16
        assert enc.seed == 0

    def test_hashed_with_dimension_and_seed(self):
        enc = load_encoder("hashed:16:3")
        assert enc.dimension == 16
        assert enc.seed == 3

    def test_rejects_malformed_hashed_ids(self):
        for bad in ("hashed:x", "hashed:16:y", "hashed:1:2:3", "hashed:"):
            with pytest.raises(ValueError):
                load_encoder(bad)
