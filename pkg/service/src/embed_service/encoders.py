"""Encoder backends for the embedding service.

Two families:

* :class:`HashedEncoder` is hermetic and loads instantly. Every token
  string maps to a fixed unit vector derived from a keyed hash, so the
  service can be exercised end to end (tests, CI, air-gapped machines)
  with no model download. Select it with ``MODEL_ID=hashed`` or
  ``hashed:<dim>`` or ``hashed:<dim>:<seed>``.

* :class:`SentenceTransformerEncoder` wraps a pretrained
  sentence-transformers model (lazy import, loaded once at startup).
  Any other ``MODEL_ID`` value is treated as a sentence-transformers
  model id.
"""

from __future__ import annotations

import hashlib
import threading
import unicodedata
from typing import Sequence

import numpy as np

DEFAULT_MODEL_ID = "sentence-transformers/paraphrase-MiniLM-L6-v2"
HASHED_DEFAULT_DIMENSION = 384
HASHED_DEFAULT_SEED = 0


def _is_punctuation(char: str) -> bool:
    return unicodedata.category(char).startswith("P")


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, strip leading/trailing punctuation.

    Pure-punctuation words vanish. This is the tokenization served by
    the hashed encoder; pretrained encoders use their own tokenizers.
    """
    tokens = []
    for raw in text.lower().split():
        start, end = 0, len(raw)
        while start < end and _is_punctuation(raw[start]):
            start += 1
        while end > start and _is_punctuation(raw[end - 1]):
            end -= 1
        if end > start:
            tokens.append(raw[start:end])
    return tokens


class HashedEncoder:
    """Deterministic keyed-hash embedder, one fixed unit vector per token.

    The 64-bit BLAKE2b digest of the token (key = seed as 8 little-endian
    bytes) seeds a Philox generator which draws ``dimension`` standard
    normals; the draw is L2-normalized. Identical to the evaluation
    toolkit's hermetic test backend, so a client pointed at a hashed
    service reproduces local test-backend numbers exactly.
    """

    def __init__(
        self,
        dimension: int = HASHED_DEFAULT_DIMENSION,
        seed: int = HASHED_DEFAULT_SEED,
    ):
        if dimension <= 0:
            raise ValueError("dimension must be positive")
        if not 0 <= seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        self.dimension = dimension
        self.seed = seed
        if dimension == HASHED_DEFAULT_DIMENSION and seed == HASHED_DEFAULT_SEED:
            self.model_id = "hashed"
        else:
            self.model_id = f"hashed:{dimension}:{seed}"
        self._cache: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()

    def _token_vector(self, token: str) -> np.ndarray:
        vec = self._cache.get(token)
        if vec is None:
            digest = hashlib.blake2b(
                token.encode("utf-8"),
                digest_size=8,
                key=self.seed.to_bytes(8, "little"),
            ).digest()
            rng = np.random.Generator(
                np.random.Philox(key=int.from_bytes(digest, "little"))
            )
            vec = rng.standard_normal(self.dimension)
            vec /= np.linalg.norm(vec)
            vec.flags.writeable = False
            with self._lock:
                self._cache[token] = vec
        return vec

    def embed_tokens(self, texts: Sequence[str]) -> list[tuple[list[str], np.ndarray]]:
        """Per text: (token strings, float32 matrix of one row per token)."""
        out = []
        for text in texts:
            tokens = tokenize(text)
            if tokens:
                vectors = np.stack([self._token_vector(t) for t in tokens])
            else:
                vectors = np.zeros((0, self.dimension))
            out.append((tokens, vectors.astype("<f4")))
        return out

    def embed_sentences(self, texts: Sequence[str]) -> list[np.ndarray]:
        """Mean of token vectors per text; the zero vector for empty text."""
        out = []
        for tokens, vectors in self.embed_tokens(texts):
            if tokens:
                out.append(vectors.mean(axis=0, dtype=np.float64).astype("<f4"))
            else:
                out.append(np.zeros(self.dimension, dtype="<f4"))
        return out


class SentenceTransformerEncoder:
    """Pretrained sentence-transformers model behind the same interface.

    Token mode returns the transformer's contextual token embeddings with
    special tokens dropped; sentence mode returns the model's own pooled
    vector when its width matches the token width, otherwise a masked
    mean over token embeddings so the service reports a single dimension.
    Inference is serialized by a lock.
    """

    def __init__(self, model_id: str):
        from sentence_transformers import SentenceTransformer

        self.model_id = model_id
        self._model = SentenceTransformer(model_id)
        self._model.eval()
        self._tokenizer = self._model.tokenizer
        self._special_ids = set(self._tokenizer.all_special_ids)
        self._lock = threading.Lock()
        probe = self._forward(["probe"])
        self.dimension = probe[0][1].shape[1]
        pooled = self._model.encode(["probe"], convert_to_numpy=True)
        self._pooled_matches = pooled.shape[1] == self.dimension

    def _forward(self, texts: Sequence[str]) -> list[tuple[list[str], np.ndarray]]:
        import torch

        with self._lock, torch.no_grad():
            features = self._model.tokenize(list(texts))
            features = {
                k: v.to(self._model.device) if hasattr(v, "to") else v
                for k, v in features.items()
            }
            out = self._model.forward(features)
            token_embeddings = out["token_embeddings"].cpu().numpy()
            input_ids = features["input_ids"].cpu().numpy()
            mask = features["attention_mask"].cpu().numpy().astype(bool)
        results = []
        for ids, vecs, keep in zip(input_ids, token_embeddings, mask):
            ids = ids[keep]
            vecs = vecs[keep]
            real = [j for j, tid in enumerate(ids.tolist()) if tid not in self._special_ids]
            tokens = self._tokenizer.convert_ids_to_tokens([int(ids[j]) for j in real])
            results.append((list(tokens), vecs[real].astype("<f4")))
        return results

    def embed_tokens(self, texts: Sequence[str]) -> list[tuple[list[str], np.ndarray]]:
        return self._forward(texts)

    def embed_sentences(self, texts: Sequence[str]) -> list[np.ndarray]:
        if self._pooled_matches:
            with self._lock:
                pooled = self._model.encode(list(texts), convert_to_numpy=True)
            return [vec.astype("<f4") for vec in pooled]
        out = []
        for tokens, vectors in self._forward(texts):
            if len(tokens):
                out.append(vectors.mean(axis=0, dtype=np.float64).astype("<f4"))
            else:
                out.append(np.zeros(self.dimension, dtype="<f4"))
        return out


def load_encoder(model_id: str):
    """Build the encoder named by ``model_id`` (see module docstring)."""
    if model_id == "hashed" or model_id.startswith("hashed:"):
        parts = model_id.split(":")
        if len(parts) > 3:
            raise ValueError(f"bad hashed model id: {model_id!r}")
        try:
            dimension = int(parts[1]) if len(parts) > 1 else HASHED_DEFAULT_DIMENSION
            seed = int(parts[2]) if len(parts) > 2 else HASHED_DEFAULT_SEED
        except ValueError:
            raise ValueError(f"bad hashed model id: {model_id!r}") from None
        return HashedEncoder(dimension=dimension, seed=seed)
    return SentenceTransformerEncoder(model_id)
