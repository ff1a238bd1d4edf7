"""Text-embedding backends producing per-token vectors and tokenizations.

Two backends share one interface:

* :class:`TestBackend` is hermetic and fully deterministic. Tokens are
  lowercased whitespace-split words with leading/trailing punctuation
  stripped. Each token maps to a fixed unit vector: the 64-bit
  BLAKE2b keyed hash of the token (key = seed as 8 little-endian bytes)
  seeds a Philox counter-based generator, which draws ``dimension``
  standard normals that are then L2-normalized. The same token string
  always yields the same vector, regardless of position or neighbors.

* :class:`RemoteBackend` is a client for the companion embedding
  service (``POST {endpoint}/v1/embed``), which returns the encoder's
  own tokenization and contextual token vectors. Responses may be
  cached on disk keyed by (model id, mode, text hash).
"""

from __future__ import annotations

import base64
import hashlib
import json
import unicodedata
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

DEFAULT_DIMENSION = 384
DEFAULT_SEED = 0


class EmbedServiceError(RuntimeError):
    """Transport or protocol failure talking to the embedding service."""


@dataclass(frozen=True)
class TokenizedText:
    """Ordered tokens of one text with per-token occurrence counts."""

    tokens: tuple[str, ...]
    counts: dict

    def __post_init__(self):
        if not isinstance(self.tokens, tuple):
            object.__setattr__(self, "tokens", tuple(self.tokens))

    @classmethod
    def from_tokens(cls, tokens: Sequence[str]) -> "TokenizedText":
        return cls(tokens=tuple(tokens), counts=dict(Counter(tokens)))


@dataclass(frozen=True)
class EmbeddingMatrix:
    """One vector per token occurrence; shape (len(tokens), dimension)."""

    tokens: tuple[str, ...]
    vectors: np.ndarray
    dimension: int

    def __post_init__(self):
        if not isinstance(self.tokens, tuple):
            object.__setattr__(self, "tokens", tuple(self.tokens))
        if self.vectors.shape != (len(self.tokens), self.dimension):
            raise ValueError(
                f"vectors shape {self.vectors.shape} does not match "
                f"{len(self.tokens)} tokens x dimension {self.dimension}"
            )
        if self.vectors.size and not np.all(np.isfinite(self.vectors)):
            raise ValueError("embedding vectors must be finite")


def _is_punctuation(char: str) -> bool:
    return unicodedata.category(char).startswith("P")


def tokenize(text: str) -> TokenizedText:
    """Lowercase, split on Unicode whitespace, strip edge punctuation.

    Tokens that are pure punctuation vanish. This is the hermetic
    tokenizer used by the test backend and by BLEU-1.
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
    return TokenizedText.from_tokens(tokens)


def _token_key(seed: int, token: str) -> int:
    digest = hashlib.blake2b(
        token.encode("utf-8"), digest_size=8, key=seed.to_bytes(8, "little")
    ).digest()
    return int.from_bytes(digest, "little")


class TestBackend:
    """Deterministic hermetic embedder keyed on (seed, token string)."""

    name = "test"
    __test__ = False  # not a test case despite the pytest-like name

    def __init__(self, dimension: int = DEFAULT_DIMENSION, seed: int = DEFAULT_SEED):
        if dimension <= 0:
            raise ValueError("dimension must be positive")
        if not 0 <= seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        self.dimension = dimension
        self.seed = seed
        self._cache: dict[str, np.ndarray] = {}

    def tokenize(self, text: str) -> TokenizedText:
        return tokenize(text)

    def token_vector(self, token: str) -> np.ndarray:
        vec = self._cache.get(token)
        if vec is None:
            rng = np.random.Generator(np.random.Philox(key=_token_key(self.seed, token)))
            vec = rng.standard_normal(self.dimension)
            vec /= np.linalg.norm(vec)
            vec.flags.writeable = False
            self._cache[token] = vec
        return vec

    def embed_tokens(self, text: str) -> EmbeddingMatrix:
        tokens = tokenize(text).tokens
        if tokens:
            vectors = np.stack([self.token_vector(tok) for tok in tokens])
        else:
            vectors = np.zeros((0, self.dimension))
        return EmbeddingMatrix(tokens=tokens, vectors=vectors, dimension=self.dimension)

    def embed_sentence(self, text: str) -> np.ndarray:
        """Mean of token vectors; the zero vector for empty text."""
        matrix = self.embed_tokens(text)
        if not matrix.tokens:
            return np.zeros(self.dimension)
        return matrix.vectors.mean(axis=0)

    def embed_tokens_many(self, texts: Sequence[str]) -> list[EmbeddingMatrix]:
        return [self.embed_tokens(text) for text in texts]

    def embed_sentences(self, texts: Sequence[str]) -> list[np.ndarray]:
        return [self.embed_sentence(text) for text in texts]

    def fingerprint(self) -> dict:
        return {"backend": self.name, "dimension": self.dimension, "seed": self.seed}


def decode_vectors(payload: str, count: int, dimension: int) -> np.ndarray:
    """Decode base64 little-endian float32 into a (count, dimension) array."""
    raw = base64.b64decode(payload)
    expected = count * dimension * 4
    if len(raw) != expected:
        raise EmbedServiceError(
            f"vector payload holds {len(raw)} bytes, expected {expected}"
        )
    return (
        np.frombuffer(raw, dtype="<f4").astype(np.float64).reshape(count, dimension)
    )


class RemoteBackend:
    """HTTP client for the embedding service; see the service README.

    ``cache_dir`` enables an on-disk response cache keyed by
    (model id, mode, sha256 of text) so reruns skip re-embedding.
    The health endpoint is still consulted on every construction to
    learn the model id and dimension.
    """

    name = "remote"

    def __init__(
        self,
        endpoint: str,
        batch_size: int = 32,
        timeout: float = 30.0,
        cache_dir: str | Path | None = None,
    ):
        import httpx

        if batch_size <= 0:
            raise ValueError("batch_size must be positive")
        self.endpoint = endpoint.rstrip("/")
        self.batch_size = batch_size
        self._client = httpx.Client(timeout=timeout)
        self._cache_dir = Path(cache_dir) if cache_dir else None
        health = self._get("/v1/health")
        self.model_id: str = health["model_id"]
        self.dimension: int = int(health["dimension"])

    def _get(self, path: str) -> dict:
        import httpx

        try:
            response = self._client.get(self.endpoint + path)
            response.raise_for_status()
            return response.json()
        except httpx.HTTPError as exc:
            raise EmbedServiceError(f"GET {path} failed: {exc}") from exc

    def _post_embed(self, texts: Sequence[str], mode: str) -> list[dict]:
        import httpx

        results: list[dict] = []
        for start in range(0, len(texts), self.batch_size):
            chunk = list(texts[start : start + self.batch_size])
            try:
                response = self._client.post(
                    self.endpoint + "/v1/embed",
                    json={"texts": chunk, "mode": mode},
                )
                response.raise_for_status()
                body = response.json()
            except httpx.HTTPError as exc:
                raise EmbedServiceError(f"POST /v1/embed failed: {exc}") from exc
            if int(body["dimension"]) != self.dimension:
                raise EmbedServiceError(
                    f"service dimension changed: {body['dimension']} != {self.dimension}"
                )
            if len(body["results"]) != len(chunk):
                raise EmbedServiceError("result count does not match request")
            results.extend(body["results"])
        return results

    def _cache_path(self, text: str, mode: str) -> Path | None:
        if self._cache_dir is None:
            return None
        text_hash = hashlib.sha256(text.encode("utf-8")).hexdigest()
        model_tag = hashlib.sha256(self.model_id.encode("utf-8")).hexdigest()[:16]
        return self._cache_dir / model_tag / f"{text_hash}.{mode}.npz"

    def _fetch(self, texts: Sequence[str], mode: str) -> list[dict]:
        """Resolve each text from cache or the service, preserving order."""
        resolved: list[dict | None] = [None] * len(texts)
        misses: list[int] = []
        for i, text in enumerate(texts):
            path = self._cache_path(text, mode)
            if path is not None and path.exists():
                with np.load(path, allow_pickle=False) as data:
                    if mode == "tokens":
                        resolved[i] = {
                            "tokens": [str(t) for t in data["tokens"]],
                            "vectors": data["vectors"],
                        }
                    else:
                        resolved[i] = {"vector": data["vector"]}
            else:
                misses.append(i)
        if misses:
            fetched = self._post_embed([texts[i] for i in misses], mode)
            for i, result in zip(misses, fetched):
                if mode == "tokens":
                    tokens = result["tokens"]
                    vectors = decode_vectors(
                        result["vectors_b64"], len(tokens), self.dimension
                    )
                    entry = {"tokens": tokens, "vectors": vectors}
                else:
                    entry = {
                        "vector": decode_vectors(
                            result["vector_b64"], 1, self.dimension
                        )[0]
                    }
                resolved[i] = entry
                path = self._cache_path(texts[i], mode)
                if path is not None:
                    path.parent.mkdir(parents=True, exist_ok=True)
                    if mode == "tokens":
                        np.savez(
                            path,
                            tokens=np.array(entry["tokens"], dtype=str),
                            vectors=entry["vectors"],
                        )
                    else:
                        np.savez(path, vector=entry["vector"])
        return resolved  # type: ignore[return-value]

    def tokenize(self, text: str) -> TokenizedText:
        result = self._fetch([text], "tokens")[0]
        return TokenizedText.from_tokens(result["tokens"])

    def embed_tokens(self, text: str) -> EmbeddingMatrix:
        result = self._fetch([text], "tokens")[0]
        tokens = tuple(result["tokens"])
        vectors = np.asarray(result["vectors"], dtype=np.float64)
        if vectors.size == 0:
            vectors = np.zeros((0, self.dimension))
        return EmbeddingMatrix(tokens=tokens, vectors=vectors, dimension=self.dimension)

    def embed_sentence(self, text: str) -> np.ndarray:
        result = self._fetch([text], "sentence")[0]
        return np.asarray(result["vector"], dtype=np.float64)

    def embed_tokens_many(self, texts: Sequence[str]) -> list[EmbeddingMatrix]:
        results = self._fetch(list(texts), "tokens")
        out = []
        for result in results:
            tokens = tuple(result["tokens"])
            vectors = np.asarray(result["vectors"], dtype=np.float64)
            if vectors.size == 0:
                vectors = np.zeros((0, self.dimension))
            out.append(
                EmbeddingMatrix(tokens=tokens, vectors=vectors, dimension=self.dimension)
            )
        return out

    def embed_sentences(self, texts: Sequence[str]) -> list[np.ndarray]:
        results = self._fetch(list(texts), "sentence")
        return [np.asarray(r["vector"], dtype=np.float64) for r in results]

    def fingerprint(self) -> dict:
        return {
            "backend": self.name,
            "model_id": self.model_id,
            "dimension": self.dimension,
        }

    def close(self):
        self._client.close()


def fingerprint_digest(fingerprint: dict) -> str:
    """Stable short digest of a backend fingerprint for report headers."""
    blob = json.dumps(fingerprint, sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]
