"""Embedding backends: sentence-transformers models plus an offline fallback.

The default model is an AnglE-family sentence embedder; any
sentence-transformers model id is accepted. The reserved name
"hashed-ngram-v1" selects a dependency-free hashed byte-ngram embedder
that is bit-deterministic across runs and machines, for air-gapped runs
and for tests.
"""

from __future__ import annotations

import hashlib
import unicodedata

import numpy as np

from .errors import ModelLoadFailure

DEFAULT_MODEL = "WhereIsAI/UAE-Large-V1"
HASHED_MODEL = "hashed-ngram-v1"

_NGRAM_SIZES = (3, 4, 5)


class HashedNgramEmbedder:
    """Signed feature hashing of byte n-grams, L2-normalized.

    No trained weights: the embedding of a text is a pure function of its
    NFC-lowercased bytes, so re-runs agree exactly.
    """

    def __init__(self, dim: int = 256):
        self.name = HASHED_MODEL
        self.dim = dim

    def _features(self, text: str):
        data = unicodedata.normalize("NFC", text).lower().encode("utf-8")
        if len(data) < _NGRAM_SIZES[0]:
            yield data
            return
        for size in _NGRAM_SIZES:
            for i in range(len(data) - size + 1):
                yield data[i : i + size]

    def embed(self, texts) -> np.ndarray:
        out = np.zeros((len(texts), self.dim), dtype=np.float64)
        for row, text in enumerate(texts):
            for feature in self._features(text):
                h = int.from_bytes(
                    hashlib.blake2b(feature, digest_size=8).digest(), "little"
                )
                sign = 1.0 if (h >> 63) & 1 else -1.0
                out[row, h % self.dim] += sign
            norm = np.linalg.norm(out[row])
            if norm == 0.0:
                # collisions cancelled everything; fall back to a unit basis vector
                whole = unicodedata.normalize("NFC", text).lower().encode("utf-8")
                h = int.from_bytes(hashlib.blake2b(whole, digest_size=8).digest(), "little")
                out[row, h % self.dim] = 1.0
            else:
                out[row] /= norm
        return out.astype(np.float32)


class SentenceTransformerEmbedder:
    """Thin wrapper over sentence_transformers.SentenceTransformer.encode."""

    def __init__(self, model_name: str):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise ModelLoadFailure(
                f"model {model_name!r} needs the sentence-transformers package: {exc}"
            ) from exc
        try:
            self._model = SentenceTransformer(model_name)
        except Exception as exc:
            raise ModelLoadFailure(f"cannot load model {model_name!r}: {exc}") from exc
        self.name = model_name
        dim = self._model.get_sentence_embedding_dimension()
        self.dim = int(dim) if dim else None

    def embed(self, texts) -> np.ndarray:
        out = self._model.encode(
            list(texts), convert_to_numpy=True, show_progress_bar=False
        )
        return np.asarray(out, dtype=np.float32)


def load_embedder(model_name: str):
    if model_name == HASHED_MODEL:
        return HashedNgramEmbedder()
    return SentenceTransformerEmbedder(model_name)
