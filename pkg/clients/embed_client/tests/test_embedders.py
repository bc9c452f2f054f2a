"""The offline hashed embedder and model loading."""

import sys
import types

import numpy as np
import pytest

from embed_client.embedders import (
    HASHED_MODEL,
    HashedNgramEmbedder,
    load_embedder,
)
from embed_client.errors import ModelLoadFailure


class TestHashedNgram:
    def test_shape_dtype_norm(self):
        emb = HashedNgramEmbedder()
        out = emb.embed(["one sentence", "another, rather longer, sentence"])
        assert out.shape == (2, 256)
        assert out.dtype == np.float32
        assert np.allclose(np.linalg.norm(out, axis=1), 1.0, atol=1e-6)

    def test_deterministic_across_instances(self):
        a = HashedNgramEmbedder().embed(["the same text"])
        b = HashedNgramEmbedder().embed(["the same text"])
        assert np.array_equal(a, b)

    def test_different_texts_differ(self):
        out = HashedNgramEmbedder().embed(["alpha beta gamma", "delta epsilon zeta"])
        assert not np.array_equal(out[0], out[1])

    def test_unicode_normalization_and_case(self):
        emb = HashedNgramEmbedder()
        nfc = emb.embed(["Caf\u00e9 MENU"])
        nfd = emb.embed(["Cafe\u0301 menu"])
        assert np.array_equal(nfc, nfd)

    def test_short_text(self):
        out = HashedNgramEmbedder().embed(["a", "xy"])
        assert np.allclose(np.linalg.norm(out, axis=1), 1.0, atol=1e-6)

    def test_custom_dim(self):
        assert HashedNgramEmbedder(dim=64).embed(["abcdef"]).shape == (1, 64)


class TestLoadEmbedder:
    def test_hashed_name(self):
        emb = load_embedder(HASHED_MODEL)
        assert emb.name == HASHED_MODEL
        assert emb.dim == 256

    def test_missing_package(self, monkeypatch):
        # None in sys.modules makes the import statement raise ImportError.
        monkeypatch.setitem(sys.modules, "sentence_transformers", None)
        with pytest.raises(ModelLoadFailure, match="sentence-transformers"):
            load_embedder("some/model")

    def test_unloadable_model(self, monkeypatch):
        stub = types.ModuleType("sentence_transformers")

        def boom(name):
            raise RuntimeError("no such model on disk")

        stub.SentenceTransformer = boom
        monkeypatch.setitem(sys.modules, "sentence_transformers", stub)
        with pytest.raises(ModelLoadFailure, match="no such model"):
            load_embedder("definitely/not-a-model")
