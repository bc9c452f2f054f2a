"""Batching, truncation, output files."""

import numpy as np
import pytest

from embed_client.corpus import Record
from embed_client.embedders import HashedNgramEmbedder
from embed_client.errors import DimensionMismatch, NonFiniteValue
from embed_client.pipeline import embed_corpus, embed_records, head_truncate

RECORDS = [
    Record("a", "first document about birds"),
    Record("b", "second document about fish and rivers"),
    Record("c", "third one"),
    Record("d", "fourth, the longest document of the whole corpus by far"),
    Record("e", "fifth"),
]


class TestHeadTruncate:
    def test_no_limit(self):
        assert head_truncate("a b c", None) == "a b c"

    def test_keeps_head(self):
        assert head_truncate("a b c d e", 3) == "a b c"

    def test_limit_beyond_length(self):
        assert head_truncate("a b", 10) == "a b"


class TestEmbedRecords:
    def test_batch_size_invariance(self):
        emb = HashedNgramEmbedder()
        one = embed_records(RECORDS, emb, batch_size=1, max_tokens=None)
        big = embed_records(RECORDS, emb, batch_size=64, max_tokens=None)
        assert np.array_equal(one, big)

    def test_input_order(self):
        emb = HashedNgramEmbedder()
        out = embed_records(RECORDS, emb, batch_size=2, max_tokens=None)
        for i, record in enumerate(RECORDS):
            assert np.array_equal(out[i], emb.embed([record.text])[0])

    def test_max_tokens_equals_pre_truncated(self):
        emb = HashedNgramEmbedder()
        out = embed_records(RECORDS, emb, batch_size=3, max_tokens=2)
        manual = emb.embed([" ".join(r.text.split()[:2]) for r in RECORDS])
        assert np.array_equal(out, manual)

    def test_dimension_mismatch_between_batches(self):
        class Wobbly:
            name = "wobbly"
            dim = None
            calls = 0

            def embed(self, texts):
                self.calls += 1
                return np.zeros((len(texts), 4 if self.calls == 1 else 5))

        with pytest.raises(DimensionMismatch, match="first batch had 4"):
            embed_records(RECORDS, Wobbly(), batch_size=2, max_tokens=None)

    def test_wrong_rank(self):
        class Flat:
            name = "flat"
            dim = None

            def embed(self, texts):
                return np.zeros(len(texts))

        with pytest.raises(DimensionMismatch, match="ndim=1"):
            embed_records(RECORDS, Flat(), batch_size=2, max_tokens=None)

    def test_non_finite_names_the_id(self):
        class Poison:
            name = "poison"
            dim = None

            def embed(self, texts):
                out = np.zeros((len(texts), 3))
                if "third" in texts[0]:
                    out[0, 1] = np.nan
                return out

        with pytest.raises(NonFiniteValue, match="'c'"):
            embed_records(RECORDS, Poison(), batch_size=2, max_tokens=None)


class TestEmbedCorpus:
    def test_writes_all_three_files(self, tmp_path):
        out = str(tmp_path / "run.cemb")
        result = embed_corpus(RECORDS, HashedNgramEmbedder(), out,
                              dataset_name="toy", summarizer_name="none")
        assert result.n_rows == 5
        assert result.dim == 256
        assert (tmp_path / "run.cemb").exists()
        assert (tmp_path / "run.cemb.ids").exists()
        assert (tmp_path / "run.cemb.manifest").exists()

    def test_ids_in_row_order(self, tmp_path):
        out = str(tmp_path / "run.cemb")
        embed_corpus(RECORDS, HashedNgramEmbedder(), out)
        ids = (tmp_path / "run.cemb.ids").read_text(encoding="utf-8").splitlines()
        assert ids == [r.id for r in RECORDS]

    def test_manifest_contents(self, tmp_path):
        out = str(tmp_path / "run.cemb")
        embed_corpus(RECORDS, HashedNgramEmbedder(), out,
                     dataset_name="toy", max_tokens=7)
        text = (tmp_path / "run.cemb.manifest").read_text(encoding="utf-8")
        for needle in (
            "dataset_name: toy",
            "embedder_name: hashed-ngram-v1",
            "embedding_file: run.cemb",
            "ids_file: run.cemb.ids",
            "  dim: 256",
            "  n_rows: 5",
            "  max_tokens: 7",
        ):
            assert needle in text

    def test_rerun_byte_identical(self, tmp_path):
        a, b = str(tmp_path / "a.cemb"), str(tmp_path / "b.cemb")
        embed_corpus(RECORDS, HashedNgramEmbedder(), a)
        embed_corpus(RECORDS, HashedNgramEmbedder(), b)
        assert (tmp_path / "a.cemb").read_bytes() == (tmp_path / "b.cemb").read_bytes()
