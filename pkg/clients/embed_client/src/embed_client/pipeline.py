"""Corpus to CEMB: truncate, batch, embed, check, write."""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .corpus import Record
from .errors import DimensionMismatch, NonFiniteValue
from .formats import write_cemb, write_manifest

_CLIENT_TAG = "embed-client 0.1.0"


def head_truncate(text: str, max_tokens: int | None) -> str:
    """Keep the first max_tokens whitespace tokens; None means no limit."""
    if max_tokens is None:
        return text
    return " ".join(text.split()[:max_tokens])


def embed_records(records: list[Record], embedder, batch_size: int,
                  max_tokens: int | None) -> np.ndarray:
    """Embed in input order, sequentially, one batch at a time."""
    texts = [head_truncate(r.text, max_tokens) for r in records]
    chunks = []
    dim = None
    for start in range(0, len(texts), batch_size):
        chunk = np.asarray(embedder.embed(texts[start : start + batch_size]))
        if chunk.ndim != 2:
            raise DimensionMismatch(f"embedder returned ndim={chunk.ndim}, expected 2")
        if dim is None:
            dim = chunk.shape[1]
        elif chunk.shape[1] != dim:
            raise DimensionMismatch(
                f"batch at row {start} has dim {chunk.shape[1]}, first batch had {dim}"
            )
        if not np.isfinite(chunk).all():
            bad = int(np.argwhere(~np.isfinite(chunk).all(axis=1))[0][0])
            raise NonFiniteValue(f"non-finite embedding for id {records[start + bad].id!r}")
        chunks.append(chunk.astype(np.float32))
    return np.concatenate(chunks, axis=0)


@dataclass(frozen=True)
class EmbedResult:
    cemb_path: str
    ids_path: str
    manifest_path: str
    n_rows: int
    dim: int


def embed_corpus(records: list[Record], embedder, out_path: str,
                 batch_size: int = 32, max_tokens: int | None = None,
                 dataset_name: str = "", summarizer_name: str = "") -> EmbedResult:
    """Run the pipeline and write CEMB + ids + manifest next to out_path."""
    values = embed_records(records, embedder, batch_size, max_tokens)
    ids = tuple(r.id for r in records)
    ids_path = write_cemb(values, ids, out_path)
    manifest_path = f"{out_path}.manifest"
    write_manifest(
        manifest_path,
        fields={
            "dataset_name": dataset_name,
            "embedder_name": embedder.name,
            "summarizer_name": summarizer_name,
            "embedding_file": os.path.basename(out_path),
            "ids_file": os.path.basename(ids_path),
            "created_by": _CLIENT_TAG,
        },
        extra={
            "dim": str(values.shape[1]),
            "n_rows": str(values.shape[0]),
            "max_tokens": "none" if max_tokens is None else str(max_tokens),
        },
    )
    return EmbedResult(
        cemb_path=out_path,
        ids_path=ids_path,
        manifest_path=manifest_path,
        n_rows=values.shape[0],
        dim=values.shape[1],
    )
