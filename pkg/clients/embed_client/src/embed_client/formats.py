"""Writers for the engine's file formats: CEMB, ids sidecar, manifest.

Implemented against the published layouts so this package needs nothing
from the engine at runtime; the engine's validate command is the
compatibility check.

CEMB (little-endian): magic "CEMB", u32 version 1, u32 n_rows, u32 dim,
u8 dtype 0 (float32), then the row-major float32 payload. Ids go to
"<path>.ids", one per line, in row order.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import IoFailure

_HEADER = struct.Struct("<4sIIIB")

_MANIFEST_KEYS = (
    "dataset_name",
    "embedder_name",
    "summarizer_name",
    "embedding_file",
    "ids_file",
    "created_by",
)


def write_cemb(values: np.ndarray, ids: tuple[str, ...], path: str) -> str:
    """Write the matrix and its ids sidecar; returns the sidecar path."""
    values = np.ascontiguousarray(values, dtype="<f4")
    n_rows, dim = values.shape
    ids_path = f"{path}.ids"
    try:
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(b"CEMB", 1, n_rows, dim, 0))
            fh.write(values.tobytes())
        with open(ids_path, "w", encoding="utf-8") as fh:
            for ident in ids:
                fh.write(f"{ident}\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    return ids_path


def write_manifest(path: str, fields: dict[str, str], extra: dict[str, str]) -> None:
    """Write "key: value" lines in canonical order plus the extra block."""
    lines = [f"{key}: {fields.get(key, '')}" for key in _MANIFEST_KEYS]
    if extra:
        lines.append("extra:")
        for key in sorted(extra):
            lines.append(f"  {key}: {extra[key]}")
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines))
            fh.write("\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
