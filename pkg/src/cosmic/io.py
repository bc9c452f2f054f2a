"""File formats: CEMB embedding files, label/score CSV, run manifests.

CEMB layout (all little-endian):

    offset  size  field
    0       4     magic "CEMB"
    4       4     version, unsigned 32-bit, currently 1
    8       4     n_rows, unsigned 32-bit
    12      4     dim, unsigned 32-bit
    16      1     dtype, unsigned 8-bit, 0 = IEEE-754 binary32
    17      -     payload, n_rows*dim float32 values, row-major

Ids live in a text sidecar "<path>.ids", one UTF-8 id per line, same order
as the payload rows.  Round-tripping any valid matrix through
write_cemb/read_cemb is byte-identical.

Labels and scores are line-delimited "id,value" text.  Commas inside ids
are disallowed; everything after the first comma is the value.  A leading
header line is skipped when its first field equals "id".

Manifests are "key: value" lines plus an optional "extra:" block of
indented key/value pairs; relative paths inside a manifest are resolved
against the manifest's own directory.
"""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass, field

import numpy as np

from .core import EmbeddingMatrix
from .errors import (
    BadMagic,
    DuplicateId,
    EmptyDataset,
    IoFailure,
    MismatchedIds,
    NonFiniteValue,
    ParseError,
    TruncatedPayload,
    VersionUnsupported,
)

CEMB_MAGIC = b"CEMB"
CEMB_VERSION = 1
CEMB_DTYPE_F32 = 0
_HEADER = struct.Struct("<4sIIIB")  # 17 bytes

assert _HEADER.size == 17


def _ids_path(path: str) -> str:
    return str(path) + ".ids"


def read_cemb(path: str, ids_path: str | None = None) -> EmbeddingMatrix:
    """Load an embedding matrix and its ids sidecar.

    Header and payload sizes are validated before any value is used; the
    values are finite-checked so downstream code never sees NaN.
    """
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if len(blob) < 4 or blob[:4] != CEMB_MAGIC:
        raise BadMagic(f"{path}: not a CEMB file (magic {blob[:4]!r})")
    if len(blob) < _HEADER.size:
        raise TruncatedPayload(f"{path}: header is {len(blob)} bytes, need {_HEADER.size}")
    _, version, n_rows, dim, dtype = _HEADER.unpack_from(blob, 0)
    if version != CEMB_VERSION:
        raise VersionUnsupported(f"{path}: version {version}, reader supports {CEMB_VERSION}")
    if dtype != CEMB_DTYPE_F32:
        raise VersionUnsupported(f"{path}: dtype code {dtype}, reader supports {CEMB_DTYPE_F32}")
    if n_rows == 0 or dim == 0:
        raise EmptyDataset(f"{path}: header declares {n_rows}x{dim}")
    expected = n_rows * dim * 4
    payload = blob[_HEADER.size:]
    if len(payload) < expected:
        raise TruncatedPayload(
            f"{path}: payload is {len(payload)} bytes, header declares {expected}"
        )
    if len(payload) > expected:
        raise ParseError(
            f"{path}: {len(payload) - expected} trailing bytes after declared payload"
        )
    values = np.frombuffer(payload, dtype="<f4").reshape(n_rows, dim)

    sidecar = _ids_path(path) if ids_path is None else ids_path
    try:
        with open(sidecar, "r", encoding="utf-8") as fh:
            lines = fh.read().split("\n")
    except OSError as exc:
        raise IoFailure(f"cannot read ids sidecar {sidecar}: {exc}") from exc
    if lines and lines[-1] == "":
        lines.pop()
    if len(lines) != n_rows:
        raise MismatchedIds(f"{sidecar}: {len(lines)} ids for {n_rows} rows")
    seen = set()
    for i in lines:
        if i in seen:
            raise DuplicateId(f"{sidecar}: duplicate id {i!r}")
        seen.add(i)

    matrix = EmbeddingMatrix(values=values.astype(np.float64), ids=tuple(lines))
    matrix.check_finite(str(path))
    return matrix


def write_cemb(matrix: EmbeddingMatrix, path: str, ids_path: str | None = None) -> None:
    """Write a matrix as CEMB plus ids sidecar, readable by read_cemb.

    Values are stored as float32; a matrix that came from read_cemb writes
    back byte-identically because the float64 values are exact float32.
    """
    header = _HEADER.pack(
        CEMB_MAGIC, CEMB_VERSION, matrix.n_rows, matrix.dim, CEMB_DTYPE_F32
    )
    payload = np.ascontiguousarray(matrix.values, dtype="<f4").tobytes()
    sidecar = _ids_path(path) if ids_path is None else ids_path
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(payload)
        with open(sidecar, "w", encoding="utf-8") as fh:
            for i in matrix.ids:
                fh.write(i)
                fh.write("\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


# -- label and score CSV -------------------------------------------------------


@dataclass(frozen=True)
class LabelFile:
    """Parsed id->label rows plus the label vocabulary seen in the file."""

    pairs: tuple[tuple[str, str], ...]
    vocabulary: tuple[str, ...]

    def mapping(self) -> dict[str, str]:
        return dict(self.pairs)


def _read_id_value_lines(path: str):
    """Shared parser for 'id,value' files.  Yields (line_no, id, value)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read().split("\n")
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if raw and raw[-1] == "":
        raw.pop()
    rows = []
    for line_no, line in enumerate(raw, start=1):
        if line == "":
            continue
        if "," not in line:
            raise ParseError(f"{path}:{line_no}: expected 'id,value', got {line!r}", line=line_no)
        ident, value = line.split(",", 1)
        if line_no == 1 and ident == "id":
            continue
        if ident == "":
            raise ParseError(f"{path}:{line_no}: empty id", line=line_no)
        rows.append((line_no, ident, value))
    if not rows:
        raise EmptyDataset(f"{path}: no data rows")
    return rows


def read_labels(path: str) -> LabelFile:
    """Parse an id,label file; the vocabulary is the sorted set of labels."""
    pairs = []
    seen = set()
    for line_no, ident, value in _read_id_value_lines(path):
        if ident in seen:
            raise DuplicateId(f"{path}:{line_no}: duplicate id {ident!r}")
        seen.add(ident)
        pairs.append((ident, value))
    vocabulary = tuple(sorted({label for _, label in pairs}))
    return LabelFile(pairs=tuple(pairs), vocabulary=vocabulary)


def read_scores(path: str) -> dict[str, float]:
    """Parse an id,score file into an id->float map."""
    out: dict[str, float] = {}
    for line_no, ident, value in _read_id_value_lines(path):
        if ident in out:
            raise DuplicateId(f"{path}:{line_no}: duplicate id {ident!r}")
        try:
            score = float(value)
        except ValueError as exc:
            raise ParseError(
                f"{path}:{line_no}: not a number: {value!r}", line=line_no
            ) from exc
        if not math.isfinite(score):
            raise NonFiniteValue(f"{path}:{line_no}: non-finite score {value!r}", row=line_no)
        out[ident] = score
    return out


# -- manifests ------------------------------------------------------------------

_MANIFEST_KEYS = (
    "dataset_name",
    "embedder_name",
    "summarizer_name",
    "embedding_file",
    "ids_file",
    "created_by",
)


@dataclass(frozen=True)
class Manifest:
    """Provenance record tying one embedding file to its run metadata."""

    dataset_name: str
    embedder_name: str
    summarizer_name: str
    embedding_file: str
    ids_file: str
    created_by: str = ""
    extra: dict[str, str] = field(default_factory=dict)


def write_manifest(manifest: Manifest, path: str) -> None:
    lines = []
    for key in _MANIFEST_KEYS:
        lines.append(f"{key}: {getattr(manifest, key)}")
    if manifest.extra:
        lines.append("extra:")
        for key in sorted(manifest.extra):
            lines.append(f"  {key}: {manifest.extra[key]}")
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines))
            fh.write("\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def read_manifest(path: str) -> Manifest:
    """Parse a manifest.  Does not touch the referenced files; see load_manifest_matrix."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read().split("\n")
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    fields: dict[str, str] = {}
    extra: dict[str, str] = {}
    in_extra = False
    for line_no, line in enumerate(raw, start=1):
        if line.strip() == "":
            continue
        if line == "extra:":
            in_extra = True
            continue
        if in_extra:
            if not line.startswith("  "):
                raise ParseError(
                    f"{path}:{line_no}: extra entries must be indented", line=line_no
                )
            body = line[2:]
            if ": " not in body:
                raise ParseError(f"{path}:{line_no}: expected 'key: value'", line=line_no)
            key, value = body.split(": ", 1)
            extra[key] = value
            continue
        if ": " not in line:
            raise ParseError(f"{path}:{line_no}: expected 'key: value'", line=line_no)
        key, value = line.split(": ", 1)
        if key not in _MANIFEST_KEYS:
            raise ParseError(f"{path}:{line_no}: unknown key {key!r}", line=line_no)
        if key in fields:
            raise ParseError(f"{path}:{line_no}: repeated key {key!r}", line=line_no)
        fields[key] = value
    for key in _MANIFEST_KEYS:
        if key == "created_by":
            continue
        if key not in fields:
            raise ParseError(f"{path}: missing required key {key!r}")
    return Manifest(
        dataset_name=fields["dataset_name"],
        embedder_name=fields["embedder_name"],
        summarizer_name=fields["summarizer_name"],
        embedding_file=fields["embedding_file"],
        ids_file=fields["ids_file"],
        created_by=fields.get("created_by", ""),
        extra=extra,
    )


def load_manifest_matrix(path: str) -> tuple[Manifest, EmbeddingMatrix]:
    """Read a manifest and the embedding matrix it points to.

    Relative embedding/ids paths resolve against the manifest directory.
    Raises MismatchedIds when the declared ids file disagrees with the
    embedding header's row count (checked inside read_cemb).
    """
    manifest = read_manifest(path)
    base = os.path.dirname(os.path.abspath(path))

    def resolve(p: str) -> str:
        return p if os.path.isabs(p) else os.path.join(base, p)

    matrix = read_cemb(resolve(manifest.embedding_file), resolve(manifest.ids_file))
    return manifest, matrix
