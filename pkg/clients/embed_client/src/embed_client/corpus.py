"""JSONL corpus reading: one {"id": ..., "text": ...} object per line.

The whole file is validated before anything is returned, so a duplicate id
or empty text fails the run before any model is loaded or called.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import DuplicateId, EmptyText, IoFailure, ParseError


@dataclass(frozen=True)
class Record:
    """One corpus document."""

    id: str
    text: str


def read_corpus(path: str) -> list[Record]:
    """Parse and validate a JSONL corpus, preserving input order."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().split("\n")
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc

    records: list[Record] = []
    seen: set[str] = set()
    for line_no, line in enumerate(lines, start=1):
        if line.strip() == "":
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}:{line_no}: invalid JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise ParseError(f"{path}:{line_no}: expected an object, got {type(obj).__name__}")
        for key in ("id", "text"):
            if key not in obj:
                raise ParseError(f"{path}:{line_no}: missing {key!r} field")
            if not isinstance(obj[key], str):
                raise ParseError(
                    f"{path}:{line_no}: {key!r} must be a string, got {type(obj[key]).__name__}"
                )
        ident, text = obj["id"], obj["text"]
        if ident in seen:
            raise DuplicateId(f"{path}:{line_no}: duplicate id {ident!r}")
        seen.add(ident)
        if text.strip() == "":
            raise EmptyText(f"{path}:{line_no}: empty text for id {ident!r}")
        records.append(Record(id=ident, text=text))
    if not records:
        raise ParseError(f"{path}: corpus holds no records")
    return records
