"""Core data containers: embedding matrices, paired datasets, seeding.

An EmbeddingMatrix is an (n_rows, dim) float64 array plus one string id per
row.  A PairedDataset holds two matrices whose rows correspond item for item;
validate_pairing is the blessed constructor and realigns rows by id so that
downstream estimators never see misordered pairs.

All randomness in the package flows through derived_rng: a root seed plus a
tuple of integer tags yields an independent, platform-stable stream.  Running
the same operation with the same seed must produce bit-identical results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimMismatch,
    DuplicateId,
    EmptyDataset,
    MismatchedIds,
    NonFiniteValue,
    ShapeMismatch,
)

_MASK64 = (1 << 64) - 1


def derived_rng(seed: int, *tags: int) -> np.random.Generator:
    """Deterministic child generator for (seed, tags).

    Distinct tag tuples give independent streams, so concurrent work items
    can each derive their own generator from one root seed without any
    dependence on scheduling order.
    """
    entries = [int(seed) & _MASK64] + [int(t) & _MASK64 for t in tags]
    return np.random.default_rng(np.random.SeedSequence(entries))


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Row-major float64 embeddings with one id per row.

    Construction enforces shape agreement only.  Finiteness and id
    uniqueness are checked at pairing/read time so that diagnostics can
    point at the offending row of the offending file.
    """

    values: np.ndarray
    ids: tuple[str, ...]

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ShapeMismatch(f"embedding matrix must be 2-D, got shape {values.shape}")
        if values.shape[0] == 0 or values.shape[1] == 0:
            raise EmptyDataset(f"embedding matrix must be non-empty, got shape {values.shape}")
        ids = tuple(str(i) for i in self.ids)
        if len(ids) != values.shape[0]:
            raise ShapeMismatch(
                f"{len(ids)} ids for {values.shape[0]} rows"
            )
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "ids", ids)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def check_finite(self, label: str = "matrix") -> None:
        """Raise NonFiniteValue naming the first bad row."""
        finite_rows = np.isfinite(self.values).all(axis=1)
        if not finite_rows.all():
            row = int(np.flatnonzero(~finite_rows)[0])
            raise NonFiniteValue(
                f"{label} has a non-finite value in row {row} (id {self.ids[row]!r})",
                row=row,
            )

    def check_unique_ids(self, label: str = "matrix") -> None:
        if len(set(self.ids)) != len(self.ids):
            seen = set()
            for i in self.ids:
                if i in seen:
                    raise DuplicateId(f"{label} has duplicate id {i!r}")
                seen.add(i)

    def row_index(self) -> dict[str, int]:
        return {i: k for k, i in enumerate(self.ids)}


@dataclass(frozen=True)
class PairedDataset:
    """Aligned (source, summary) embedding matrices.

    Rows correspond: source row k and summary row k describe the same item
    and share the same id.  Dimensions of the two sides may differ.
    """

    source: EmbeddingMatrix
    summary: EmbeddingMatrix

    def __post_init__(self):
        if self.source.n_rows != self.summary.n_rows:
            raise ShapeMismatch(
                f"{self.source.n_rows} source rows vs {self.summary.n_rows} summary rows"
            )

    @property
    def n_pairs(self) -> int:
        return self.source.n_rows

    def swapped(self) -> "PairedDataset":
        """The same pairs with the roles of the two sides exchanged."""
        return PairedDataset(source=self.summary, summary=self.source)


def validate_pairing(source: EmbeddingMatrix, summary: EmbeddingMatrix) -> PairedDataset:
    """Check finiteness and id bijection, realign summary rows to source order.

    Raises DuplicateId when either side repeats an id, MismatchedIds when
    the id sets differ, NonFiniteValue (with the row) on NaN or infinity.
    Already aligned inputs pass through unchanged, so the operation is
    idempotent.
    """
    source.check_finite("source")
    summary.check_finite("summary")
    source.check_unique_ids("source")
    summary.check_unique_ids("summary")
    if source.n_rows != summary.n_rows or set(source.ids) != set(summary.ids):
        only_source = sorted(set(source.ids) - set(summary.ids))[:5]
        only_summary = sorted(set(summary.ids) - set(source.ids))[:5]
        raise MismatchedIds(
            "source and summary ids do not match "
            f"(only in source: {only_source}, only in summary: {only_summary})"
        )
    if source.ids == summary.ids:
        return PairedDataset(source=source, summary=summary)
    index = summary.row_index()
    order = np.array([index[i] for i in source.ids], dtype=np.intp)
    realigned = EmbeddingMatrix(values=summary.values[order], ids=source.ids)
    return PairedDataset(source=source, summary=realigned)


def check_same_dim(a: EmbeddingMatrix, b: EmbeddingMatrix, context: str = "matrices") -> None:
    if a.dim != b.dim:
        raise DimMismatch(f"{context}: dims {a.dim} and {b.dim} differ")
