"""Pairwise informativeness between summarizers and its graph export.

For M summarizer embedding sets over the same source documents, entry
(i, j) of the hierarchy matrix is the estimated predictive information
I_hat(S_i -> S_j): how much model i's summaries reduce the entropy of model
j's.  Models whose summaries say little about anyone else's (and about
whom others say little) sit at the bottom of both averages; out-of-family
or broken models show up exactly that way.

Every ordered pair gets its own seed derived from (global seed, i, j), so
the M(M-1) fits can run in any order or in parallel and still reproduce
bit-identically.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .core import EmbeddingMatrix, PairedDataset, derived_rng
from .errors import MismatchedIds, TooFewModels
from .knife import KnifeConfig, S_TO_T, estimate_mi

_SEED_TAG_PAIR = 101


def _pair_seed(seed: int, i: int, j: int) -> int:
    """Deterministic per-pair seed, independent of evaluation order."""
    return int(derived_rng(seed, _SEED_TAG_PAIR, i, j).integers(0, 2**63))


@dataclass(frozen=True)
class HierarchyResult:
    """Directed MI matrix plus per-model averages.

    matrix[i, j] = I_hat(S_i -> S_j) for i != j; the diagonal is NaN (a model
    against itself is not a meaningful comparison).
    """

    names: tuple[str, ...]
    matrix: np.ndarray
    avg_outgoing: np.ndarray
    avg_incoming: np.ndarray


def _align_sets(
    sets: list[tuple[str, EmbeddingMatrix]]
) -> tuple[tuple[str, ...], list[EmbeddingMatrix]]:
    if len(sets) < 2:
        raise TooFewModels(f"hierarchy needs at least 2 sets, got {len(sets)}")
    names = tuple(name for name, _ in sets)
    if len(set(names)) != len(names):
        raise MismatchedIds("hierarchy set names must be unique")
    reference = set(sets[0][1].ids)
    for name, matrix in sets:
        matrix.check_finite(name)
        matrix.check_unique_ids(name)
        if set(matrix.ids) != reference:
            raise MismatchedIds(
                f"set {name!r} covers different source ids than {sets[0][0]!r}"
            )
    order = tuple(sorted(reference))
    aligned = []
    for _, matrix in sets:
        index = matrix.row_index()
        rows = np.array([index[i] for i in order], dtype=np.intp)
        aligned.append(EmbeddingMatrix(values=matrix.values[rows], ids=order))
    return names, aligned


def _pair_mi(args) -> tuple[int, int, float]:
    i, j, conditioning, target, config = args
    pair_config = replace(config, seed=_pair_seed(config.seed, i, j))
    pairs = PairedDataset(source=target, summary=conditioning)
    return i, j, estimate_mi(pairs, pair_config, S_TO_T).mi


def build_hierarchy(
    sets: list[tuple[str, EmbeddingMatrix]],
    config: KnifeConfig,
    jobs: int = 1,
) -> HierarchyResult:
    """Estimate all M(M-1) directed informativeness values.

    Sets must cover identical id sets; each set's rows are realigned to
    sorted id order before fitting, so the row order inside a file cannot
    change any estimate.  jobs > 1 fans the pairs out to worker processes;
    results are merged by index so the matrix is identical at any job
    count.
    """
    names, aligned = _align_sets(sets)
    m = len(names)
    tasks = [
        (i, j, aligned[i], aligned[j], config)
        for i in range(m)
        for j in range(m)
        if i != j
    ]
    matrix = np.full((m, m), np.nan)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_pair_mi, tasks))
    else:
        results = [_pair_mi(t) for t in tasks]
    for i, j, mi in results:
        matrix[i, j] = mi

    off_diag = ~np.eye(m, dtype=bool)
    avg_outgoing = np.array(
        [matrix[i, off_diag[i]].mean() for i in range(m)]
    )
    avg_incoming = np.array(
        [matrix[off_diag[:, j], j].mean() for j in range(m)]
    )
    return HierarchyResult(
        names=names,
        matrix=matrix,
        avg_outgoing=avg_outgoing,
        avg_incoming=avg_incoming,
    )


def export_dot(result: HierarchyResult, threshold: float = 0.0) -> str:
    """DOT digraph: nodes carry both averages, edges carry I_hat weights.

    Nodes and edges are emitted in sorted-name order so the text is
    byte-identical across runs.  Edges below the threshold are dropped.
    """
    order = sorted(range(len(result.names)), key=lambda i: result.names[i])
    lines = ["digraph hierarchy {"]
    for i in order:
        lines.append(
            f'  "{result.names[i]}" [avg_outgoing={result.avg_outgoing[i]:.6f}, '
            f"avg_incoming={result.avg_incoming[i]:.6f}];"
        )
    for i in order:
        for j in order:
            if i == j:
                continue
            weight = result.matrix[i, j]
            if weight >= threshold:
                lines.append(
                    f'  "{result.names[i]}" -> "{result.names[j]}" '
                    f"[weight={weight:.6f}];"
                )
    lines.append("}")
    return "\n".join(lines) + "\n"


def matrix_csv(result: HierarchyResult) -> str:
    """M x M CSV with a header row of names; the diagonal is left empty."""
    lines = ["name," + ",".join(result.names)]
    for i, name in enumerate(result.names):
        cells = [name]
        for j in range(len(result.names)):
            cells.append("" if i == j else repr(float(result.matrix[i, j])))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
