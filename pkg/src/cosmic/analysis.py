"""Evaluation harness: label agreement, cosine agreement, rank correlations.

expected_error_rate compares two labelings of the same items and reports
the empirical rate of disagreement, the direct estimate of the probability
that a concept extracted from a summary differs from one extracted from
the source.  The rank coefficients are system-level (one value per
summarizer) and hand-rolled so their arithmetic is simple enough to check
exactly against brute-force oracles.

Undefined statistics are returned as None, never as 0: a constant input
has no rank correlation, and 0 would be a real (and meaningful) value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import PairedDataset
from .errors import AllZeroRows, DimMismatch, LengthMismatch, NoCommonIds
from .io import LabelFile


@dataclass(frozen=True)
class AgreementReport:
    """Label disagreement over the id intersection of two label files."""

    n_common: int
    n_disagree: int
    error_rate: float
    confusion: tuple[tuple[tuple[str, str], int], ...]  # ((label_a, label_b), count)
    only_in_a: int
    only_in_b: int


def expected_error_rate(a: LabelFile, b: LabelFile) -> AgreementReport:
    """Disagreement rate between two labelings, scored on shared ids only.

    Ids present in just one file are counted and reported but never
    scored.  Symmetric up to transposing the confusion table.
    """
    map_a = a.mapping()
    map_b = b.mapping()
    common = [i for i in map_a if i in map_b]
    if not common:
        raise NoCommonIds("label files share no ids")
    confusion: dict[tuple[str, str], int] = {}
    n_disagree = 0
    for i in common:
        key = (map_a[i], map_b[i])
        confusion[key] = confusion.get(key, 0) + 1
        if map_a[i] != map_b[i]:
            n_disagree += 1
    return AgreementReport(
        n_common=len(common),
        n_disagree=n_disagree,
        error_rate=n_disagree / len(common),
        confusion=tuple(sorted(confusion.items())),
        only_in_a=len(map_a) - len(common),
        only_in_b=len(map_b) - len(common),
    )


def render_agreement(report: AgreementReport) -> str:
    lines = [
        f"n_common: {report.n_common}",
        f"n_disagree: {report.n_disagree}",
        f"error_rate: {report.error_rate!r}",
        f"only_in_a: {report.only_in_a}",
        f"only_in_b: {report.only_in_b}",
        "confusion:",
    ]
    for (label_a, label_b), count in report.confusion:
        lines.append(f"  {label_a},{label_b}: {count}")
    return "\n".join(lines) + "\n"


def cosine_agreement_details(pairs: PairedDataset) -> tuple[float, int, int]:
    """(mean cosine over usable rows, rows used, zero-norm rows excluded)."""
    if pairs.source.dim != pairs.summary.dim:
        raise DimMismatch(
            f"cosine needs equal dims, got {pairs.source.dim} and {pairs.summary.dim}"
        )
    t = pairs.source.values
    s = pairs.summary.values
    norms = np.linalg.norm(t, axis=1) * np.linalg.norm(s, axis=1)
    usable = norms > 0.0
    n_used = int(usable.sum())
    if n_used == 0:
        raise AllZeroRows("every row pair has a zero-norm member")
    dots = (t[usable] * s[usable]).sum(axis=1)
    mean = float((dots / norms[usable]).mean())
    return mean, n_used, int(len(norms) - n_used)


def cosine_agreement(pairs: PairedDataset) -> float:
    """Mean cosine of paired rows; zero-norm rows are excluded."""
    mean, _, _ = cosine_agreement_details(pairs)
    return mean


def _as_vector(v, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise LengthMismatch(f"{name} must be 1-D")
    return arr


def _fractional_ranks(v: np.ndarray) -> np.ndarray:
    """1-based ranks with ties given the average of their positions."""
    n = len(v)
    order = np.argsort(v, kind="stable")
    sv = v[order]
    ranks = np.empty(n)
    i = 0
    while i < n:
        j = i
        while j + 1 < n and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(x, y) -> float | None:
    """Pearson correlation of fractional ranks; None when either side is constant."""
    xv = _as_vector(x, "x")
    yv = _as_vector(y, "y")
    if len(xv) != len(yv):
        raise LengthMismatch(f"lengths differ: {len(xv)} vs {len(yv)}")
    if len(xv) < 3:
        raise LengthMismatch(f"spearman needs length >= 3, got {len(xv)}")
    rx = _fractional_ranks(xv)
    ry = _fractional_ranks(yv)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    sxx = float((dx * dx).sum())
    syy = float((dy * dy).sum())
    if sxx == 0.0 or syy == 0.0:
        return None
    return float((dx * dy).sum()) / math.sqrt(sxx * syy)


def kendall_tau_b(x, y) -> float | None:
    """(concordant - discordant) / sqrt((n0-n1)(n0-n2)); None when undefined.

    Direct O(n^2) pair enumeration; system-level inputs are small.  n1 and
    n2 are the tied-pair counts in x and y.
    """
    xv = _as_vector(x, "x")
    yv = _as_vector(y, "y")
    if len(xv) != len(yv):
        raise LengthMismatch(f"lengths differ: {len(xv)} vs {len(yv)}")
    n = len(xv)
    if n < 2:
        raise LengthMismatch(f"kendall_tau_b needs length >= 2, got {n}")
    concordant = discordant = ties_x = ties_y = 0
    for i in range(n - 1):
        for j in range(i + 1, n):
            dx = xv[i] - xv[j]
            dy = yv[i] - yv[j]
            if dx == 0.0:
                ties_x += 1
            if dy == 0.0:
                ties_y += 1
            if dx == 0.0 or dy == 0.0:
                continue
            if (dx > 0.0) == (dy > 0.0):
                concordant += 1
            else:
                discordant += 1
    n0 = n * (n - 1) // 2
    denom_sq = (n0 - ties_x) * (n0 - ties_y)
    if denom_sq == 0:
        return None
    return (concordant - discordant) / math.sqrt(denom_sq)


@dataclass(frozen=True)
class CorrCell:
    """One metric-target cell; None coefficients mean undefined."""

    spearman: float | None
    kendall: float | None
    n: int


@dataclass(frozen=True)
class CorrelationReport:
    """Cross-table of rank correlations: metrics as rows, targets as columns."""

    metric_names: tuple[str, ...]
    target_names: tuple[str, ...]
    cells: tuple[tuple[CorrCell, ...], ...]


def correlation_report(
    metrics: list[tuple[str, dict[str, float]]],
    targets: list[tuple[str, dict[str, float]]],
) -> CorrelationReport:
    """Correlate every metric with every target over shared ids.

    Cells with fewer than 3 shared ids are emitted as undefined rather
    than raising; row and column order follow the input order.
    """
    rows = []
    for _, metric_map in metrics:
        row = []
        for _, target_map in targets:
            common = sorted(i for i in metric_map if i in target_map)
            if len(common) < 3:
                row.append(CorrCell(spearman=None, kendall=None, n=len(common)))
                continue
            mv = [metric_map[i] for i in common]
            tv = [target_map[i] for i in common]
            row.append(
                CorrCell(
                    spearman=spearman(mv, tv),
                    kendall=kendall_tau_b(mv, tv),
                    n=len(common),
                )
            )
        rows.append(tuple(row))
    return CorrelationReport(
        metric_names=tuple(name for name, _ in metrics),
        target_names=tuple(name for name, _ in targets),
        cells=tuple(rows),
    )


def _cell_csv(value: float | None) -> str:
    return "undefined" if value is None else repr(value)


def correlation_csv(report: CorrelationReport) -> str:
    """Long-form CSV: one line per metric-target cell."""
    lines = ["metric,target,spearman,kendall_tau_b,n"]
    for mi, metric in enumerate(report.metric_names):
        for ti, target in enumerate(report.target_names):
            cell = report.cells[mi][ti]
            lines.append(
                f"{metric},{target},{_cell_csv(cell.spearman)},"
                f"{_cell_csv(cell.kendall)},{cell.n}"
            )
    return "\n".join(lines) + "\n"


def correlation_text(report: CorrelationReport) -> str:
    """Aligned table, metrics as rows and targets as columns."""

    def cell_text(cell: CorrCell) -> str:
        if cell.spearman is None and cell.kendall is None:
            return f"undef (n={cell.n})"
        sp = "undef" if cell.spearman is None else f"{cell.spearman:+.4f}"
        kt = "undef" if cell.kendall is None else f"{cell.kendall:+.4f}"
        return f"rho={sp} tau={kt} (n={cell.n})"

    header = ["metric"] + list(report.target_names)
    body = []
    for mi, metric in enumerate(report.metric_names):
        body.append([metric] + [cell_text(c) for c in report.cells[mi]])
    widths = [
        max(len(row[c]) for row in [header] + body) for c in range(len(header))
    ]
    lines = []
    for row in [header] + body:
        lines.append("  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)).rstrip())
    return "\n".join(lines) + "\n"
