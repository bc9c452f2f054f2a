"""The scoring pipeline: paired embeddings in, one structured report out.

The headline number is the predictive information in direction S->T: how
much the summary embeddings reduce the entropy of the source-text
embeddings.  The reverse direction is always computed too, as a diagnostic;
it is not averaged in because the two directions behave differently in
practice.  A Gaussian-baseline MI and a normalized score accompany the
headline value.

Normalized MI is 1 - h_conditional/h_marginal with differential entropies,
which can leave [0,1] (a negative conditional entropy pushes it above 1).
The value is reported verbatim with an in-range flag, never clamped.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import PairedDataset
from .errors import (
    InsufficientSamples,
    NearDuplicateInputs,
    SingularCovariance,
    ZeroMarginalEntropy,
)
from .knife import KnifeConfig, MiEstimate, S_TO_T, T_TO_S, estimate_mi, kernel_backend

_NEAR_DUPLICATE_COSINE = 0.999


def normalized_mi(h_marginal: float, h_conditional: float) -> tuple[float, bool]:
    """1 - h_conditional/h_marginal, plus whether the value landed in [0,1].

    With differential entropies the ratio is not a true normalization: the
    conditional entropy may be negative and the marginal may be smaller
    than the MI, so out-of-range values are expected on real embeddings and
    are flagged rather than clamped.
    """
    if h_marginal == 0.0:
        raise ZeroMarginalEntropy("normalized MI undefined: h_marginal is 0")
    value = 1.0 - h_conditional / h_marginal
    return value, 0.0 <= value <= 1.0


def _ridged_cov(values: np.ndarray, ridge: float) -> np.ndarray:
    cov = np.atleast_2d(np.cov(values, rowvar=False, ddof=1))
    d = cov.shape[0]
    return cov + ridge * (np.trace(cov) / d) * np.eye(d)


def _logdet(cov: np.ndarray, what: str) -> float:
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0 or not np.isfinite(logdet):
        raise SingularCovariance(f"{what} covariance is singular even after ridging")
    return float(logdet)


def gaussian_mi(pairs: PairedDataset, ridge: float = 1e-6) -> float:
    """MI under a joint-Gaussian model of (T, S).

    0.5*(ln det Cov_T + ln det Cov_S - ln det Cov_joint) with each
    covariance ridge-regularized by ridge*trace/dim on the diagonal.  Exact
    for jointly Gaussian data; known to be badly biased on multimodal
    embedding clouds, which is why it is only a baseline here.
    """
    t = pairs.source.values
    s = pairs.summary.values
    n = t.shape[0]
    if n <= t.shape[1] + s.shape[1]:
        raise InsufficientSamples(
            f"need more than dim_T + dim_S = {t.shape[1] + s.shape[1]} rows, have {n}"
        )
    ld_t = _logdet(_ridged_cov(t, ridge), "source")
    ld_s = _logdet(_ridged_cov(s, ridge), "summary")
    ld_joint = _logdet(_ridged_cov(np.hstack([t, s]), ridge), "joint")
    return 0.5 * (ld_t + ld_s - ld_joint)


def mean_paired_cosine(pairs: PairedDataset) -> float | None:
    """Mean cosine of row pairs; None when the two sides differ in dim.

    Zero-norm rows contribute 0 (they carry no direction).
    """
    if pairs.source.dim != pairs.summary.dim:
        return None
    t = pairs.source.values
    s = pairs.summary.values
    dots = (t * s).sum(axis=1)
    norms = np.linalg.norm(t, axis=1) * np.linalg.norm(s, axis=1)
    out = np.zeros_like(dots)
    nz = norms > 0
    out[nz] = dots[nz] / norms[nz]
    return float(out.mean())


@dataclass(frozen=True)
class CosmicReport:
    """Everything one scoring run produced, plus the config that made it."""

    summarizer_name: str
    dataset_name: str
    embedder_name: str
    n_pairs: int
    mi_s_to_t: MiEstimate
    mi_t_to_s: MiEstimate
    normalized_mi: float
    normalized_mi_in_range: bool
    gaussian_mi: float | None
    gaussian_mi_note: str
    mean_pair_cosine: float | None
    near_duplicate: bool
    config: KnifeConfig
    backend: str


def cosmic_score(
    pairs: PairedDataset,
    config: KnifeConfig,
    summarizer_name: str = "",
    dataset_name: str = "",
    embedder_name: str = "",
) -> CosmicReport:
    """Score one summarizer's paired embeddings.

    Pure function of (pairs, config): rerunning with the same inputs gives
    a bit-identical report.  Near-duplicate inputs (mean paired cosine
    above 0.999) are flagged and warned about because MI diverges as S
    approaches a copy of T and the estimate then mostly reflects the
    sigma floor.
    """
    cosine = mean_paired_cosine(pairs)
    near_duplicate = cosine is not None and cosine > _NEAR_DUPLICATE_COSINE
    if near_duplicate:
        warnings.warn(
            f"source and summary embeddings are near-duplicates "
            f"(mean paired cosine {cosine:.4f}); the MI estimate is "
            f"floor-dominated and not comparable across runs",
            NearDuplicateInputs,
        )

    est_s_to_t = estimate_mi(pairs, config, S_TO_T)
    est_t_to_s = estimate_mi(pairs, config, T_TO_S)
    norm_value, norm_in_range = normalized_mi(
        est_s_to_t.h_marginal, est_s_to_t.h_conditional
    )

    try:
        g_mi: float | None = gaussian_mi(pairs)
        g_note = ""
    except (InsufficientSamples, SingularCovariance) as exc:
        g_mi = None
        g_note = f"{type(exc).__name__}: {exc}"

    return CosmicReport(
        summarizer_name=summarizer_name,
        dataset_name=dataset_name,
        embedder_name=embedder_name,
        n_pairs=pairs.n_pairs,
        mi_s_to_t=est_s_to_t,
        mi_t_to_s=est_t_to_s,
        normalized_mi=norm_value,
        normalized_mi_in_range=norm_in_range,
        gaussian_mi=g_mi,
        gaussian_mi_note=g_note,
        mean_pair_cosine=cosine,
        near_duplicate=near_duplicate,
        config=config,
        backend=kernel_backend,
    )


# -- rendering -------------------------------------------------------------------

REPORT_FORMAT_VERSION = 1

CSV_COLUMNS = (
    "summarizer",
    "dataset",
    "embedder",
    "n_pairs",
    "mi",
    "mi_raw",
    "h_marginal",
    "h_conditional",
    "mi_t_to_s",
    "mi_t_to_s_raw",
    "normalized_mi",
    "normalized_mi_in_range",
    "gaussian_mi",
    "mean_pair_cosine",
    "near_duplicate",
    "units",
    "seed",
    "modes",
    "backend",
)


def _fmt(value, scale: float = 1.0) -> str:
    if value is None:
        return "unavailable"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value * scale)
    return str(value)


def _config_lines(config: KnifeConfig) -> list[str]:
    fields = sorted(vars(config))
    return [f"{name}: {_fmt(getattr(config, name))}" for name in fields]


def report_text(report: CosmicReport, bits: bool = False) -> str:
    """Structured text rendering; entropy-bearing values convert under bits."""
    scale = 1.0 / float(np.log(2.0)) if bits else 1.0
    units = "bits" if bits else "nats"
    s2t, t2s = report.mi_s_to_t, report.mi_t_to_s
    lines = [
        f"cosmic-report-version: {REPORT_FORMAT_VERSION}",
        f"backend: {report.backend}",
        f"units: {units}",
        "",
        "[config]",
        *_config_lines(report.config),
        "",
        "[inputs]",
        f"summarizer_name: {report.summarizer_name}",
        f"dataset_name: {report.dataset_name}",
        f"embedder_name: {report.embedder_name}",
        f"n_pairs: {report.n_pairs}",
        f"n_train: {s2t.n_train}",
        f"n_eval: {s2t.n_eval}",
        "",
        "[score]",
        f"mi: {_fmt(s2t.mi, scale)}",
        f"mi_raw: {_fmt(s2t.mi_raw, scale)}",
        f"h_marginal: {_fmt(s2t.h_marginal, scale)}",
        f"h_conditional: {_fmt(s2t.h_conditional, scale)}",
        f"mi_t_to_s: {_fmt(t2s.mi, scale)}",
        f"mi_t_to_s_raw: {_fmt(t2s.mi_raw, scale)}",
        f"normalized_mi: {_fmt(report.normalized_mi)}",
        f"normalized_mi_in_range: {_fmt(report.normalized_mi_in_range)}",
        f"gaussian_mi: {_fmt(report.gaussian_mi, scale)}"
        + (f" ({report.gaussian_mi_note})" if report.gaussian_mi is None else ""),
        f"mean_pair_cosine: {_fmt(report.mean_pair_cosine)}",
        f"near_duplicate: {_fmt(report.near_duplicate)}",
        "",
        "[diagnostics]",
        f"marginal_epochs: {s2t.marginal_diagnostics.epochs_run}",
        f"marginal_stopped_early: {_fmt(s2t.marginal_diagnostics.stopped_early)}",
        f"marginal_final_loss: {_fmt(s2t.marginal_diagnostics.final_loss)}",
        f"conditional_epochs: {s2t.conditional_diagnostics.epochs_run}",
        f"conditional_stopped_early: {_fmt(s2t.conditional_diagnostics.stopped_early)}",
        f"conditional_final_loss: {_fmt(s2t.conditional_diagnostics.final_loss)}",
    ]
    return "\n".join(lines) + "\n"


def report_csv(report: CosmicReport, bits: bool = False, header: bool = True) -> str:
    """One CSV row (plus optional header) with the fixed column set."""
    scale = 1.0 / float(np.log(2.0)) if bits else 1.0
    s2t, t2s = report.mi_s_to_t, report.mi_t_to_s
    row = (
        report.summarizer_name,
        report.dataset_name,
        report.embedder_name,
        str(report.n_pairs),
        _fmt(s2t.mi, scale),
        _fmt(s2t.mi_raw, scale),
        _fmt(s2t.h_marginal, scale),
        _fmt(s2t.h_conditional, scale),
        _fmt(t2s.mi, scale),
        _fmt(t2s.mi_raw, scale),
        _fmt(report.normalized_mi),
        _fmt(report.normalized_mi_in_range),
        _fmt(report.gaussian_mi, scale),
        _fmt(report.mean_pair_cosine),
        _fmt(report.near_duplicate),
        "bits" if bits else "nats",
        str(report.config.seed),
        str(report.config.modes),
        report.backend,
    )
    lines = []
    if header:
        lines.append(",".join(CSV_COLUMNS))
    lines.append(",".join(row))
    return "\n".join(lines) + "\n"
