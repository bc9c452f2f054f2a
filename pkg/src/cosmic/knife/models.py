"""Fitted mixture models: the shared marginal and the offset conditional.

A MarginalKnife is a K-mode diagonal Gaussian mixture over the (optionally
standardized) target space.  A ConditionalKnife keeps that mixture frozen
and adds per-sample offsets to its logits, means, and log-scales; the
offsets come from a one-hidden-layer tanh network reading the conditioning
embedding.  The network's output layer starts at zero, so before training
the conditional density equals the marginal density exactly and the implied
MI estimate starts at zero.

Standardization bookkeeping: densities are always reported in the original
data space.  For a per-dimension map x -> (x - shift)/scale the correction
is log p_orig(x) = log p_std(x_std) - sum_j ln scale_j, and entropies gain
the same sum with opposite sign.  The corrections cancel in any MI.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateDimension, DimMismatch
from . import kernels

# Rows per evaluation chunk are capped so the (rows, K, d) temporaries stay
# around 32 MB of float64.
_CHUNK_ELEMS = 1 << 22


def _chunk_rows(n: int, modes: int, dim: int) -> int:
    return max(1, min(n, _CHUNK_ELEMS // max(1, modes * dim)))


@dataclass(frozen=True)
class Standardizer:
    """Per-dimension affine map to zero mean, unit scale."""

    shift: np.ndarray  # (d,)
    scale: np.ndarray  # (d,), strictly positive

    def transform(self, values: np.ndarray) -> np.ndarray:
        return np.ascontiguousarray((values - self.shift) / self.scale)

    def log_scale_sum(self) -> float:
        return float(np.log(self.scale).sum())


def fit_standardizer(values: np.ndarray, enabled: bool) -> Standardizer | None:
    """Mean/std map over rows; zero-variance dimensions keep scale 1."""
    if not enabled:
        return None
    shift = values.mean(axis=0)
    scale = values.std(axis=0)
    degenerate = scale == 0.0
    if degenerate.any():
        dims = np.flatnonzero(degenerate)[:5].tolist()
        warnings.warn(
            f"dimensions {dims} have zero variance; leaving their scale at 1",
            DegenerateDimension,
        )
        scale = scale.copy()
        scale[degenerate] = 1.0
    return Standardizer(shift=shift, scale=scale)


@dataclass
class FitDiagnostics:
    """Training trace of one fitter run."""

    epochs_run: int
    stopped_early: bool
    epoch_losses: list[float]

    @property
    def final_loss(self) -> float:
        return self.epoch_losses[-1]


@dataclass
class MarginalKnife:
    """K-mode diagonal Gaussian mixture with optional input standardizer.

    means and log_sigmas live in the standardized space when standardizer
    is set.  exp(log_sigmas) is kept inside [sigma_floor, sigma_ceil] by
    the trainer's post-step clamp.
    """

    logits: np.ndarray        # (K,)
    means: np.ndarray         # (K, d)
    log_sigmas: np.ndarray    # (K, d)
    standardizer: Standardizer | None
    sigma_floor: float
    sigma_ceil: float
    diagnostics: FitDiagnostics | None = field(default=None, compare=False)

    @property
    def modes(self) -> int:
        return self.logits.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def weights(self) -> np.ndarray:
        z = self.logits - self.logits.max()
        ez = np.exp(z)
        return ez / ez.sum()

    def to_model_space(self, values: np.ndarray) -> np.ndarray:
        values = np.ascontiguousarray(values, dtype=np.float64)
        if values.shape[1] != self.dim:
            raise DimMismatch(f"data dim {values.shape[1]}, model dim {self.dim}")
        if self.standardizer is None:
            return values
        return self.standardizer.transform(values)

    def entropy_correction(self) -> float:
        return 0.0 if self.standardizer is None else self.standardizer.log_scale_sum()

    def log_density(self, values: np.ndarray) -> np.ndarray:
        """Per-row log-density in the original data space."""
        x = self.to_model_space(values)
        n = x.shape[0]
        out = np.empty(n, dtype=np.float64)
        step = _chunk_rows(n, self.modes, self.dim)
        for start in range(0, n, step):
            stop = min(n, start + step)
            out[start:stop] = kernels.marginal_logpdf(
                x[start:stop], self.logits, self.means, self.log_sigmas
            )
        return out - self.entropy_correction()


@dataclass
class ConditionalKnife:
    """Frozen marginal plus a per-sample offset network.

    Offsets are packed [logits (K) | means (K*d) | log_sigmas (K*d)] in the
    network output.  log_sigmas are clamped after the offset is applied, so
    every evaluated density respects the sigma bounds.
    """

    base: MarginalKnife
    w1: np.ndarray            # (H, ds)
    b1: np.ndarray            # (H,)
    w2: np.ndarray            # (P, H), P = K + 2*K*d
    b2: np.ndarray            # (P,)
    cond_standardizer: Standardizer | None
    diagnostics: FitDiagnostics | None = field(default=None, compare=False)

    @property
    def modes(self) -> int:
        return self.base.modes

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def cond_dim(self) -> int:
        return self.w1.shape[1]

    @property
    def hidden_width(self) -> int:
        return self.w1.shape[0]

    def cond_to_model_space(self, values: np.ndarray) -> np.ndarray:
        values = np.ascontiguousarray(values, dtype=np.float64)
        if values.shape[1] != self.cond_dim:
            raise DimMismatch(
                f"conditioning dim {values.shape[1]}, model expects {self.cond_dim}"
            )
        if self.cond_standardizer is None:
            return values
        return self.cond_standardizer.transform(values)

    def offsets(self, s_std: np.ndarray):
        """Network forward pass: hidden activations plus the three offsets."""
        k, d = self.modes, self.dim
        hidden = np.tanh(s_std @ self.w1.T + self.b1)          # (B, H)
        out = hidden @ self.w2.T + self.b2                     # (B, P)
        off_logits = out[:, :k]
        off_means = out[:, k:k + k * d].reshape(-1, k, d)
        off_ls = out[:, k + k * d:].reshape(-1, k, d)
        return hidden, off_logits, off_means, off_ls

    def per_sample_params(self, s_std: np.ndarray):
        """Per-sample mixture parameters plus the log-sigma clip mask."""
        hidden, off_logits, off_means, off_ls = self.offsets(s_std)
        logits_b = np.ascontiguousarray(self.base.logits + off_logits)
        means_b = np.ascontiguousarray(self.base.means + off_means)
        ls_raw = self.base.log_sigmas + off_ls
        lo = math.log(self.base.sigma_floor)
        hi = math.log(self.base.sigma_ceil)
        ls_b = np.clip(ls_raw, lo, hi)
        ls_mask = (ls_raw >= lo) & (ls_raw <= hi)
        return hidden, logits_b, means_b, np.ascontiguousarray(ls_b), ls_mask

    def log_density(self, t_values: np.ndarray, s_values: np.ndarray) -> np.ndarray:
        """Per-row log-density of t given s, in the original data space."""
        t = self.base.to_model_space(t_values)
        s = self.cond_to_model_space(s_values)
        if t.shape[0] != s.shape[0]:
            raise DimMismatch(
                f"{t.shape[0]} target rows vs {s.shape[0]} conditioning rows"
            )
        n = t.shape[0]
        out = np.empty(n, dtype=np.float64)
        step = _chunk_rows(n, self.modes, self.dim)
        for start in range(0, n, step):
            stop = min(n, start + step)
            _, logits_b, means_b, ls_b, _ = self.per_sample_params(s[start:stop])
            out[start:stop] = kernels.conditional_logpdf(
                t[start:stop], logits_b, means_b, ls_b
            )
        return out - self.base.entropy_correction()
