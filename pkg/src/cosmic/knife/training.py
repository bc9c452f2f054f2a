"""Fitting the mixture models and turning them into entropy/MI estimates.

Both fitters run plain mini-batch Adam on the negative mean log-density.
Early stopping watches the epoch-mean training loss: an epoch that fails to
improve the best seen loss by more than 1e-6 counts toward the patience
budget, and training stops once `patience` such epochs occur in a row.

estimate_mi is the headline operation: fit the marginal on the target side,
fit the conditional on the pairs, evaluate both entropies on the evaluation
split (the full data when holdout_fraction is 0), and report
mi_raw = h_marginal - h_conditional with the clamped mi = max(0, mi_raw).
Direction "s_to_t" treats pairs.source as the target T; "t_to_s" swaps the
roles.  Everything is deterministic given the config seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import EmbeddingMatrix, PairedDataset, derived_rng
from ..errors import DimMismatch, NonFiniteLoss, OutOfRange, TooFewRows
from . import kernels
from .config import KnifeConfig
from .models import (
    ConditionalKnife,
    FitDiagnostics,
    MarginalKnife,
    Standardizer,
    fit_standardizer,
)

S_TO_T = "s_to_t"
T_TO_S = "t_to_s"

# Seed-stream tags, so the fitters and the splitter never share a stream.
_TAG_MARGINAL = 1
_TAG_CONDITIONAL = 2
_TAG_SPLIT = 3

_MIN_DELTA = 1e-6


class _Adam:
    """Adam with fixed step size; parameters are updated in place."""

    def __init__(self, params, learn_rate, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.learn_rate = learn_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, grads):
        self.t += 1
        scale = (
            self.learn_rate
            * np.sqrt(1.0 - self.beta2 ** self.t)
            / (1.0 - self.beta1 ** self.t)
        )
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= scale * m / (np.sqrt(v) + self.eps)


class _EarlyStop:
    """Plateau detector on epoch-mean loss."""

    def __init__(self, patience):
        self.patience = patience
        self.best = np.inf
        self.streak = 0

    def update(self, loss) -> bool:
        if loss < self.best - _MIN_DELTA:
            self.best = loss
            self.streak = 0
        else:
            self.streak += 1
        return self.streak >= self.patience


def _batches(n: int, batch_size: int, rng: np.random.Generator):
    perm = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield perm[start:start + batch_size]


def fit_marginal(data: EmbeddingMatrix, config: KnifeConfig) -> MarginalKnife:
    """Fit the K-mode mixture to data by mini-batch Adam.

    Means start at K distinct data rows, scales at the per-dimension data
    std, weights uniform.  Scales are clamped into the configured band
    after every step.
    """
    n, d = data.n_rows, data.dim
    if n < config.modes:
        raise TooFewRows(f"{n} rows < {config.modes} modes")
    rng = derived_rng(config.seed, _TAG_MARGINAL)

    x = data.values
    standardizer = fit_standardizer(x, config.standardize)
    xs = standardizer.transform(x) if standardizer is not None else np.ascontiguousarray(x)

    lo, hi = np.log(config.sigma_floor), np.log(config.sigma_ceil)
    k = config.modes
    idx = rng.choice(n, size=k, replace=False)
    means = xs[idx].copy()
    sd = xs.std(axis=0)
    sd[sd == 0.0] = 1.0
    log_sigmas = np.clip(np.tile(np.log(sd), (k, 1)), lo, hi)
    logits = np.zeros(k)

    model = MarginalKnife(
        logits=logits,
        means=means,
        log_sigmas=log_sigmas,
        standardizer=standardizer,
        sigma_floor=config.sigma_floor,
        sigma_ceil=config.sigma_ceil,
    )

    adam = _Adam([logits, means, log_sigmas], config.learn_rate)
    stopper = _EarlyStop(config.patience)
    epoch_losses: list[float] = []
    stopped_early = False
    for epoch in range(config.epochs):
        total_nll = 0.0
        for batch in _batches(n, config.batch_size, rng):
            xb = np.ascontiguousarray(xs[batch])
            b = xb.shape[0]
            logp, dlogits, dmeans, dls = kernels.marginal_grads(
                xb, logits, means, log_sigmas
            )
            nll = -float(logp.sum())
            if not np.isfinite(nll):
                raise NonFiniteLoss(f"marginal loss non-finite at epoch {epoch + 1}")
            total_nll += nll
            adam.step([-dlogits / b, -dmeans / b, -dls / b])
            np.clip(log_sigmas, lo, hi, out=log_sigmas)
        epoch_losses.append(total_nll / n)
        if stopper.update(epoch_losses[-1]):
            stopped_early = True
            break
    model.diagnostics = FitDiagnostics(
        epochs_run=len(epoch_losses),
        stopped_early=stopped_early,
        epoch_losses=epoch_losses,
    )
    return model


def fit_conditional(
    pairs: PairedDataset, base: MarginalKnife, config: KnifeConfig
) -> ConditionalKnife:
    """Fit the offset network; the base mixture stays frozen.

    The target variable is pairs.source (the side base was fitted on); the
    conditioning variable is pairs.summary.  The output layer starts at
    zero, so the first evaluated conditional density equals the marginal.
    """
    if pairs.source.dim != base.dim:
        raise DimMismatch(
            f"pairs target dim {pairs.source.dim}, base model dim {base.dim}"
        )
    n = pairs.n_pairs
    if n < config.modes:
        raise TooFewRows(f"{n} pairs < {config.modes} modes")
    rng = derived_rng(config.seed, _TAG_CONDITIONAL)

    t_std = base.to_model_space(pairs.source.values)
    cond_standardizer = fit_standardizer(pairs.summary.values, config.standardize)
    s_std = (
        cond_standardizer.transform(pairs.summary.values)
        if cond_standardizer is not None
        else np.ascontiguousarray(pairs.summary.values)
    )

    k, d, ds = base.modes, base.dim, s_std.shape[1]
    h = config.hidden_width
    p = k + 2 * k * d
    w1 = rng.normal(0.0, 1.0 / np.sqrt(ds), size=(h, ds))
    b1 = np.zeros(h)
    w2 = np.zeros((p, h))
    b2 = np.zeros(p)

    model = ConditionalKnife(
        base=base, w1=w1, b1=b1, w2=w2, b2=b2, cond_standardizer=cond_standardizer
    )

    adam = _Adam([w1, b1, w2, b2], config.learn_rate)
    stopper = _EarlyStop(config.patience)
    epoch_losses: list[float] = []
    stopped_early = False
    for epoch in range(config.epochs):
        total_nll = 0.0
        for batch in _batches(n, config.batch_size, rng):
            tb = np.ascontiguousarray(t_std[batch])
            sb = np.ascontiguousarray(s_std[batch])
            b = tb.shape[0]
            hidden, logits_b, means_b, ls_b, ls_mask = model.per_sample_params(sb)
            logp, g_logits, g_means, g_ls = kernels.conditional_grads(
                tb, logits_b, means_b, ls_b
            )
            nll = -float(logp.sum())
            if not np.isfinite(nll):
                raise NonFiniteLoss(f"conditional loss non-finite at epoch {epoch + 1}")
            total_nll += nll
            g_ls = np.where(ls_mask, g_ls, 0.0)  # clipped scales get no gradient
            g_out = np.concatenate(
                [g_logits, g_means.reshape(b, -1), g_ls.reshape(b, -1)], axis=1
            )
            dw2 = g_out.T @ hidden
            db2 = g_out.sum(axis=0)
            d_hidden = g_out @ w2
            d_act = d_hidden * (1.0 - hidden * hidden)
            dw1 = d_act.T @ sb
            db1 = d_act.sum(axis=0)
            adam.step([-dw1 / b, -db1 / b, -dw2 / b, -db2 / b])
        epoch_losses.append(total_nll / n)
        if stopper.update(epoch_losses[-1]):
            stopped_early = True
            break
    model.diagnostics = FitDiagnostics(
        epochs_run=len(epoch_losses),
        stopped_early=stopped_early,
        epoch_losses=epoch_losses,
    )
    return model


def entropy(model: MarginalKnife, data: EmbeddingMatrix) -> float:
    """Cross-entropy estimate: minus the mean log-density over data."""
    return -float(model.log_density(data.values).mean())


def conditional_entropy(model: ConditionalKnife, pairs: PairedDataset) -> float:
    """Minus the mean conditional log-density of pairs.source given pairs.summary."""
    return -float(model.log_density(pairs.source.values, pairs.summary.values).mean())


def pointwise_mi(
    marginal: MarginalKnife, conditional: ConditionalKnife, t, s
) -> float:
    """ln f(t|s) - ln g(t) for a single pair of embedding vectors.

    A diagnostic only: per-pair values are noisy and their correlations
    with quality judgments were not informative in practice; the reliable
    signal is the dataset-level mean (which equals mi_raw).
    """
    t = np.asarray(t, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    if t.ndim != 1 or s.ndim != 1:
        raise DimMismatch("pointwise_mi expects single vectors")
    t2 = t.reshape(1, -1)
    s2 = s.reshape(1, -1)
    lp_cond = conditional.log_density(t2, s2)[0]
    lp_marg = marginal.log_density(t2)[0]
    return float(lp_cond - lp_marg)


@dataclass(frozen=True)
class MiEstimate:
    """One directional predictive-information estimate."""

    direction: str
    h_marginal: float
    h_conditional: float
    mi_raw: float
    mi: float
    n_train: int
    n_eval: int
    marginal_diagnostics: FitDiagnostics
    conditional_diagnostics: FitDiagnostics


def _subset(matrix: EmbeddingMatrix, idx: np.ndarray) -> EmbeddingMatrix:
    return EmbeddingMatrix(
        values=matrix.values[idx], ids=tuple(matrix.ids[i] for i in idx)
    )


def estimate_mi(
    pairs: PairedDataset, config: KnifeConfig, direction: str = S_TO_T
) -> MiEstimate:
    """Fit both models and report the predictive information in one direction.

    "s_to_t": how much pairs.summary predicts about pairs.source (the
    headline direction when source holds the text embeddings).  "t_to_s"
    estimates the reverse.  The raw difference of entropies may come out
    slightly negative on independent data; mi clamps it at zero.
    """
    if direction == S_TO_T:
        work = pairs
    elif direction == T_TO_S:
        work = pairs.swapped()
    else:
        raise OutOfRange(f"direction must be '{S_TO_T}' or '{T_TO_S}', got {direction!r}")

    n = work.n_pairs
    if config.holdout_fraction > 0.0:
        n_eval = max(1, int(round(config.holdout_fraction * n)))
        n_train = n - n_eval
        if n_train < config.modes:
            raise TooFewRows(
                f"holdout leaves {n_train} training rows < {config.modes} modes"
            )
        perm = derived_rng(config.seed, _TAG_SPLIT).permutation(n)
        eval_idx = np.sort(perm[:n_eval])
        train_idx = np.sort(perm[n_eval:])
        train = PairedDataset(
            source=_subset(work.source, train_idx),
            summary=_subset(work.summary, train_idx),
        )
        holdout = PairedDataset(
            source=_subset(work.source, eval_idx),
            summary=_subset(work.summary, eval_idx),
        )
    else:
        train = work
        holdout = work
        n_train = n_eval = n

    marginal = fit_marginal(train.source, config)
    conditional = fit_conditional(train, marginal, config)
    h_marg = entropy(marginal, holdout.source)
    h_cond = conditional_entropy(conditional, holdout)
    mi_raw = h_marg - h_cond
    return MiEstimate(
        direction=direction,
        h_marginal=h_marg,
        h_conditional=h_cond,
        mi_raw=mi_raw,
        mi=max(0.0, mi_raw),
        n_train=n_train,
        n_eval=n_eval,
        marginal_diagnostics=marginal.diagnostics,
        conditional_diagnostics=conditional.diagnostics,
    )
