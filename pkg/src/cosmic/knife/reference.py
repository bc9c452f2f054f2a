"""Numpy fallback kernels for mixture log-densities and their gradients.

The compiled extension (_speedups) implements the same four functions with
the same accumulation structure.  Within one backend the marginal and
conditional kernels perform identical floating-point operations when the
conditional offsets are zero, which is what makes the conditional fitter's
warm start an exact identity rather than an approximate one.

Shapes: x is (B, d); marginal parameters are logits (K,), means (K, d),
log_sigmas (K, d); conditional parameters carry a leading per-sample axis,
logits_b (B, K), means_b (B, K, d), log_sigmas_b (B, K, d).  All gradients
are of sum_i logp_i; marginal gradients are summed over the batch while
conditional gradients stay per-sample (the caller backpropagates them
through the offset network).
"""

from __future__ import annotations

import math

import numpy as np

LOG_2PI = math.log(2.0 * math.pi)


def _mixture_terms(x, lw, const, means, inv_var):
    """Per-sample per-mode log terms a (B, K) plus logp (B,).

    means/inv_var may be (K, d) or (B, K, d); lw/const may be (K,) or (B, K).
    """
    diff = x[:, None, :] - means
    quad = (diff * diff * inv_var).sum(axis=2)
    a = lw + const - 0.5 * quad
    amax = a.max(axis=1)
    logp = amax + np.log(np.exp(a - amax[:, None]).sum(axis=1))
    return diff, a, logp


def marginal_logpdf(x, logits, means, log_sigmas):
    """Log-density of each row of x under the shared mixture."""
    d = x.shape[1]
    amax = logits.max()
    z = logits - amax
    lw = z - np.log(np.exp(z).sum())
    const = -0.5 * d * LOG_2PI - log_sigmas.sum(axis=1)
    inv_var = np.exp(-2.0 * log_sigmas)
    _, _, logp = _mixture_terms(x, lw, const, means, inv_var)
    return logp


def marginal_grads(x, logits, means, log_sigmas):
    """logp plus gradients of sum_i logp_i w.r.t. the shared parameters."""
    b, d = x.shape
    amax = logits.max()
    z = logits - amax
    ez = np.exp(z)
    w = ez / ez.sum()
    lw = z - np.log(ez.sum())
    const = -0.5 * d * LOG_2PI - log_sigmas.sum(axis=1)
    inv_var = np.exp(-2.0 * log_sigmas)
    diff, a, logp = _mixture_terms(x, lw, const, means, inv_var)
    r = np.exp(a - logp[:, None])                        # (B, K) responsibilities
    scaled = diff * inv_var                              # (B, K, d)
    dlogits = r.sum(axis=0) - b * w
    dmeans = np.einsum("bk,bkd->kd", r, scaled)
    dlog_sigmas = np.einsum("bk,bkd->kd", r, diff * scaled) - r.sum(axis=0)[:, None]
    return logp, dlogits, dmeans, dlog_sigmas


def conditional_logpdf(x, logits_b, means_b, log_sigmas_b):
    """Log-density of x[i] under the i-th per-sample mixture."""
    d = x.shape[1]
    amax = logits_b.max(axis=1, keepdims=True)
    z = logits_b - amax
    lw = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    const = -0.5 * d * LOG_2PI - log_sigmas_b.sum(axis=2)
    inv_var = np.exp(-2.0 * log_sigmas_b)
    _, _, logp = _mixture_terms(x, lw, const, means_b, inv_var)
    return logp


def conditional_grads(x, logits_b, means_b, log_sigmas_b):
    """logp plus per-sample gradients of logp_i w.r.t. sample i's parameters."""
    d = x.shape[1]
    amax = logits_b.max(axis=1, keepdims=True)
    z = logits_b - amax
    ez = np.exp(z)
    w = ez / ez.sum(axis=1, keepdims=True)
    lw = z - np.log(ez.sum(axis=1, keepdims=True))
    const = -0.5 * d * LOG_2PI - log_sigmas_b.sum(axis=2)
    inv_var = np.exp(-2.0 * log_sigmas_b)
    diff, a, logp = _mixture_terms(x, lw, const, means_b, inv_var)
    r = np.exp(a - logp[:, None])                        # (B, K)
    scaled = diff * inv_var
    dlogits = r - w
    dmeans = r[:, :, None] * scaled
    dlog_sigmas = r[:, :, None] * (diff * scaled - 1.0)
    return logp, dlogits, dmeans, dlog_sigmas
