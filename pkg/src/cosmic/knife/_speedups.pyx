# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled mixture kernels; same contract as cosmic.knife.reference.

The marginal and conditional code paths use identical per-sample operation
order, so a conditional model whose offsets are exactly zero reproduces the
marginal log-density bit for bit -- the warm-start identity the trainer
relies on.  Inputs must be float64 and C-contiguous.
"""

import math

import numpy as np

from libc.math cimport exp, log

cdef double LOG_2PI = math.log(2.0 * math.pi)


def marginal_logpdf(double[:, ::1] x, double[::1] logits,
                    double[:, ::1] means, double[:, ::1] log_sigmas):
    cdef Py_ssize_t B = x.shape[0], d = x.shape[1], K = logits.shape[0]
    cdef Py_ssize_t i, j, k
    logp_arr = np.empty(B, dtype=np.float64)
    lw_arr = np.empty(K, dtype=np.float64)
    const_arr = np.empty(K, dtype=np.float64)
    invvar_arr = np.empty((K, d), dtype=np.float64)
    a_arr = np.empty(K, dtype=np.float64)
    cdef double[::1] logp = logp_arr
    cdef double[::1] lw = lw_arr
    cdef double[::1] const = const_arr
    cdef double[:, ::1] invvar = invvar_arr
    cdef double[::1] a = a_arr
    cdef double amax, sumexp, acc, quad, diff, am, s

    amax = logits[0]
    for k in range(1, K):
        if logits[k] > amax:
            amax = logits[k]
    sumexp = 0.0
    for k in range(K):
        sumexp += exp(logits[k] - amax)
    for k in range(K):
        lw[k] = logits[k] - amax - log(sumexp)
    for k in range(K):
        acc = 0.0
        for j in range(d):
            acc += log_sigmas[k, j]
            invvar[k, j] = exp(-2.0 * log_sigmas[k, j])
        const[k] = -0.5 * d * LOG_2PI - acc

    for i in range(B):
        for k in range(K):
            quad = 0.0
            for j in range(d):
                diff = x[i, j] - means[k, j]
                quad += diff * diff * invvar[k, j]
            a[k] = lw[k] + const[k] - 0.5 * quad
        am = a[0]
        for k in range(1, K):
            if a[k] > am:
                am = a[k]
        s = 0.0
        for k in range(K):
            s += exp(a[k] - am)
        logp[i] = am + log(s)
    return logp_arr


def marginal_grads(double[:, ::1] x, double[::1] logits,
                   double[:, ::1] means, double[:, ::1] log_sigmas):
    cdef Py_ssize_t B = x.shape[0], d = x.shape[1], K = logits.shape[0]
    cdef Py_ssize_t i, j, k
    logp_arr = np.empty(B, dtype=np.float64)
    dlogits_arr = np.zeros(K, dtype=np.float64)
    dmeans_arr = np.zeros((K, d), dtype=np.float64)
    dls_arr = np.zeros((K, d), dtype=np.float64)
    lw_arr = np.empty(K, dtype=np.float64)
    w_arr = np.empty(K, dtype=np.float64)
    const_arr = np.empty(K, dtype=np.float64)
    invvar_arr = np.empty((K, d), dtype=np.float64)
    a_arr = np.empty(K, dtype=np.float64)
    cdef double[::1] logp = logp_arr
    cdef double[::1] dlogits = dlogits_arr
    cdef double[:, ::1] dmeans = dmeans_arr
    cdef double[:, ::1] dls = dls_arr
    cdef double[::1] lw = lw_arr
    cdef double[::1] w = w_arr
    cdef double[::1] const = const_arr
    cdef double[:, ::1] invvar = invvar_arr
    cdef double[::1] a = a_arr
    cdef double amax, sumexp, acc, quad, diff, am, s, r, scaled

    amax = logits[0]
    for k in range(1, K):
        if logits[k] > amax:
            amax = logits[k]
    sumexp = 0.0
    for k in range(K):
        sumexp += exp(logits[k] - amax)
    for k in range(K):
        w[k] = exp(logits[k] - amax) / sumexp
        lw[k] = logits[k] - amax - log(sumexp)
    for k in range(K):
        acc = 0.0
        for j in range(d):
            acc += log_sigmas[k, j]
            invvar[k, j] = exp(-2.0 * log_sigmas[k, j])
        const[k] = -0.5 * d * LOG_2PI - acc

    for i in range(B):
        for k in range(K):
            quad = 0.0
            for j in range(d):
                diff = x[i, j] - means[k, j]
                quad += diff * diff * invvar[k, j]
            a[k] = lw[k] + const[k] - 0.5 * quad
        am = a[0]
        for k in range(1, K):
            if a[k] > am:
                am = a[k]
        s = 0.0
        for k in range(K):
            s += exp(a[k] - am)
        logp[i] = am + log(s)
        for k in range(K):
            r = exp(a[k] - logp[i])
            dlogits[k] += r
            for j in range(d):
                diff = x[i, j] - means[k, j]
                scaled = diff * invvar[k, j]
                dmeans[k, j] += r * scaled
                dls[k, j] += r * (diff * scaled - 1.0)
    for k in range(K):
        dlogits[k] -= B * w[k]
    return logp_arr, dlogits_arr, dmeans_arr, dls_arr


def conditional_logpdf(double[:, ::1] x, double[:, ::1] logits_b,
                       double[:, :, ::1] means_b, double[:, :, ::1] log_sigmas_b):
    cdef Py_ssize_t B = x.shape[0], d = x.shape[1], K = logits_b.shape[1]
    cdef Py_ssize_t i, j, k
    logp_arr = np.empty(B, dtype=np.float64)
    lw_arr = np.empty(K, dtype=np.float64)
    const_arr = np.empty(K, dtype=np.float64)
    invvar_arr = np.empty((K, d), dtype=np.float64)
    a_arr = np.empty(K, dtype=np.float64)
    cdef double[::1] logp = logp_arr
    cdef double[::1] lw = lw_arr
    cdef double[::1] const = const_arr
    cdef double[:, ::1] invvar = invvar_arr
    cdef double[::1] a = a_arr
    cdef double amax, sumexp, acc, quad, diff, am, s

    for i in range(B):
        amax = logits_b[i, 0]
        for k in range(1, K):
            if logits_b[i, k] > amax:
                amax = logits_b[i, k]
        sumexp = 0.0
        for k in range(K):
            sumexp += exp(logits_b[i, k] - amax)
        for k in range(K):
            lw[k] = logits_b[i, k] - amax - log(sumexp)
        for k in range(K):
            acc = 0.0
            for j in range(d):
                acc += log_sigmas_b[i, k, j]
                invvar[k, j] = exp(-2.0 * log_sigmas_b[i, k, j])
            const[k] = -0.5 * d * LOG_2PI - acc
        for k in range(K):
            quad = 0.0
            for j in range(d):
                diff = x[i, j] - means_b[i, k, j]
                quad += diff * diff * invvar[k, j]
            a[k] = lw[k] + const[k] - 0.5 * quad
        am = a[0]
        for k in range(1, K):
            if a[k] > am:
                am = a[k]
        s = 0.0
        for k in range(K):
            s += exp(a[k] - am)
        logp[i] = am + log(s)
    return logp_arr


def conditional_grads(double[:, ::1] x, double[:, ::1] logits_b,
                      double[:, :, ::1] means_b, double[:, :, ::1] log_sigmas_b):
    cdef Py_ssize_t B = x.shape[0], d = x.shape[1], K = logits_b.shape[1]
    cdef Py_ssize_t i, j, k
    logp_arr = np.empty(B, dtype=np.float64)
    dlogits_arr = np.empty((B, K), dtype=np.float64)
    dmeans_arr = np.empty((B, K, d), dtype=np.float64)
    dls_arr = np.empty((B, K, d), dtype=np.float64)
    lw_arr = np.empty(K, dtype=np.float64)
    w_arr = np.empty(K, dtype=np.float64)
    const_arr = np.empty(K, dtype=np.float64)
    invvar_arr = np.empty((K, d), dtype=np.float64)
    a_arr = np.empty(K, dtype=np.float64)
    cdef double[::1] logp = logp_arr
    cdef double[:, ::1] dlogits = dlogits_arr
    cdef double[:, :, ::1] dmeans = dmeans_arr
    cdef double[:, :, ::1] dls = dls_arr
    cdef double[::1] lw = lw_arr
    cdef double[::1] w = w_arr
    cdef double[::1] const = const_arr
    cdef double[:, ::1] invvar = invvar_arr
    cdef double[::1] a = a_arr
    cdef double amax, sumexp, acc, quad, diff, am, s, r, scaled

    for i in range(B):
        amax = logits_b[i, 0]
        for k in range(1, K):
            if logits_b[i, k] > amax:
                amax = logits_b[i, k]
        sumexp = 0.0
        for k in range(K):
            sumexp += exp(logits_b[i, k] - amax)
        for k in range(K):
            w[k] = exp(logits_b[i, k] - amax) / sumexp
            lw[k] = logits_b[i, k] - amax - log(sumexp)
        for k in range(K):
            acc = 0.0
            for j in range(d):
                acc += log_sigmas_b[i, k, j]
                invvar[k, j] = exp(-2.0 * log_sigmas_b[i, k, j])
            const[k] = -0.5 * d * LOG_2PI - acc
        for k in range(K):
            quad = 0.0
            for j in range(d):
                diff = x[i, j] - means_b[i, k, j]
                quad += diff * diff * invvar[k, j]
            a[k] = lw[k] + const[k] - 0.5 * quad
        am = a[0]
        for k in range(1, K):
            if a[k] > am:
                am = a[k]
        s = 0.0
        for k in range(K):
            s += exp(a[k] - am)
        logp[i] = am + log(s)
        for k in range(K):
            r = exp(a[k] - logp[i])
            dlogits[i, k] = r - w[k]
            for j in range(d):
                diff = x[i, j] - means_b[i, k, j]
                scaled = diff * invvar[k, j]
                dmeans[i, k, j] = r * scaled
                dls[i, k, j] = r * (diff * scaled - 1.0)
    return logp_arr, dlogits_arr, dmeans_arr, dls_arr
