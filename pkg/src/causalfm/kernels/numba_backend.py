"""Jitted scalar-loop implementations of the hot sampler kernels.

Numba's np.random.Generator support draws the same streams as numpy, so
these kernels are drop-in replacements for the numpy backend: batched
uniforms/normals are drawn up front in the same order, tail rejections
run per element afterwards.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from ..special import ndtr_scalar, ndtri_scalar

TAIL_CUT = 5.0
_ARG_MAX = 0.9999999999999999


@njit(cache=True)
def _robert_tail(rng, a):
    alpha = 0.5 * (a + math.sqrt(a * a + 4.0))
    while True:
        z = a - math.log1p(-rng.random()) / alpha
        if rng.random() <= math.exp(-0.5 * (z - alpha) ** 2):
            return z


@njit(cache=True)
def tnorm_lower(rng, bounds):
    n = bounds.shape[0]
    n_mild = 0
    for i in range(n):
        if bounds[i] <= TAIL_CUT:
            n_mild += 1
    u = rng.random(n_mild)
    out = np.empty(n)
    k = 0
    for i in range(n):
        b = bounds[i]
        if b <= TAIL_CUT:
            arg = (1.0 - u[k]) * ndtr_scalar(-b)
            k += 1
            if arg > _ARG_MAX:
                arg = _ARG_MAX
            out[i] = -ndtri_scalar(arg)
    for i in range(n):
        if bounds[i] > TAIL_CUT:
            out[i] = _robert_tail(rng, bounds[i])
    return out


@njit(cache=True)
def allocate_labels(rng, scores, weights, eta, tau):
    n, n_clusters = weights.shape
    labels = np.zeros(n, dtype=np.int64)
    if n_clusters == 1:
        return labels, -1
    u = rng.random(n)
    half_logtau = 0.5 * np.log(tau)
    buf = np.empty(n_clusters)
    for i in range(n):
        m = -math.inf
        for l in range(n_clusters):
            w = weights[i, l]
            lw = math.log(w) if w > 0.0 else -math.inf
            d = scores[i] - eta[l]
            lp = lw + half_logtau[l] - 0.5 * tau[l] * (d * d)
            buf[l] = lp
            if lp > m:
                m = lp
        tot = 0.0
        for l in range(n_clusters):
            p = math.exp(buf[l] - m)
            buf[l] = p
            tot += p
        if not (tot > 0.0) or math.isnan(tot) or math.isinf(tot):
            return labels, i
        thresh = u[i] * tot
        acc = 0.0
        lab = n_clusters - 1
        for l in range(n_clusters):
            acc += buf[l]
            if acc > thresh:
                lab = l
                break
        labels[i] = lab
    return labels, -1


@njit(cache=True)
def draw_scores(rng, base, m_full, tau_lab):
    n, k = m_full.shape
    z = rng.standard_normal((n, k))
    out = np.empty((n, k))
    for i in range(n):
        v = base.copy()
        for j in range(k):
            v[j, j] += tau_lab[i, j]
        chol = np.linalg.cholesky(v)
        mean = np.linalg.solve(v, m_full[i].copy())
        noise = np.linalg.solve(np.ascontiguousarray(chol.T), z[i].copy())
        for j in range(k):
            out[i, j] = mean[j] + noise[j]
    return out


@njit(cache=True)
def predictive_scores(rng, weights, eta, tau):
    n, n_clusters = weights.shape
    labels = np.zeros(n, dtype=np.int64)
    if n_clusters > 1:
        u = rng.random(n)
        for i in range(n):
            acc = 0.0
            lab = n_clusters - 1
            for l in range(n_clusters):
                acc += weights[i, l]
                if acc > u[i]:
                    lab = l
                    break
            labels[i] = lab
    z = rng.standard_normal(n)
    scores = np.empty(n)
    for i in range(n):
        lab = labels[i]
        scores[i] = eta[lab] + z[i] / math.sqrt(tau[lab])
    return labels, scores


@njit(cache=True)
def augment_z(rng, labels, lin_pred):
    n = labels.shape[0]
    n_sticks = lin_pred.shape[1]
    z = np.full((n, n_sticks), np.nan)
    if n_sticks == 0:
        return z
    n_pairs = 0
    for i in range(n):
        depth = min(labels[i], n_sticks - 1)
        n_pairs += depth + 1
    bounds = np.empty(n_pairs)
    k = 0
    for i in range(n):
        depth = min(labels[i], n_sticks - 1)
        for l in range(depth + 1):
            a = lin_pred[i, l]
            bounds[k] = -a if l == labels[i] else a
            k += 1
    e = tnorm_lower(rng, bounds)
    k = 0
    for i in range(n):
        depth = min(labels[i], n_sticks - 1)
        for l in range(depth + 1):
            a = lin_pred[i, l]
            z[i, l] = a + e[k] if l == labels[i] else a - e[k]
            k += 1
    return z
