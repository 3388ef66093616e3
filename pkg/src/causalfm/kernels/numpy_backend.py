"""Vectorized numpy implementations of the hot sampler kernels.

Each kernel draws from the supplied Generator following the same
draw-order contract as the numba backend (batched uniforms/normals
first, then per-element tail rejections in flattened row-major order),
so the two backends consume identical random streams.
"""

from __future__ import annotations

import numpy as np
import scipy.special as sp

TAIL_CUT = 5.0
_ARG_MAX = 0.9999999999999999  # largest double below 1; guards ndtri(1) = inf


def _robert_tail(rng, a):
    # Exponential-rejection sampler for a standard normal on (a, inf), a > TAIL_CUT.
    alpha = 0.5 * (a + np.sqrt(a * a + 4.0))
    while True:
        z = a - np.log1p(-rng.random()) / alpha
        if rng.random() <= np.exp(-0.5 * (z - alpha) ** 2):
            return z


def tnorm_lower(rng, bounds):
    """Draws of a standard normal truncated to (bounds[i], inf), elementwise.

    Inverse CDF on the survival scale for bounds <= 5, exponential
    rejection beyond.
    """
    bounds = np.asarray(bounds, dtype=float)
    out = np.empty(bounds.shape)
    tail = bounds > TAIL_CUT
    mild = ~tail
    u = rng.random(int(mild.sum()))
    if u.size:
        arg = (1.0 - u) * sp.ndtr(-bounds[mild])
        out[mild] = -sp.ndtri(np.minimum(arg, _ARG_MAX))
    for idx in np.flatnonzero(tail):
        out.flat[idx] = _robert_tail(rng, bounds.flat[idx])
    return out


def allocate_labels(rng, scores, weights, eta, tau):
    """Categorical draws of cluster labels, P(l) ~ w_l * N(score; eta_l, 1/tau_l).

    Returns (labels, bad) where bad is the first unit index whose
    unnormalized probabilities were degenerate (-1 if none).
    """
    n, n_clusters = weights.shape
    if n_clusters == 1:
        return np.zeros(n, dtype=np.int64), -1
    u = rng.random(n)
    logw = np.full_like(weights, -np.inf)
    np.log(weights, out=logw, where=weights > 0.0)
    logp = (logw + 0.5 * np.log(tau)[None, :]
            - 0.5 * tau[None, :] * (scores[:, None] - eta[None, :]) ** 2)
    m = np.max(logp, axis=1)
    p = np.exp(logp - m[:, None])
    tot = p.sum(axis=1)
    ok = np.isfinite(tot) & (tot > 0.0)
    if not ok.all():
        return np.zeros(n, dtype=np.int64), int(np.flatnonzero(~ok)[0])
    labels = (np.cumsum(p, axis=1) <= (u * tot)[:, None]).sum(axis=1)
    return np.minimum(labels, n_clusters - 1).astype(np.int64), -1


def draw_scores(rng, base, m_full, tau_lab):
    """Per-unit multivariate-normal score draws.

    Posterior precision V_i = base + diag(tau_lab[i]); mean V_i^-1 m_full[i];
    draw = mean + chol(V_i)^-T z.
    """
    n, k = m_full.shape
    z = rng.standard_normal((n, k))
    v = np.broadcast_to(base, (n, k, k)).copy()
    idx = np.arange(k)
    v[:, idx, idx] += tau_lab
    chol = np.linalg.cholesky(v)
    mean = np.linalg.solve(v, m_full[:, :, None])[:, :, 0]
    noise = np.linalg.solve(np.transpose(chol, (0, 2, 1)), z[:, :, None])[:, :, 0]
    return mean + noise


def predictive_scores(rng, weights, eta, tau):
    """Mixture-prior predictive draws: label ~ Cat(weights_i), score ~ N(eta_l, 1/tau_l).

    With a single cluster no uniform is consumed (label is deterministic),
    which keeps the stream aligned with the standard-prior reduction.
    """
    n, n_clusters = weights.shape
    if n_clusters == 1:
        labels = np.zeros(n, dtype=np.int64)
    else:
        u = rng.random(n)
        labels = (np.cumsum(weights, axis=1) <= u[:, None]).sum(axis=1)
        labels = np.minimum(labels, n_clusters - 1).astype(np.int64)
    z = rng.standard_normal(n)
    scores = eta[labels] + z / np.sqrt(tau[labels])
    return labels, scores


def augment_z(rng, labels, lin_pred):
    """Probit augmentation draws Z for sticks l <= min(label, L-2), dense (n, L-1).

    Z[i, l] ~ N(lin_pred[i, l], 1), positive when l == labels[i], negative
    for earlier sticks; NaN where undefined.
    """
    n, n_sticks = lin_pred.shape
    z = np.full((n, n_sticks), np.nan)
    if n_sticks == 0:
        return z
    depth = np.minimum(labels, n_sticks - 1)
    cols = np.arange(n_sticks)
    elig = cols[None, :] <= depth[:, None]
    pos = elig & (cols[None, :] == labels[:, None])
    a_flat = lin_pred[elig]
    pos_flat = pos[elig]
    bounds = np.where(pos_flat, -a_flat, a_flat)
    e = tnorm_lower(rng, bounds)
    z[elig] = a_flat + np.where(pos_flat, e, -e)
    return z
