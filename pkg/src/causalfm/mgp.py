"""Multiplicative gamma process updates for the factor loadings.

Loadings carry the prior lambda_jh ~ N(0, 1/(theta_jh * iota_h)) with
iota_h the running product of gamma increments delta. The delta updates
factor the component being refreshed out of each iota term, and iota is
recomputed exactly from delta afterwards (no drift).
"""

from __future__ import annotations

import numpy as np


def update_local_precisions(rng, lam, iota, nu):
    """Elementwise theta_jh ~ Gamma((nu+1)/2, (nu + iota_h lambda_jh^2)/2)."""
    rate = 0.5 * (nu + iota[None, :] * lam ** 2)
    return rng.gamma(0.5 * (nu + 1.0), 1.0 / rate)


def update_global_increments(rng, lam, theta, delta, a1, a2):
    """Sequential gamma draws of the shrinkage increments delta.

    Returns (delta, iota) with iota = cumprod(delta) recomputed exactly.
    Shapes: a1 + qJ/2 for the first increment, a2 + q(J-l)/2 for the
    (l+1)-th; rates accumulate iota with the updated component factored
    out, over factors at or after the one being updated.
    """
    q, n_fac = lam.shape
    delta = np.asarray(delta, dtype=float).copy()
    col = (theta * lam ** 2).sum(axis=0)
    for l in range(n_fac):
        rate = 1.0
        for h in range(l, n_fac):
            prod = 1.0
            for m in range(h + 1):
                if m != l:
                    prod *= delta[m]
            rate += 0.5 * prod * col[h]
        shape = a1 + 0.5 * q * n_fac if l == 0 else a2 + 0.5 * q * (n_fac - l)
        delta[l] = rng.gamma(shape, 1.0 / rate)
    return delta, np.cumprod(delta)


def update_loadings(rng, resid, scores, psi, theta, iota):
    """Row-wise Gaussian draw of the loading matrix.

    ``resid`` is Y minus the regression surface on the arm's factual
    units; with no units each row falls back to its N(0, D_j) prior.
    """
    q = resid.shape[1] if resid.ndim == 2 else psi.shape[0]
    n_fac = scores.shape[1]
    sts = scores.T @ scores
    str_ = scores.T @ resid
    noise = rng.standard_normal((q, n_fac))
    lam = np.empty((q, n_fac))
    for j in range(q):
        v = np.diag(theta[j] * iota) + sts / psi[j]
        m = np.linalg.solve(v, str_[:, j] / psi[j])
        chol = np.linalg.cholesky(v)
        lam[j] = m + np.linalg.solve(chol.T, noise[j])
    return lam


def update_noise_variances(rng, eps, n_units, a_psi, b_psi):
    """Elementwise inverse-gamma draw of the idiosyncratic variances.

    ``eps`` holds full-model residuals Y - mu - BX - Lambda l on the
    arm's factual units (shape (n_units, q), possibly empty).
    """
    q = eps.shape[1]
    sse = (eps ** 2).sum(axis=0) if n_units else np.zeros(q)
    shape = a_psi + 0.5 * n_units
    rate = b_psi + 0.5 * sse
    return rate / rng.gamma(shape, 1.0, size=q)
