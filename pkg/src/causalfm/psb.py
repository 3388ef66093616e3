"""Covariate-dependent probit stick-breaking prior on factor scores.

All operations act on one (arm, factor) slice: stick coefficients
``alpha`` of shape (L-1, p+1) against an intercept-augmented design,
mixture atoms ``eta``/``tau`` of shape (L,). The last stick always takes
the residual mass, so weights sum to one by construction.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .errors import DegenerateAllocationError
from .special import ndtr


def stick_linear_predictors(design: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """Linear predictors x~' alpha_l, shape (n, L-1)."""
    return design @ alpha.T


def stick_weights(lin_pred: np.ndarray) -> np.ndarray:
    """Stick-breaking weights pi_l = Phi(a_l) prod_{g<l} (1 - Phi(a_g)).

    ``lin_pred`` has one column per breakable stick (L-1 of them); the
    returned (n, L) weights append the residual product as the last
    cluster's mass.
    """
    lin_pred = np.atleast_2d(lin_pred)
    v = ndtr(lin_pred)
    surv = np.cumprod(1.0 - v, axis=1)
    weights = np.empty((lin_pred.shape[0], lin_pred.shape[1] + 1))
    weights[:, 0] = v[:, 0] if v.shape[1] else 1.0
    if v.shape[1]:
        weights[:, 1:-1] = v[:, 1:] * surv[:, :-1]
        weights[:, -1] = surv[:, -1]
    return weights


def allocate_clusters(rng, scores, weights, eta, tau, *, factor=0, sweep=-1, arm=-1):
    """Posterior cluster labels: P(S=l) ~ pi_l(x) N(score; eta_l, 1/tau_l)."""
    labels, bad = kernels.allocate_labels(rng, scores, weights, eta, tau)
    if bad >= 0:
        raise DegenerateAllocationError(unit=bad, factor=factor, sweep=sweep, arm=arm)
    return labels


def update_atoms(rng, scores, labels, n_clusters, *, mu_eta=0.0, sigma_eta2=1.0,
                 gamma1=1.0, gamma2=1.0, fixed_tau=True, tau=None):
    """Conjugate update of mixture atom locations (and precisions when enabled).

    Empty clusters fall back to the prior. With ``fixed_tau`` (the
    default) precisions stay at their current values (1 in the main
    model); otherwise they get their Gamma(gamma1, gamma2) update using
    the freshly drawn locations.
    """
    tau = np.ones(n_clusters) if tau is None else np.asarray(tau, dtype=float)
    counts = np.bincount(labels, minlength=n_clusters).astype(float)
    sums = np.bincount(labels, weights=scores, minlength=n_clusters)
    prec = counts * tau + 1.0 / sigma_eta2
    mean = (tau * sums + mu_eta / sigma_eta2) / prec
    eta_new = mean + rng.standard_normal(n_clusters) / np.sqrt(prec)
    if fixed_tau:
        return eta_new, tau.copy()
    sse = np.bincount(labels, weights=(scores - eta_new[labels]) ** 2,
                      minlength=n_clusters)
    tau_new = rng.gamma(gamma1 + 0.5 * counts, 1.0 / (gamma2 + 0.5 * sse))
    return eta_new, tau_new


def augment_probit(rng, labels, lin_pred):
    """Latent probit draws Z, dense (n, L-1) with NaN where undefined.

    Z[i, l] ~ N(lin_pred[i, l], 1) restricted positive at the chosen
    stick l = S_i and negative at earlier sticks; sticks after S_i are
    never reached. Reconstructing labels from the signs recovers S.
    """
    return kernels.augment_z(rng, labels, lin_pred)


def update_stick_coefficients(rng, z, design, labels, *, sigma_alpha2, mu_alpha=0.0):
    """Gaussian draw of each breakable stick's coefficient vector.

    Stick l is informed by the units that reached it (S_i >= l); with no
    such units the draw comes from the N(mu_alpha, sigma_alpha2 I) prior.
    """
    n_sticks = z.shape[1]
    d = design.shape[1]
    noise = rng.standard_normal((n_sticks, d))
    alpha = np.empty((n_sticks, d))
    prior_prec = 1.0 / sigma_alpha2
    for l in range(n_sticks):
        rows = labels >= l
        xl = design[rows]
        zl = z[rows, l]
        w = prior_prec * np.eye(d) + xl.T @ xl
        m = np.linalg.solve(w, prior_prec * mu_alpha + xl.T @ zl)
        chol = np.linalg.cholesky(w)
        alpha[l] = m + np.linalg.solve(chol.T, noise[l])
    return alpha


def sample_scores_prior(rng, weights, eta, tau):
    """Predictive draws from the covariate-dependent mixture.

    Returns (labels, scores): label ~ Categorical(weights row), score ~
    N(eta_label, 1/tau_label). Used to impute counterfactual-arm scores.
    """
    return kernels.predictive_scores(rng, weights, eta, tau)
