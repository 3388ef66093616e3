"""Joint-distribution correctness harness for the Gibbs sampler.

Two simulators target the same joint over (parameters, latent scores,
outcomes): the marginal-conditional one draws everything fresh from the
prior and the model per sample; the successive-conditional one
alternates outcome redraws with full Gibbs sweeps. If every full
conditional is correct, any statistic has the same distribution under
both, which a two-sample rank test checks.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import mannwhitneyu

from .data import Dataset, ModelConfig
from .engine import GibbsSampler
from .psb import stick_linear_predictors, stick_weights

STAT_NAMES = (
    "mu0_mean", "mu1_mean", "b0_mean", "b1_mean", "lambda0_sumsq",
    "lambda1_sumsq", "eta0_mean", "eta1_mean", "psi0_mean", "psi1_mean",
    "alpha0_mean", "alpha1_mean", "scores0_mean", "scores1_mean",
    "y_mean", "sate_mean",
)


def tiny_problem(seed: int = 0, n: int = 20, q: int = 3, p: int = 2,
                 j: int = 2, l: int = 3) -> tuple[Dataset, ModelConfig]:
    """Small fixed-design problem for the joint test."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, p))
    t = np.zeros(n, dtype=np.int64)
    t[: n // 2] = 1
    y = rng.standard_normal((n, q))  # placeholder; redrawn by the simulators
    data = Dataset.from_arrays(y, t, x)
    cfg = ModelConfig(j_max=j, l_max=l, n_iter=10, burn_in=1, rng_seed=seed,
                      sigma_m2=1.0, sigma_beta2=1.0, sigma_alpha2=1.0)
    return data, cfg


def draw_params_from_prior(sampler: GibbsSampler, rng: np.random.Generator) -> None:
    """Overwrite both arm states with a draw from the exact prior."""
    cfg = sampler.cfg
    data = sampler.data
    n_clusters = sampler.n_clusters
    for t in (0, 1):
        st = sampler.states[t]
        q, p, n_fac = data.q, data.p, st.n_factors
        coef = sampler.prior_mean + rng.standard_normal((q, p + 1)) \
            * np.sqrt(sampler.prior_var)
        st.mu = coef[:, 0].copy()
        st.B = np.ascontiguousarray(coef[:, 1:])
        st.theta = rng.gamma(0.5 * cfg.nu, 2.0 / cfg.nu, size=(q, n_fac))
        delta = np.empty(n_fac)
        delta[0] = rng.gamma(cfg.a1, 1.0)
        if n_fac > 1:
            delta[1:] = rng.gamma(cfg.a2, 1.0, size=n_fac - 1)
        st.delta = delta
        st.iota = np.cumprod(delta)
        st.Lambda = rng.standard_normal((q, n_fac)) / np.sqrt(st.theta * st.iota)
        st.psi = cfg.b_psi / rng.gamma(cfg.a_psi, 1.0, size=q)
        st.eta = rng.standard_normal((n_clusters, n_fac))
        if cfg.fixed_tau:
            st.tau = np.ones((n_clusters, n_fac))
        else:
            st.tau = rng.gamma(cfg.gamma1, 1.0 / cfg.gamma2,
                               size=(n_clusters, n_fac))
        if n_clusters > 1:
            st.alpha = rng.standard_normal(st.alpha.shape) * np.sqrt(cfg.sigma_alpha2)
        idx = sampler.arm_idx[t]
        xd = sampler.design[idx]
        for h in range(n_fac):
            if n_clusters == 1:
                w = np.ones((idx.size, 1))
            else:
                w = stick_weights(stick_linear_predictors(xd, st.alpha[:, h, :]))
            u = rng.random(idx.size)
            labels = np.minimum((np.cumsum(w, axis=1) <= u[:, None]).sum(axis=1),
                                n_clusters - 1)
            st.labels[idx, h] = labels
            st.scores[idx, h] = rng.normal(st.eta[labels, h],
                                           1.0 / np.sqrt(st.tau[labels, h]))


def draw_outcomes(sampler: GibbsSampler, rng: np.random.Generator) -> np.ndarray:
    """Draw Y from the outcome model at the sampler's current state."""
    y = np.empty((sampler.data.n, sampler.data.q))
    for t in (0, 1):
        st = sampler.states[t]
        idx = sampler.arm_idx[t]
        mean = st.mu + sampler.data.X[idx] @ st.B.T + st.scores[idx] @ st.Lambda.T
        y[idx] = mean + rng.standard_normal(mean.shape) * np.sqrt(st.psi)
    return y


def _impute_only(sampler: GibbsSampler, rng: np.random.Generator) -> None:
    from .engine import BLOCKS, SweepPlan

    plan = sampler.plan
    sampler.plan = SweepPlan(frozenset(b for b in BLOCKS if b != "imputation"))
    sampler.run_sweep(rng)
    sampler.plan = plan


def collect_stats(sampler: GibbsSampler) -> np.ndarray:
    s0, s1 = sampler.states
    vals = [
        s0.mu.mean(), s1.mu.mean(), s0.B.mean(), s1.B.mean(),
        (s0.Lambda ** 2).sum(), (s1.Lambda ** 2).sum(),
        s0.eta.mean(), s1.eta.mean(), s0.psi.mean(), s1.psi.mean(),
        s0.alpha.mean() if s0.alpha.size else 0.0,
        s1.alpha.mean() if s1.alpha.size else 0.0,
        s0.scores[sampler.arm_idx[0]].mean(), s1.scores[sampler.arm_idx[1]].mean(),
        sampler.Y.mean(), sampler.sate_draw().mean(),
    ]
    return np.array(vals)


def marginal_conditional(data, cfg, n_samples, seed) -> np.ndarray:
    """Independent draws of (params, Y) from prior x model."""
    sampler = GibbsSampler(data, cfg)
    rng = sampler.reset(seed)
    out = np.empty((n_samples, len(STAT_NAMES)))
    for i in range(n_samples):
        draw_params_from_prior(sampler, rng)
        sampler.set_outcomes(draw_outcomes(sampler, rng))
        _impute_only(sampler, rng)
        out[i] = collect_stats(sampler)
    return out


def successive_conditional(data, cfg, n_samples, thin, seed) -> np.ndarray:
    """Gibbs transitions interleaved with outcome redraws, thinned."""
    sampler = GibbsSampler(data, cfg)
    rng = sampler.reset(seed)
    draw_params_from_prior(sampler, rng)
    out = np.empty((n_samples, len(STAT_NAMES)))
    for i in range(n_samples):
        for _ in range(thin):
            sampler.set_outcomes(draw_outcomes(sampler, rng))
            sampler.run_sweep(rng)
        out[i] = collect_stats(sampler)
    return out


def geweke_pvalues(data, cfg, n_samples=3000, thin=15, seed=0) -> dict[str, float]:
    """Mann-Whitney p-value per statistic comparing the two simulators."""
    a = marginal_conditional(data, cfg, n_samples, seed)
    b = successive_conditional(data, cfg, n_samples, thin, seed + 1)
    pvals = {}
    for k, name in enumerate(STAT_NAMES):
        if np.std(a[:, k]) == 0.0 and np.std(b[:, k]) == 0.0:
            pvals[name] = 1.0
            continue
        pvals[name] = float(mannwhitneyu(a[:, k], b[:, k],
                                         alternative="two-sided").pvalue)
    return pvals
