"""Gibbs sampler over both treatment arms with counterfactual imputation.

Each sweep updates, per arm and in fixed order: regression coefficients,
factual factor scores, loadings, the shrinkage hyperparameters, the
idiosyncratic variances, then (under the ddp prior) cluster allocation,
mixture atoms, the probit augmentation, and the stick coefficients;
finally the arm's counterfactual scores are redrawn from the mixture
predictive and the missing potential outcomes imputed. The standard
prior is the same engine with a single frozen N(0,1) atom and the
stick-breaking blocks structurally empty, so it consumes the identical
random stream as the L=1 ddp configuration.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from . import kernels, mgp, psb
from .data import ArmState, ChainOutput, Dataset, ModelConfig, init_state
from .errors import NumericalAbortError, ValidationError

BLOCKS = ("regression", "scores", "loadings", "theta", "delta", "psi",
          "allocation", "atoms", "augmentation", "sticks", "imputation")


@dataclass(frozen=True)
class SweepPlan:
    """Fixed-order block schedule; ``frozen`` names are skipped (tests only)."""

    frozen: frozenset = frozenset()

    def __post_init__(self):
        unknown = set(self.frozen) - set(BLOCKS)
        if unknown:
            raise ValidationError(f"unknown sweep blocks: {sorted(unknown)}")
        if "sticks" not in self.frozen and "augmentation" in self.frozen:
            raise ValidationError("the stick update requires the augmentation block")

    @property
    def blocks(self) -> tuple:
        return BLOCKS

    def enabled(self, name: str) -> bool:
        return name not in self.frozen


def _check_finite(arrays, sweep, arm, block):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NumericalAbortError(sweep, arm, block)


def update_regression(rng, design, targets, psi, prior_mean, prior_var):
    """Row-wise conjugate Gaussian draw of (intercept, B) coefficients.

    ``targets`` is the outcome matrix minus the factor surface on the
    arm's factual units; an empty arm yields prior draws.
    """
    d = design.shape[1]
    q = psi.shape[0]
    xtx = design.T @ design
    xty = design.T @ targets
    noise = rng.standard_normal((q, d))
    prior_prec = 1.0 / prior_var
    m0 = prior_prec * prior_mean
    coef = np.empty((q, d))
    for k in range(q):
        v = np.diag(prior_prec) + xtx / psi[k]
        m = np.linalg.solve(v, m0 + xty[:, k] / psi[k])
        chol = np.linalg.cholesky(v)
        coef[k] = m + np.linalg.solve(chol.T, noise[k])
    return coef


class GibbsSampler:
    """One chain over a dataset; mutable only through run()/run_sweep()."""

    def __init__(self, data: Dataset, cfg: ModelConfig, plan: SweepPlan | None = None):
        cfg.validate()
        self.data = data
        self.cfg = cfg
        self.plan = plan if plan is not None else SweepPlan()
        self.n_clusters = 1 if cfg.prior == "standard" else cfg.l_max
        self.Y = data.Y.copy()
        self.design = np.column_stack([np.ones(data.n), data.X])
        self.arm_idx = {t: data.arm_indices(t) for t in (0, 1)}
        self.prior_mean = np.concatenate([[cfg.mu_m], np.full(data.p, cfg.mu_beta)])
        self.prior_var = np.concatenate([[cfg.sigma_m2], np.full(data.p, cfg.sigma_beta2)])
        self.states: list[ArmState] = []
        self.y_mis = np.zeros((data.n, data.q))

    def set_outcomes(self, y: np.ndarray) -> None:
        """Replace the outcome matrix in place (joint-distribution testing)."""
        self.Y = np.asarray(y, dtype=float).copy()

    def reset(self, seed) -> np.random.Generator:
        """Initialize states deterministically; returns the chain Generator."""
        ss = np.random.SeedSequence(seed)
        s_init, s_chain = ss.spawn(2)
        cfg_init = self.cfg
        if self.n_clusters != self.cfg.l_max:
            cfg_init = dataclasses.replace(self.cfg, l_max=self.n_clusters)
        self.states = list(init_state(self.data, cfg_init, s_init))
        self.y_mis[:] = 0.0
        return np.random.default_rng(s_chain)

    def run_sweep(self, rng: np.random.Generator, sweep: int = 0) -> None:
        cfg, plan = self.cfg, self.plan
        for t in (0, 1):
            st = self.states[t]
            idx = self.arm_idx[t]
            xd = self.design[idx]
            xt = self.data.X[idx]
            yt = self.Y[idx]
            n_fac = st.n_factors

            if plan.enabled("regression"):
                targets = yt - st.scores[idx] @ st.Lambda.T
                coef = update_regression(rng, xd, targets, st.psi,
                                         self.prior_mean, self.prior_var)
                st.mu = coef[:, 0].copy()
                st.B = np.ascontiguousarray(coef[:, 1:])
                _check_finite((st.mu, st.B), sweep, t, "regression")

            resid = yt - st.mu - xt @ st.B.T
            cols = np.arange(n_fac)

            if plan.enabled("scores"):
                base = (st.Lambda.T / st.psi) @ st.Lambda
                proj = (resid / st.psi) @ st.Lambda
                lab = st.labels[idx]
                tau_lab = st.tau[lab, cols]
                eta_lab = st.eta[lab, cols]
                st.scores[idx] = kernels.draw_scores(
                    rng, base, proj + tau_lab * eta_lab, tau_lab)
                _check_finite((st.scores[idx],), sweep, t, "scores")
            sc = st.scores[idx]

            if plan.enabled("loadings"):
                st.Lambda = mgp.update_loadings(rng, resid, sc, st.psi,
                                                st.theta, st.iota)
                _check_finite((st.Lambda,), sweep, t, "loadings")
            if plan.enabled("theta"):
                st.theta = mgp.update_local_precisions(rng, st.Lambda, st.iota, cfg.nu)
                _check_finite((st.theta,), sweep, t, "theta")
            if plan.enabled("delta"):
                st.delta, st.iota = mgp.update_global_increments(
                    rng, st.Lambda, st.theta, st.delta, cfg.a1, cfg.a2)
                _check_finite((st.delta, st.iota), sweep, t, "delta")
            if plan.enabled("psi"):
                eps = resid - sc @ st.Lambda.T
                st.psi = mgp.update_noise_variances(rng, eps, idx.size,
                                                    cfg.a_psi, cfg.b_psi)
                _check_finite((st.psi,), sweep, t, "psi")

            if cfg.prior == "ddp":
                if plan.enabled("allocation"):
                    for h in range(n_fac):
                        lin = psb.stick_linear_predictors(xd, st.alpha[:, h, :])
                        w = psb.stick_weights(lin)
                        st.labels[idx, h] = psb.allocate_clusters(
                            rng, sc[:, h], w, st.eta[:, h], st.tau[:, h],
                            factor=h, sweep=sweep, arm=t)
                if plan.enabled("atoms") and not cfg.freeze_atoms:
                    for h in range(n_fac):
                        st.eta[:, h], st.tau[:, h] = psb.update_atoms(
                            rng, sc[:, h], st.labels[idx, h], self.n_clusters,
                            gamma1=cfg.gamma1, gamma2=cfg.gamma2,
                            fixed_tau=cfg.fixed_tau, tau=st.tau[:, h])
                    _check_finite((st.eta, st.tau), sweep, t, "atoms")
                if plan.enabled("augmentation"):
                    for h in range(n_fac):
                        lin = psb.stick_linear_predictors(xd, st.alpha[:, h, :])
                        z = psb.augment_probit(rng, st.labels[idx, h], lin)
                        if not np.all(np.isfinite(z[~np.isnan(z)])):
                            raise NumericalAbortError(sweep, t, "augmentation")
                        if plan.enabled("sticks"):
                            st.alpha[:, h, :] = psb.update_stick_coefficients(
                                rng, z, xd, st.labels[idx, h],
                                sigma_alpha2=cfg.sigma_alpha2)
                    if plan.enabled("sticks"):
                        _check_finite((st.alpha,), sweep, t, "sticks")

            if plan.enabled("imputation"):
                mis = self.arm_idx[1 - t]
                xm = self.design[mis]
                for h in range(n_fac):
                    if self.n_clusters == 1:
                        w = np.ones((mis.size, 1))
                    else:
                        lin = psb.stick_linear_predictors(xm, st.alpha[:, h, :])
                        w = psb.stick_weights(lin)
                    lab_h, sc_h = psb.sample_scores_prior(
                        rng, w, st.eta[:, h], st.tau[:, h])
                    st.labels[mis, h] = lab_h
                    st.scores[mis, h] = sc_h
                ymis = st.mu + self.data.X[mis] @ st.B.T + st.scores[mis] @ st.Lambda.T
                if cfg.predictive_noise:
                    ymis = ymis + rng.standard_normal((mis.size, self.data.q)) \
                        * np.sqrt(st.psi)
                self.y_mis[mis] = ymis
                _check_finite((ymis,), sweep, t, "imputation")

    def sate_draw(self) -> np.ndarray:
        """Current SATE vector: observed factual side, imputed counterfactuals."""
        treated = (self.data.T == 1)[:, None]
        y1 = np.where(treated, self.Y, self.y_mis)
        y0 = np.where(treated, self.y_mis, self.Y)
        return (y1 - y0).mean(axis=0)

    def run(self, seed=None) -> ChainOutput:
        cfg = self.cfg
        seed = cfg.rng_seed if seed is None else seed
        rng = self.reset(seed)
        m = cfg.n_kept
        q = self.data.q
        sate = np.empty((m, q))
        snaps = {t: {"mu": [], "B": [], "Lambda": [], "psi": []} for t in (0, 1)}
        cf = np.empty((m, self.data.n, q)) if cfg.store_counterfactuals else None
        k = 0
        for s in range(cfg.n_iter):
            self.run_sweep(rng, s)
            if s >= cfg.burn_in and (s + 1 - cfg.burn_in) % cfg.thin == 0:
                sate[k] = self.sate_draw()
                if cf is not None:
                    cf[k] = self.y_mis
                if k % cfg.param_stride == 0:
                    for t in (0, 1):
                        st = self.states[t]
                        snaps[t]["mu"].append(st.mu.copy())
                        snaps[t]["B"].append(st.B.copy())
                        snaps[t]["Lambda"].append(st.Lambda.copy())
                        snaps[t]["psi"].append(st.psi.copy())
                k += 1
        return ChainOutput(
            sate=sate,
            mu={t: np.stack(snaps[t]["mu"]) for t in (0, 1)},
            B={t: np.stack(snaps[t]["B"]) for t in (0, 1)},
            Lambda={t: np.stack(snaps[t]["Lambda"]) for t in (0, 1)},
            psi={t: np.stack(snaps[t]["psi"]) for t in (0, 1)},
            rng_seed=int(seed),
            config=cfg.to_dict(),
            counterfactuals=cf,
        )


def run_chain(data: Dataset, cfg: ModelConfig, seed=None) -> ChainOutput:
    """Run one chain of the full model (prior per cfg) and collect draws."""
    return GibbsSampler(data, cfg).run(seed)


def run_chain_standard(data: Dataset, cfg: ModelConfig, seed=None) -> ChainOutput:
    """StandardFA comparator: same engine with independent N(0,1) score priors."""
    return run_chain(data, dataclasses.replace(cfg, prior="standard"), seed)
