"""Synthetic scenario generators with known ground-truth treatment effects.

Six scenarios: (1) confounder U independent of X, (2) U driven by X,
(3) X driven by U, (4) a large mimic of the air-quality application
without U, (5) weak loadings with nonlinear regression surfaces, and
(6) U hitting the outcomes directly (confounding no model here can fix).
The free linkage functions (f_U, f_T, f_C, Bernoulli rates, cluster
means) are fixed, simple choices recorded in the generated truth.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import ValidationError

CLUSTER_MEANS = {2: (-1.5, 1.5), 3: (-2.0, 0.0, 2.0)}
U_MODES = ("independent", "u_given_x", "x_given_u", "none", "direct")
PROPENSITY_CLIP = (0.02, 0.98)
ZERO_FRACTION = 0.25


@dataclass
class ScenarioSpec:
    """Generating-process description for one scenario."""

    scenario: int
    n: int
    q: int
    p: int
    j: int
    cluster_counts: tuple[int, ...]
    u_mode: str
    nonlinear_mean: bool
    loading_low: float
    loading_high: float
    rng_seed: int = 0
    gamma_u: float = 0.8

    def __post_init__(self):
        if self.scenario not in range(1, 7):
            raise ValidationError("scenario must be 1..6")
        if min(self.n, self.q, self.p, self.j) < 1:
            raise ValidationError("dimensions must be positive")
        if self.u_mode not in U_MODES:
            raise ValidationError(f"u_mode must be one of {U_MODES}")
        if len(self.cluster_counts) != self.j:
            raise ValidationError("need one cluster count per factor")
        if any(c not in CLUSTER_MEANS for c in self.cluster_counts):
            raise ValidationError("cluster counts must be 2 or 3")


@dataclass
class SimulatedTruth:
    """Generated data plus every latent quantity needed for scoring."""

    dataset: Dataset
    y0: np.ndarray
    y1: np.ndarray
    sate: np.ndarray
    loadings: dict[int, np.ndarray]
    scores: dict[int, np.ndarray]
    clusters: np.ndarray
    u: np.ndarray
    propensity: np.ndarray
    linkage: dict = field(default_factory=dict)


def _scenario_traits(scenario: int) -> dict:
    return {
        1: dict(u_mode="independent", nonlinear_mean=False, weak=False),
        2: dict(u_mode="u_given_x", nonlinear_mean=False, weak=False),
        3: dict(u_mode="x_given_u", nonlinear_mean=False, weak=False),
        4: dict(u_mode="none", nonlinear_mean=False, weak=False),
        5: dict(u_mode="independent", nonlinear_mean=True, weak=True),
        6: dict(u_mode="direct", nonlinear_mean=False, weak=False),
    }[scenario]


def default_spec(scenario: int, desk_scale: bool = False, seed: int = 0) -> ScenarioSpec:
    """Scenario defaults: Table-1 sizes, or the small desk-scale variant."""
    traits = _scenario_traits(scenario)
    if scenario == 4:
        n, q, p, j = 3426, 27, 28, 3
    elif desk_scale:
        n, q, p, j = 300, 6, 4, 2
    else:
        n, q, p, j = 500, 10, 4, 3
    lo, hi = (0.05, 0.15) if traits["weak"] else (0.8, 1.0)
    return ScenarioSpec(
        scenario=scenario, n=n, q=q, p=p, j=j,
        cluster_counts=tuple(3 if h % 2 == 0 else 2 for h in range(j)),
        u_mode=traits["u_mode"], nonlinear_mean=traits["nonlinear_mean"],
        loading_low=lo, loading_high=hi, rng_seed=seed,
        gamma_u=0.0 if scenario == 4 else 0.8,
    )


def nonlinear_mean(x: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Nonlinear regression surface on four covariates (last two binary).

    beta has 7 entries: intercept, exp(X1), X2^2, X3, X4, the X3=X4=1
    indicator, and the X3=X4=0 indicator.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    x3, x4 = x[:, 2], x[:, 3]
    both = ((x3 == 1.0) & (x4 == 1.0)).astype(float)
    neither = ((x3 == 0.0) & (x4 == 0.0)).astype(float)
    out = (beta[0] + beta[1] * np.exp(x[:, 0]) + beta[2] * x[:, 1] ** 2
           + beta[3] * x3 + beta[4] * x4 + beta[5] * both + beta[6] * neither)
    return out if out.shape[0] > 1 else out


def _f_u(x: np.ndarray) -> np.ndarray:
    return 0.5 * (x[:, 0] + x[:, 1] - x[:, 2] + x[:, 3])


def _f_t(x: np.ndarray, u: np.ndarray) -> np.ndarray:
    index = 0.3 * (x[:, 0] - x[:, 1] + x[:, 2] - x[:, 3] + 0.5 * u)
    return np.clip(1.0 / (1.0 + np.exp(-index)), *PROPENSITY_CLIP)


def _cluster_assign(x1: np.ndarray, n_clusters: int) -> tuple[np.ndarray, list[float]]:
    if n_clusters == 2:
        cuts = [float(np.quantile(x1, 0.5))]
    else:
        cuts = [float(np.quantile(x1, 1 / 3)), float(np.quantile(x1, 2 / 3))]
    return np.searchsorted(cuts, x1, side="right"), cuts


def _draw_loadings(rng, q, j, lo, hi) -> np.ndarray:
    n_zero = round(ZERO_FRACTION * q * j)
    zero_pos = rng.choice(q * j, size=n_zero, replace=False)
    signs = np.where(rng.random(q * j) < 0.5, -1.0, 1.0)
    mags = rng.uniform(lo, hi, size=q * j)
    lam = signs * mags
    lam[zero_pos] = 0.0
    return lam.reshape(q, j)


_SC4_BLOCKS = (17, 5, 5)  # metals+metalloids, nonmetals, halogens+organics


def scenario4_loadings() -> np.ndarray:
    """Fixed 27x3 block loading matrix standing in for the data-estimated one."""
    lam = np.zeros((27, 3))
    start = 0
    for h, size in enumerate(_SC4_BLOCKS):
        lam[start:start + size, h] = 0.9
        lam[start:start + size:4, h] = 0.0  # sprinkle ~25% structural zeros
        lam[start + 1:start + size:5, (h + 1) % 3] = 0.3
        start += size
    return lam


def generate(spec: ScenarioSpec) -> SimulatedTruth:
    """Realize one dataset with both potential-outcome surfaces."""
    rng = np.random.default_rng(spec.rng_seed)
    n, q, p, j = spec.n, spec.q, spec.p, spec.j
    n_binary = 4 if spec.scenario == 4 else 2
    linkage = {
        "f_u": "0.5*(x1+x2-x3+x4)",
        "f_t": "clip(logistic(0.3*(x1-x2+x3-x4+0.5*u)), 0.02, 0.98)",
        "f_c": "empirical quantile thresholds of x1",
        "binary_columns": list(range(p - n_binary, p)),
        "bernoulli_rate": 0.5,
    }

    u = np.zeros(n)
    if spec.u_mode in ("independent", "x_given_u", "direct"):
        u = rng.normal(0.0, np.sqrt(2.0), size=n)
    x = np.empty((n, p))
    n_cont = p - n_binary
    x[:, :n_cont] = rng.standard_normal((n, n_cont))
    x[:, n_cont:] = (rng.random((n, n_binary)) < 0.5).astype(float)
    if spec.u_mode == "x_given_u":
        x[:, 0] = 0.7 * u + rng.standard_normal(n)
        x[:, 1] = 0.7 * u + rng.standard_normal(n)
    if spec.u_mode == "u_given_x":
        u = rng.normal(_f_u(x), np.sqrt(0.5))

    if spec.u_mode == "none":
        prop = _f_t(x, np.zeros(n))
    else:
        prop = _f_t(x, u)
    t = np.zeros(n, dtype=np.int64)
    for _ in range(100):
        t = (rng.random(n) < prop).astype(np.int64)
        if 0 < t.sum() < n:
            break

    clusters = np.empty((n, j), dtype=np.int64)
    thresholds = []
    for h in range(j):
        clusters[:, h], cuts = _cluster_assign(x[:, 0], spec.cluster_counts[h])
        thresholds.append(cuts)
    linkage["cluster_thresholds"] = thresholds
    linkage["cluster_means"] = [list(CLUSTER_MEANS[c]) for c in spec.cluster_counts]
    linkage["gamma_u"] = spec.gamma_u

    scores = {}
    for arm in (0, 1):
        sc = np.empty((n, j))
        for h in range(j):
            mu_c = np.asarray(CLUSTER_MEANS[spec.cluster_counts[h]])
            sc[:, h] = rng.normal(mu_c[clusters[:, h]] + spec.gamma_u * u, 1.0)
        scores[arm] = sc

    if spec.scenario == 4:
        loadings = {0: scenario4_loadings(), 1: scenario4_loadings()}
    else:
        loadings = {arm: _draw_loadings(rng, q, j, spec.loading_low, spec.loading_high)
                    for arm in (0, 1)}

    means = {}
    b_coef = {}
    for arm in (0, 1):
        if spec.nonlinear_mean:
            beta = rng.uniform(-3.0 + arm, 2.0 + arm, size=(q, 7))
            means[arm] = np.column_stack([nonlinear_mean(x[:, :4], beta[k])
                                          for k in range(q)])
        else:
            beta = rng.uniform(-3.0 + arm, 2.0 + arm, size=(q, p))
            means[arm] = x @ beta.T
        b_coef[arm] = beta
    beta_u = rng.uniform(0.5, 1.5, size=q) if spec.u_mode == "direct" else np.zeros(q)
    linkage["beta_u"] = beta_u.tolist()

    potential = {}
    for arm in (0, 1):
        noise = rng.random((n, q))
        potential[arm] = (means[arm] + scores[arm] @ loadings[arm].T
                          + beta_u * u[:, None] + noise)
    y0, y1 = potential[0], potential[1]
    y_obs = np.where((t == 1)[:, None], y1, y0)

    dataset = Dataset.from_arrays(y_obs, t, x)
    return SimulatedTruth(
        dataset=dataset,
        y0=y0,
        y1=y1,
        sate=(y1 - y0).mean(axis=0),
        loadings=loadings,
        scores=scores,
        clusters=clusters,
        u=u,
        propensity=prop,
        linkage=linkage,
    )
