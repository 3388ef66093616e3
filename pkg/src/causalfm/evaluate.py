"""Replicate metrics, varimax rotation, loading recovery, MCMC diagnostics."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .estimands import EffectSummary


@dataclass
class ReplicateMetrics:
    """Per-outcome error summary of one fitted replicate against its truth."""

    bias: np.ndarray
    squared_error: np.ndarray
    covered: np.ndarray
    method: str = ""


def replicate_metrics(summary: EffectSummary, true_sate, method: str = "") -> ReplicateMetrics:
    true_sate = np.asarray(true_sate, dtype=float)
    bias = summary.mean - true_sate
    covered = (summary.lower <= true_sate) & (true_sate <= summary.upper)
    return ReplicateMetrics(bias=bias, squared_error=bias ** 2,
                            covered=covered.astype(float), method=method)


def aggregate_metrics(reps: list[ReplicateMetrics]) -> dict:
    """Mean bias, MSE, and coverage rate per outcome across replicates."""
    if not reps:
        raise ValidationError("need at least one replicate")
    return {
        "bias": np.mean([r.bias for r in reps], axis=0),
        "mse": np.mean([r.squared_error for r in reps], axis=0),
        "coverage": np.mean([r.covered for r in reps], axis=0),
    }


def varimax_criterion(lam: np.ndarray) -> float:
    """Sum over factors of the variance of squared loadings."""
    lam2 = lam ** 2
    q = lam.shape[0]
    return float(np.sum(lam2 ** 2) / q - np.sum((lam2.mean(axis=0)) ** 2))


def varimax(lam: np.ndarray, tol: float = 1e-8, max_iter: int = 1000,
            kaiser: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal varimax rotation by pairwise Jacobi sweeps.

    Returns (rotated loadings, rotation matrix R) with loadings @ R the
    rotated matrix. Kaiser row-normalization is off by default.
    """
    lam = np.asarray(lam, dtype=float)
    q, n_fac = lam.shape
    rot = np.eye(n_fac)
    if n_fac < 2:
        return lam.copy(), rot
    scale = np.ones(q)
    if kaiser:
        scale = np.sqrt((lam ** 2).sum(axis=1))
        scale[scale == 0.0] = 1.0
    work = lam / scale[:, None]
    crit = varimax_criterion(work)
    for _ in range(max_iter):
        for a in range(n_fac - 1):
            for b in range(a + 1, n_fac):
                x, y = work[:, a], work[:, b]
                u = x ** 2 - y ** 2
                v = 2.0 * x * y
                num = 2.0 * (u * v).sum() - 2.0 * u.sum() * v.sum() / q
                den = (u ** 2 - v ** 2).sum() - (u.sum() ** 2 - v.sum() ** 2) / q
                phi = 0.25 * np.arctan2(num, den)
                if abs(phi) < 1e-15:
                    continue
                c, s = np.cos(phi), np.sin(phi)
                g = np.array([[c, -s], [s, c]])
                work[:, [a, b]] = work[:, [a, b]] @ g
                rot[:, [a, b]] = rot[:, [a, b]] @ g
        new_crit = varimax_criterion(work)
        if new_crit - crit < tol:
            break
        crit = new_crit
    return lam @ rot, rot


def variance_explained(lam: np.ndarray, psi: np.ndarray) -> tuple[np.ndarray, float]:
    """Per-factor and total share of variance captured by the loadings.

    share_h = sum_j lambda_jh^2 / (sum_jh lambda_jh^2 + sum_j psi_j).
    """
    psi = np.asarray(psi, dtype=float)
    if np.any(psi <= 0.0):
        raise ValidationError("psi must be positive")
    col = (np.asarray(lam, dtype=float) ** 2).sum(axis=0)
    denom = col.sum() + psi.sum()
    shares = col / denom
    return shares, float(shares.sum())


@dataclass
class LoadingAlignment:
    """Column permutation + signs matching an estimate to reference loadings."""

    permutation: np.ndarray
    signs: np.ndarray
    correlations: np.ndarray

    def apply(self, estimate: np.ndarray) -> np.ndarray:
        return estimate[:, self.permutation] * self.signs


def _safe_corr(a: np.ndarray, b: np.ndarray) -> float:
    sa, sb = a.std(), b.std()
    if sa == 0.0 or sb == 0.0:
        return 0.0
    return float(np.mean((a - a.mean()) * (b - b.mean())) / (sa * sb))


def align_loadings(estimate: np.ndarray, truth: np.ndarray) -> LoadingAlignment:
    """Greedy maximum-|correlation| column matching with sign fixing.

    permutation[h] is the estimate column matched to truth column h;
    correlations holds the signed correlation of each matched pair after
    sign fixing (so perfect recovery gives +1 everywhere).
    """
    estimate = np.asarray(estimate, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if estimate.shape != truth.shape:
        raise ValidationError("estimate and truth must have the same shape")
    n_fac = truth.shape[1]
    corr = np.array([[_safe_corr(truth[:, i], estimate[:, j])
                      for j in range(n_fac)] for i in range(n_fac)])
    perm = np.empty(n_fac, dtype=np.int64)
    signs = np.empty(n_fac)
    matched = np.zeros(n_fac)
    absc = np.abs(corr)
    free_rows = set(range(n_fac))
    free_cols = set(range(n_fac))
    for _ in range(n_fac):
        best = max(((absc[i, j], -i, -j) for i in free_rows for j in free_cols))
        i, j = -best[1], -best[2]
        perm[i] = j
        signs[i] = 1.0 if corr[i, j] >= 0.0 else -1.0
        matched[i] = abs(corr[i, j])
        free_rows.remove(i)
        free_cols.remove(j)
    return LoadingAlignment(permutation=perm, signs=signs, correlations=matched)


def effective_sample_size(x: np.ndarray) -> float:
    """ESS from Geyer's initial-positive-sequence autocorrelation estimator.

    Constant sequences are flagged with a warning and return the draw
    count; the result is clipped into (0, m].
    """
    x = np.asarray(x, dtype=float).ravel()
    m = x.shape[0]
    if m < 10:
        raise ValidationError("need at least 10 draws for an ESS estimate")
    centered = x - x.mean()
    var0 = float(centered @ centered) / m
    if var0 == 0.0:
        warnings.warn("zero-variance draw sequence; ESS defined as the draw count")
        return float(m)
    nfft = int(2 ** np.ceil(np.log2(2 * m)))
    f = np.fft.rfft(centered, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[:m].real / m
    rho = acov / acov[0]
    tau = 0.0
    for k in range(m // 2):
        pair = rho[2 * k] + (rho[2 * k + 1] if 2 * k + 1 < m else 0.0)
        if pair <= 0.0:
            break
        tau += 2.0 * pair
    tau = max(tau - 1.0, 1e-12)
    return float(min(m / tau, m))
