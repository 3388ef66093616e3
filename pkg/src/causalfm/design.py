"""Observational preprocessing: propensity scores and 1-to-1 greedy matching."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import ValidationError

_PROB_EPS = 1e-12


def _expit(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _irls(design, t, ridge, max_iter=100, grad_tol=1e-8):
    beta = np.zeros(design.shape[1])
    for _ in range(max_iter):
        p = _expit(design @ beta)
        grad = design.T @ (t - p) - ridge * beta
        if np.max(np.abs(grad)) < grad_tol:
            return beta, True
        w = np.maximum(p * (1.0 - p), 1e-10)
        hess = (design.T * w) @ design + ridge * np.eye(design.shape[1])
        step = np.linalg.solve(hess, grad)
        if not np.all(np.isfinite(step)):
            return beta, False
        beta = beta + step
        if np.max(np.abs(beta)) > 1e3:
            return beta, False
    return beta, False


def fit_propensity(data: Dataset) -> np.ndarray:
    """Logistic regression of treatment on covariates via IRLS.

    Falls back to a ridge-stabilized fit (penalty 1e-4) with a warning
    when the unpenalized fit fails to converge (perfect separation).
    """
    design = np.column_stack([np.ones(data.n), data.X])
    t = data.T.astype(float)
    beta, converged = _irls(design, t, ridge=0.0)
    if not converged:
        warnings.warn("propensity IRLS did not converge; refitting with ridge 1e-4")
        beta, _ = _irls(design, t, ridge=1e-4)
    return np.clip(_expit(design @ beta), _PROB_EPS, 1.0 - _PROB_EPS)


@dataclass
class MatchResult:
    """Greedy 1-to-1 matched sample plus balance diagnostics."""

    pairs: list[tuple[str, str, float]]
    matched: Dataset
    smd_before: np.ndarray
    smd_after: np.ndarray
    treated_indices: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))
    control_indices: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))


def standardized_mean_differences(x: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Signed SMD per covariate: (mean_T - mean_C) / pooled SD."""
    xt, xc = x[t == 1], x[t == 0]
    pooled = np.sqrt(0.5 * (xt.var(axis=0, ddof=1) + xc.var(axis=0, ddof=1)))
    pooled[pooled == 0.0] = 1.0
    return (xt.mean(axis=0) - xc.mean(axis=0)) / pooled


def match_1to1(data: Dataset, propensity: np.ndarray | None = None,
               caliper: float | None = None) -> MatchResult:
    """Greedy nearest-neighbor propensity matching without replacement.

    Treated units are processed in descending propensity order; distance
    ties go to the lower control row index. Treated units with no
    remaining control (or none within the caliper) are dropped with a
    warning. The matched Dataset is re-standardized on the matched rows.
    """
    if propensity is None:
        propensity = fit_propensity(data)
    propensity = np.asarray(propensity, dtype=float)
    if propensity.shape[0] != data.n:
        raise ValidationError("propensity vector length must match the dataset")
    treated = np.flatnonzero(data.T == 1)
    controls = np.flatnonzero(data.T == 0)
    order = treated[np.argsort(-propensity[treated], kind="stable")]
    available = np.ones(controls.size, dtype=bool)
    pairs = []
    t_rows, c_rows = [], []
    dropped = 0
    for k, ti in enumerate(order):
        live = np.flatnonzero(available)
        if live.size == 0:
            dropped += len(order) - k
            break
        dist = np.abs(propensity[controls[live]] - propensity[ti])
        j = live[np.argmin(dist)]  # argmin takes the first (lowest index) tie
        best = float(np.abs(propensity[controls[j]] - propensity[ti]))
        if caliper is not None and best > caliper:
            dropped += 1
            continue
        available[j] = False
        ci = controls[j]
        pairs.append((data.unit_ids[ti], data.unit_ids[ci], best))
        t_rows.append(ti)
        c_rows.append(ci)
    if dropped:
        warnings.warn(f"dropped {dropped} treated units with no admissible control")
    rows = np.sort(np.array(t_rows + c_rows, dtype=np.int64))
    x_raw = data.x_raw()
    smd_before = standardized_mean_differences(x_raw, data.T)
    if rows.size == 0:
        raise ValidationError("matching produced an empty sample")
    matched = Dataset.from_arrays(data.Y[rows], data.T[rows], x_raw[rows],
                                  [data.unit_ids[i] for i in rows])
    smd_after = standardized_mean_differences(x_raw[rows], data.T[rows])
    return MatchResult(pairs=pairs, matched=matched, smd_before=smd_before,
                       smd_after=smd_after,
                       treated_indices=np.array(t_rows, dtype=np.int64),
                       control_indices=np.array(c_rows, dtype=np.int64))
