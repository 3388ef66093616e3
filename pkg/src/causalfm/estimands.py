"""Posterior summaries of the multivariate sample average treatment effect."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass
class EffectSummary:
    """Per-outcome posterior mean/median/SD and equal-tailed credible bounds."""

    mean: np.ndarray
    median: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    sd: np.ndarray
    level: float
    n_draws: int


def summarize_sate(draws: np.ndarray, level: float = 0.90) -> EffectSummary:
    """Equal-tailed interval summary of SATE draws (m x q), type-7 quantiles."""
    draws = np.atleast_2d(np.asarray(draws, dtype=float))
    if draws.shape[0] < 2:
        raise ValidationError("need at least 2 draws to summarize")
    if not (0.0 < level < 1.0):
        raise ValidationError("level must be in (0, 1)")
    tail = 0.5 * (1.0 - level)
    lower, median, upper = np.quantile(draws, [tail, 0.5, 1.0 - tail], axis=0)
    return EffectSummary(
        mean=draws.mean(axis=0),
        median=median,
        lower=lower,
        upper=upper,
        sd=draws.std(axis=0, ddof=1),
        level=level,
        n_draws=draws.shape[0],
    )


def significance_flags(summary: EffectSummary) -> np.ndarray:
    """Sign of each effect whose credible interval excludes zero, else 0."""
    flags = np.zeros(summary.mean.shape[0], dtype=np.int64)
    flags[summary.lower > 0.0] = 1
    flags[summary.upper < 0.0] = -1
    return flags


def effect_summary_dict(summary: EffectSummary, names=None) -> dict:
    """JSON-ready payload matching the summary.json schema."""
    q = summary.mean.shape[0]
    names = list(names) if names else [f"sate_{k + 1}" for k in range(q)]
    sig = significance_flags(summary)
    return {
        "outcomes": [
            {
                "name": names[k],
                "mean": float(summary.mean[k]),
                "median": float(summary.median[k]),
                "lo": float(summary.lower[k]),
                "hi": float(summary.upper[k]),
                "sd": float(summary.sd[k]),
                "sig": int(sig[k]),
            }
            for k in range(q)
        ],
        "level": summary.level,
        "m": summary.n_draws,
    }


def summary_from_dict(payload: dict) -> EffectSummary:
    """Inverse of effect_summary_dict."""
    rows = payload["outcomes"]
    return EffectSummary(
        mean=np.array([r["mean"] for r in rows]),
        median=np.array([r["median"] for r in rows]),
        lower=np.array([r["lo"] for r in rows]),
        upper=np.array([r["hi"] for r in rows]),
        sd=np.array([r["sd"] for r in rows]),
        level=float(payload["level"]),
        n_draws=int(payload["m"]),
    )
