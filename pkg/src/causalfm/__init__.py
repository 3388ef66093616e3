"""Bayesian causal regression factor model for multivariate treatment effects."""

__version__ = "0.1.0"

from .data import ArmState, ChainOutput, Dataset, ModelConfig, init_state, load_dataset
from .design import MatchResult, fit_propensity, match_1to1
from .engine import GibbsSampler, SweepPlan, run_chain, run_chain_standard
from .errors import (DegenerateAllocationError, NumericalAbortError, SchemaError,
                     ValidationError)
from .estimands import EffectSummary, significance_flags, summarize_sate
from .evaluate import (align_loadings, aggregate_metrics, effective_sample_size,
                       replicate_metrics, variance_explained, varimax)
from .simulate import ScenarioSpec, SimulatedTruth, default_spec, generate

__all__ = [
    "ArmState", "ChainOutput", "Dataset", "ModelConfig", "init_state",
    "load_dataset", "MatchResult", "fit_propensity", "match_1to1",
    "GibbsSampler", "SweepPlan", "run_chain", "run_chain_standard",
    "DegenerateAllocationError", "NumericalAbortError", "SchemaError",
    "ValidationError", "EffectSummary", "significance_flags", "summarize_sate",
    "align_loadings", "aggregate_metrics", "effective_sample_size",
    "replicate_metrics", "variance_explained", "varimax",
    "ScenarioSpec", "SimulatedTruth", "default_spec", "generate",
    "__version__",
]
