"""Observed data, model configuration, and sampler state containers.

The dataset always holds standardized covariates; the original column
means/SDs are kept so files round-trip in natural units. One ArmState
exists per treatment level and carries every latent quantity the Gibbs
sweep touches, for all n units (factual rows are posterior-updated,
counterfactual rows are refreshed from the mixture predictive).
"""

from __future__ import annotations

import csv
import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import SchemaError, ValidationError

DEFAULT_SCHEMA = {"id": "id", "treatment": "t", "outcome_prefix": "y_", "covariate_prefix": "x_"}


def standardize(x_raw: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Column-standardize a covariate matrix (mean 0, SD 1, ddof=1).

    Returns (standardized matrix, column means, column SDs). Constant
    columns are rejected: their standardization is undefined.
    """
    x_raw = np.asarray(x_raw, dtype=float)
    means = x_raw.mean(axis=0)
    sds = x_raw.std(axis=0, ddof=1)
    if np.any(sds == 0.0) or not np.all(np.isfinite(sds)):
        bad = int(np.flatnonzero(~(sds > 0.0))[0])
        raise ValidationError(f"covariate column {bad} is constant; cannot standardize")
    return (x_raw - means) / sds, means, sds


@dataclass
class Dataset:
    """Observed sample: q-variate outcomes, binary treatment, standardized covariates."""

    Y: np.ndarray
    T: np.ndarray
    X: np.ndarray
    unit_ids: list[str]
    x_means: np.ndarray
    x_sds: np.ndarray

    @property
    def n(self) -> int:
        return self.Y.shape[0]

    @property
    def q(self) -> int:
        return self.Y.shape[1]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @classmethod
    def from_arrays(cls, Y, T, X_raw, unit_ids=None) -> "Dataset":
        """Validate raw arrays and build a Dataset with standardized X."""
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        X_raw = np.atleast_2d(np.asarray(X_raw, dtype=float))
        T = np.asarray(T)
        n = Y.shape[0]
        if X_raw.shape[0] != n or T.shape[0] != n:
            raise ValidationError("Y, T, X must have matching row counts")
        if not np.all(np.isfinite(Y)):
            i, j = np.argwhere(~np.isfinite(Y))[0]
            raise ValidationError(f"non-finite outcome at row {i}, column {j}")
        if not np.all(np.isfinite(X_raw)):
            i, j = np.argwhere(~np.isfinite(X_raw))[0]
            raise ValidationError(f"non-finite covariate at row {i}, column {j}")
        t_int = np.asarray(T, dtype=float)
        if not np.all(np.isin(t_int, (0.0, 1.0))):
            i = int(np.flatnonzero(~np.isin(t_int, (0.0, 1.0)))[0])
            raise ValidationError(f"treatment must be 0/1; row {i} has {T[i]!r}")
        T = t_int.astype(np.int64)
        if T.sum() == 0 or T.sum() == n:
            raise ValidationError("both treatment arms must be non-empty")
        X, means, sds = standardize(X_raw)
        if unit_ids is None:
            unit_ids = [str(i) for i in range(n)]
        return cls(Y=Y, T=T, X=X, unit_ids=list(map(str, unit_ids)),
                   x_means=means, x_sds=sds)

    def x_raw(self) -> np.ndarray:
        """Covariates mapped back to their original units."""
        return self.X * self.x_sds + self.x_means

    def arm_indices(self, t: int) -> np.ndarray:
        return np.flatnonzero(self.T == t)


def _resolve_columns(header: list[str], schema: dict) -> tuple[str, str, list[str], list[str]]:
    schema = {**DEFAULT_SCHEMA, **(schema or {})}
    id_col = schema["id"]
    t_col = schema["treatment"]
    if "outcomes" in schema:
        y_cols = list(schema["outcomes"])
    else:
        y_cols = [c for c in header if c.startswith(schema["outcome_prefix"])]
    if "covariates" in schema:
        x_cols = list(schema["covariates"])
    else:
        x_cols = [c for c in header if c.startswith(schema["covariate_prefix"])]
    missing = [c for c in [id_col, t_col, *y_cols, *x_cols] if c not in header]
    if missing or not y_cols or not x_cols:
        raise SchemaError(
            f"missing columns {missing or ['<no outcome/covariate columns>']} "
            f"in header {header}"
        )
    return id_col, t_col, y_cols, x_cols


def load_dataset(path, schema: dict | None = None) -> Dataset:
    """Read a CSV of observations and return a validated Dataset.

    Default columns: id, t, y_1..y_q, x_1..x_p; remap with a schema dict
    (keys: id, treatment, outcomes, covariates or *_prefix).
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    id_col, t_col, y_cols, x_cols = _resolve_columns(header, schema or {})
    idx = {c: header.index(c) for c in header}

    def parse(row_i, row, col):
        text = row[idx[col]]
        try:
            val = float(text)
        except ValueError:
            raise ValidationError(f"row {row_i}, column '{col}': not a number: {text!r}")
        if not np.isfinite(val):
            raise ValidationError(f"row {row_i}, column '{col}': non-finite value")
        return val

    ids = [row[idx[id_col]] for row in rows]
    T = [parse(i, row, t_col) for i, row in enumerate(rows)]
    Y = [[parse(i, row, c) for c in y_cols] for i, row in enumerate(rows)]
    X = [[parse(i, row, c) for c in x_cols] for i, row in enumerate(rows)]
    return Dataset.from_arrays(np.array(Y), np.array(T), np.array(X), ids)


def write_dataset(data: Dataset, path, schema: dict | None = None) -> None:
    """Write a Dataset back to CSV in original covariate units (round-trips)."""
    schema = {**DEFAULT_SCHEMA, **(schema or {})}
    y_cols = [f"{schema['outcome_prefix']}{k + 1}" for k in range(data.q)]
    x_cols = [f"{schema['covariate_prefix']}{k + 1}" for k in range(data.p)]
    x_raw = data.x_raw()
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([schema["id"], schema["treatment"], *y_cols, *x_cols])
        for i in range(data.n):
            writer.writerow([data.unit_ids[i], int(data.T[i]),
                             *[repr(v) for v in data.Y[i]],
                             *[repr(v) for v in x_raw[i]]])


@dataclass
class ModelConfig:
    """Sampler truncations, run lengths, and prior hyperparameters.

    Variance-scale fields (sigma_*) are variances, not SDs. ``prior``
    selects the factor-score prior: "ddp" (covariate-dependent mixture)
    or "standard" (independent N(0,1), the comparison baseline).
    """

    j_max: int = 3
    l_max: int = 10
    n_iter: int = 3000
    burn_in: int = 1500
    thin: int = 1
    rng_seed: int = 0
    mu_m: float = 0.0
    sigma_m2: float = 10.0
    mu_beta: float = 0.0
    sigma_beta2: float = 10.0
    nu: float = 3.0
    a1: float = 2.1
    a2: float = 3.1
    gamma1: float = 1.0
    gamma2: float = 1.0
    sigma_alpha2: float = 4.0
    a_psi: float = 1.0
    b_psi: float = 1.0
    fixed_tau: bool = True
    credible_level: float = 0.90
    prior: str = "ddp"
    predictive_noise: bool = True
    freeze_atoms: bool = False
    param_stride: int = 1
    store_counterfactuals: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.j_max < 1:
            raise ValidationError("j_max must be >= 1")
        if self.l_max < 1:
            raise ValidationError("l_max must be >= 1")
        if not (0 < self.burn_in < self.n_iter):
            raise ValidationError("need 0 < burn_in < n_iter")
        if self.thin < 1 or self.param_stride < 1:
            raise ValidationError("thin and param_stride must be >= 1")
        for name in ("sigma_m2", "sigma_beta2", "sigma_alpha2", "nu", "a1", "a2",
                     "gamma1", "gamma2", "a_psi", "b_psi"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be > 0")
        if not (0.0 < self.credible_level < 1.0):
            raise ValidationError("credible_level must be in (0, 1)")
        if self.prior not in ("ddp", "standard"):
            raise ValidationError("prior must be 'ddp' or 'standard'")

    @property
    def n_kept(self) -> int:
        return (self.n_iter - self.burn_in) // self.thin

    @classmethod
    def from_json(cls, path) -> "ModelConfig":
        with Path(path).open() as fh:
            payload = json.load(fh)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(payload) - known
        if unknown:
            raise ValidationError(f"unknown config fields: {sorted(unknown)}")
        return cls(**payload)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class ArmState:
    """Latent state for one treatment arm.

    Shapes: mu (q,), B (q,p), Lambda (q,J), psi (q,) variances,
    scores/labels (n,J) over all units, eta/tau (L,J) mixture atoms,
    alpha (L-1,J,p+1) stick coefficients (the last stick takes the
    residual mass and has none), theta (q,J), delta/iota (J,).
    """

    mu: np.ndarray
    B: np.ndarray
    Lambda: np.ndarray
    psi: np.ndarray
    scores: np.ndarray
    labels: np.ndarray
    eta: np.ndarray
    tau: np.ndarray
    alpha: np.ndarray
    theta: np.ndarray
    delta: np.ndarray
    iota: np.ndarray

    @property
    def n_factors(self) -> int:
        return self.Lambda.shape[1]

    @property
    def n_clusters(self) -> int:
        return self.eta.shape[0]

    def validate(self) -> None:
        if not np.all(self.psi > 0):
            raise ValidationError("psi must be strictly positive")
        for name in ("theta", "delta", "tau"):
            if not np.all(getattr(self, name) > 0):
                raise ValidationError(f"{name} must be strictly positive")
        if not np.array_equal(self.iota, np.cumprod(self.delta)):
            raise ValidationError("iota must equal cumprod(delta) exactly")
        if self.labels.min() < 0 or self.labels.max() >= self.n_clusters:
            raise ValidationError("labels out of range")
        for name in ("mu", "B", "Lambda", "scores", "eta", "alpha"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValidationError(f"non-finite values in {name}")


def init_state(data: Dataset, cfg: ModelConfig, seed: int) -> tuple[ArmState, ArmState]:
    """Deterministic diffuse initialization of both arm states.

    mu/B/alpha zero, loadings N(0, 0.5^2), scores N(0,1), all labels in
    cluster 1, atoms at the prior mode (eta=0, tau=1), theta/delta/psi 1.
    """
    rng = np.random.default_rng(seed)
    n, q, p = data.n, data.q, data.p
    j, l = cfg.j_max, cfg.l_max
    states = []
    for _t in (0, 1):
        delta = np.ones(j)
        states.append(ArmState(
            mu=np.zeros(q),
            B=np.zeros((q, p)),
            Lambda=rng.normal(0.0, 0.5, size=(q, j)),
            psi=np.ones(q),
            scores=rng.standard_normal((n, j)),
            labels=np.zeros((n, j), dtype=np.int64),
            eta=np.zeros((l, j)),
            tau=np.ones((l, j)),
            alpha=np.zeros((max(l - 1, 0), j, p + 1)),
            theta=np.ones((q, j)),
            delta=delta,
            iota=np.cumprod(delta),
        ))
    for st in states:
        st.validate()
    return states[0], states[1]


@dataclass
class ChainOutput:
    """Kept posterior draws from one chain.

    ``sate`` has one row per kept sweep; parameter snapshots are stored
    every ``param_stride``-th kept sweep, keyed by arm. Imputed
    counterfactual outcomes are optional (memory-heavy).
    """

    sate: np.ndarray
    mu: dict[int, np.ndarray]
    B: dict[int, np.ndarray]
    Lambda: dict[int, np.ndarray]
    psi: dict[int, np.ndarray]
    rng_seed: int
    config: dict
    counterfactuals: np.ndarray | None = None
    outcome_names: list[str] = field(default_factory=list)

    @property
    def n_kept(self) -> int:
        return self.sate.shape[0]
