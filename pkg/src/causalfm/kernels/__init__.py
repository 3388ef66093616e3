"""Backend dispatch for the hot sampler kernels.

The numba backend (default) and the pure-numpy fallback implement the
same kernels with the same Generator draw-order contract. Select with
the ``CFM_BACKEND`` environment variable (``numba`` or ``numpy``) or at
runtime via :func:`set_backend` / :func:`use_backend`.
"""

from __future__ import annotations

import contextlib
import os
import warnings

from . import numpy_backend

_BACKENDS = {"numpy": numpy_backend}
_active_name = None
_active = None


def _resolve(name: str):
    if name in _BACKENDS:
        return _BACKENDS[name]
    if name == "numba":
        from . import numba_backend

        _BACKENDS["numba"] = numba_backend
        return numba_backend
    raise ValueError(f"unknown kernel backend {name!r} (expected 'numba' or 'numpy')")


def set_backend(name: str) -> None:
    """Activate a kernel backend by name."""
    global _active_name, _active
    _active = _resolve(name)
    _active_name = name


def get_backend() -> str:
    """Name of the active backend."""
    return _active_name


@contextlib.contextmanager
def use_backend(name: str):
    """Temporarily switch backend (test helper)."""
    prev = _active_name
    set_backend(name)
    try:
        yield
    finally:
        set_backend(prev)


def _init_from_env() -> None:
    name = os.environ.get("CFM_BACKEND", "numba").lower()
    try:
        set_backend(name)
    except ImportError:
        warnings.warn("numba unavailable; falling back to the numpy kernel backend")
        set_backend("numpy")


def tnorm_lower(rng, bounds):
    return _active.tnorm_lower(rng, bounds)


def allocate_labels(rng, scores, weights, eta, tau):
    return _active.allocate_labels(rng, scores, weights, eta, tau)


def draw_scores(rng, base, m_full, tau_lab):
    return _active.draw_scores(rng, base, m_full, tau_lab)


def predictive_scores(rng, weights, eta, tau):
    return _active.predictive_scores(rng, weights, eta, tau)


def augment_z(rng, labels, lin_pred):
    return _active.augment_z(rng, labels, lin_pred)


def warmup() -> None:
    """Trigger jit compilation of every kernel on tiny inputs.

    Useful before forking worker processes so children inherit compiled
    code. No-op cost on the numpy backend.
    """
    import numpy as np

    rng = np.random.default_rng(0)
    tnorm_lower(rng, np.array([0.0, 6.0]))
    allocate_labels(rng, np.zeros(2), np.full((2, 2), 0.5), np.zeros(2), np.ones(2))
    draw_scores(rng, np.eye(2), np.zeros((2, 2)), np.ones((2, 2)))
    predictive_scores(rng, np.full((2, 2), 0.5), np.zeros(2), np.ones(2))
    augment_z(rng, np.array([1, 0], dtype=np.int64), np.zeros((2, 1)))


_init_from_env()
