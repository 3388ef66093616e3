import numpy as np
import pytest

mpmath = pytest.importorskip("mpmath")

from causalfm.special import ndtr, ndtr_scalar, ndtri, ndtri_scalar, tnorm_lower_mean

mpmath.mp.dps = 40


def _phi_ref(x):
    return float(0.5 * mpmath.erfc(-x / mpmath.sqrt(2)))


GRID = np.concatenate([np.linspace(-8.0, 8.0, 81), [-37.0, -20.0, 20.0, 37.0]])


def test_ndtr_matches_high_precision_reference():
    for x in GRID:
        ref = _phi_ref(x)
        assert abs(ndtr_scalar(float(x)) - ref) < 1e-13
        assert abs(float(ndtr(x)) - ref) < 1e-13


def test_ndtri_accuracy_against_reference():
    # absolute accuracy at least 1e-12 across the usable range
    ps = np.concatenate([np.linspace(1e-6, 1 - 1e-6, 101),
                         [1e-12, 1e-9, 1 - 1e-9, 1 - 1e-12]])
    for p in ps:
        ref = float(mpmath.sqrt(2) * mpmath.erfinv(2 * mpmath.mpf(p) - 1))
        assert abs(ndtri_scalar(float(p)) - ref) < 1e-12 + 1e-9 * abs(ref)
        assert abs(float(ndtri(p)) - ref) < 1e-12 + 1e-9 * abs(ref)


def test_ndtri_round_trips_ndtr():
    for x in np.linspace(-8, 8, 161):
        assert ndtri_scalar(ndtr_scalar(float(x))) == pytest.approx(x, abs=1e-9)


def test_ndtri_edge_cases():
    assert ndtri_scalar(0.5) == 0.0
    assert np.isinf(ndtri_scalar(0.0)) and ndtri_scalar(0.0) < 0
    assert np.isinf(ndtri_scalar(1.0)) and ndtri_scalar(1.0) > 0


def test_truncated_mean_oracle_values():
    # phi(a)/(1-Phi(a)); at a=0 this is the half-normal mean sqrt(2/pi)
    assert tnorm_lower_mean(0.0) == pytest.approx(0.79788456080286536, abs=1e-14)
    for a in (2.0, 6.0, 12.0, 30.0):
        phi = float(mpmath.exp(-a * a / 2) / mpmath.sqrt(2 * mpmath.pi))
        ref = phi / float(0.5 * mpmath.erfc(a / mpmath.sqrt(2)))
        assert tnorm_lower_mean(a) == pytest.approx(ref, rel=1e-12)
