import numpy as np
import pytest

from causalfm import kernels
from causalfm.kernels import numba_backend, numpy_backend, use_backend
from causalfm.special import tnorm_lower_mean

BACKENDS = (numba_backend, numpy_backend)


def _pair(seed):
    return np.random.default_rng(seed), np.random.default_rng(seed)


def test_backends_share_the_random_stream_for_mild_truncations():
    bounds = np.linspace(-4.0, 4.9, 57)
    r1, r2 = _pair(11)
    a = numba_backend.tnorm_lower(r1, bounds)
    b = numpy_backend.tnorm_lower(r2, bounds)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)
    # identical stream positions afterwards
    assert r1.random() == r2.random()


def test_backends_agree_with_tail_rejections_interleaved():
    bounds = np.array([0.5, 7.0, -2.0, 9.0, 4.4, 6.1])
    r1, r2 = _pair(12)
    a = numba_backend.tnorm_lower(r1, bounds)
    b = numpy_backend.tnorm_lower(r2, bounds)
    np.testing.assert_allclose(a, b, rtol=1e-12)
    assert np.all(a >= bounds)
    assert r1.random() == r2.random()


@pytest.mark.parametrize("mod", BACKENDS, ids=("numba", "numpy"))
def test_truncated_normal_moments(mod):
    rng = np.random.default_rng(100)
    for a in (0.0, 1.5, 5.5, 8.0):
        n = 40_000
        draws = mod.tnorm_lower(rng, np.full(n, a))
        ref = float(tnorm_lower_mean(a))
        se = draws.std(ddof=1) / np.sqrt(n)
        assert abs(draws.mean() - ref) < 3 * se
        assert np.all(draws > a)


@pytest.mark.parametrize("mod", BACKENDS, ids=("numba", "numpy"))
def test_truncated_normal_extreme_tail_is_finite(mod):
    rng = np.random.default_rng(101)
    draws = mod.tnorm_lower(rng, np.array([20.0, 30.0, 40.0]))
    assert np.all(np.isfinite(draws))
    assert np.all(draws >= np.array([20.0, 30.0, 40.0]))


def test_allocation_labels_identical_across_backends():
    rng0 = np.random.default_rng(42)
    scores = rng0.standard_normal(500)
    eta = np.array([-2.0, 0.0, 2.0])
    tau = np.array([1.0, 1.0, 1.0])
    w = rng0.random((500, 3)) + 0.05
    w /= w.sum(axis=1, keepdims=True)
    r1, r2 = _pair(13)
    lab_a, bad_a = numba_backend.allocate_labels(r1, scores, w, eta, tau)
    lab_b, bad_b = numpy_backend.allocate_labels(r2, scores, w, eta, tau)
    assert bad_a == bad_b == -1
    np.testing.assert_array_equal(lab_a, lab_b)


@pytest.mark.parametrize("mod", BACKENDS, ids=("numba", "numpy"))
def test_allocation_flags_degenerate_rows(mod):
    rng = np.random.default_rng(0)
    scores = np.array([0.0, np.nan, 0.0])
    w = np.full((3, 2), 0.5)
    _, bad = mod.allocate_labels(rng, scores, w, np.zeros(2), np.ones(2))
    assert bad == 1


def test_single_cluster_allocation_consumes_no_rng():
    r1, r2 = _pair(14)
    labels, bad = numba_backend.allocate_labels(
        r1, np.zeros(9), np.ones((9, 1)), np.zeros(1), np.ones(1))
    assert bad == -1 and np.all(labels == 0)
    assert r1.random() == r2.random()


def test_draw_scores_matches_across_backends():
    rng0 = np.random.default_rng(7)
    n, k = 100, 3
    base = np.eye(k) + 0.3
    m_full = rng0.standard_normal((n, k))
    tau_lab = rng0.uniform(0.5, 2.0, size=(n, k))
    r1, r2 = _pair(15)
    a = numba_backend.draw_scores(r1, base, m_full, tau_lab)
    b = numpy_backend.draw_scores(r2, base, m_full, tau_lab)
    np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-12)


def test_predictive_scores_match_across_backends():
    w = np.array([[0.2, 0.3, 0.5]]).repeat(400, axis=0)
    eta = np.array([-3.0, 0.0, 3.0])
    tau = np.array([1.0, 4.0, 1.0])
    r1, r2 = _pair(16)
    la, sa = numba_backend.predictive_scores(r1, w, eta, tau)
    lb, sb = numpy_backend.predictive_scores(r2, w, eta, tau)
    np.testing.assert_array_equal(la, lb)
    np.testing.assert_allclose(sa, sb, rtol=1e-12)


def test_augment_z_matches_across_backends():
    rng0 = np.random.default_rng(9)
    n, sticks = 300, 4
    labels = rng0.integers(0, sticks + 1, size=n)
    lin = rng0.standard_normal((n, sticks)) * 3.0
    r1, r2 = _pair(17)
    a = numba_backend.augment_z(r1, labels, lin)
    b = numpy_backend.augment_z(r2, labels, lin)
    np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-12, equal_nan=True)


def test_dispatch_switches_backends():
    with use_backend("numpy"):
        assert kernels.get_backend() == "numpy"
    with use_backend("numba"):
        assert kernels.get_backend() == "numba"
