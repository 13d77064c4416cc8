import math

import numpy as np
import pytest

from shrinkcov.covariance import CovMatrix, condition_number, eigenvalues, sample_covariance
from shrinkcov.errors import ConfigurationError
from shrinkcov.longrun import KernelSpec, LongRunVariance, sigma_tr_sq, univariate_longrun_variance
from shrinkcov.panel import ReturnsPanel
from shrinkcov.shrinkage import (DegenerateWidthWarning, diag_estimator_covariance,
                                 diag_marginal_intervals, projection_variance_bounds,
                                 shrink_to_diagonal, shrink_to_identity, shrinkage_bounds,
                                 trace_confidence_interval)
from shrinkcov.simulate import SimConfig, simulate_ar1_panel

from conftest import random_spd


def fake_lrv(sigma_sq, n, d=1, clamped=False):
    return LongRunVariance(sigma_sq, sigma_sq, np.zeros((d, d)), KernelSpec(), n, clamped)


def cov_of(a, n=50):
    return CovMatrix(np.asarray(a, dtype=float), n)


def test_identity_weights_zero_and_one(rng):
    a = random_spd(rng, 4)[0]
    np.testing.assert_array_equal(shrink_to_identity(cov_of(a), 0.0).matrix, cov_of(a).values)
    full = shrink_to_identity(cov_of(a), 1.0).matrix
    np.testing.assert_allclose(full, np.trace(a) / 4 * np.eye(4), atol=1e-14)


def test_identity_example():
    est = shrink_to_identity(cov_of(np.diag([4.0, 1.0])), 0.2)
    np.testing.assert_allclose(est.matrix, np.diag([3.7, 1.3]), atol=1e-15)
    assert condition_number(est.matrix) == pytest.approx(3.7 / 1.3)
    assert condition_number(est.matrix) == pytest.approx(2.846, abs=5e-4)


def test_identity_reconstruction(rng):
    a = random_spd(rng, 6)[0]
    est = shrink_to_identity(cov_of(a), 0.35)
    rebuilt = 0.65 * a + 0.35 * (np.trace(a) / 6) * np.eye(6)
    np.testing.assert_allclose(est.matrix, rebuilt, atol=1e-12)


def test_weight_domain():
    with pytest.raises(ConfigurationError):
        shrink_to_identity(cov_of(np.eye(2)), 1.1)
    with pytest.raises(ConfigurationError):
        shrink_to_diagonal(cov_of(np.eye(2)), -0.1)


def test_diagonal_target():
    a = np.array([[1.0, 0.5], [0.5, 2.0]])
    np.testing.assert_allclose(shrink_to_diagonal(cov_of(a), 0.2).matrix,
                               [[1.0, 0.4], [0.4, 2.0]], atol=1e-15)
    np.testing.assert_array_equal(shrink_to_diagonal(cov_of(a), 1.0).matrix, np.diag([1.0, 2.0]))


def test_diagonal_trace_invariant(rng):
    a = random_spd(rng, 5)[0]
    for w in (0.0, 0.3, 1.0):
        est = shrink_to_diagonal(cov_of(a), w)
        np.testing.assert_array_equal(np.diag(est.matrix), np.diag(cov_of(a).values))


def test_eigenvectors_preserved_and_eigenvalues_mapped(rng):
    a = random_spd(rng, 6)[0]
    W = 0.3
    est = shrink_to_identity(cov_of(a), W)
    lam, vec = np.linalg.eigh(a)
    mapped = (1 - W) * lam + W * np.trace(a) / 6
    np.testing.assert_allclose(est.matrix @ vec, vec * mapped, atol=1e-9)


def test_condition_number_non_increase(rng):
    for k in range(100):
        if k % 2:
            # singular: d > n
            cov = sample_covariance(ReturnsPanel(rng.standard_normal((5, 12))))
        else:
            cov = sample_covariance(ReturnsPanel(rng.standard_normal((40, 6))))
        W = rng.uniform(0.01, 1.0)
        shrunk = condition_number(shrink_to_identity(cov, W).matrix)
        assert math.isfinite(shrunk)
        assert shrunk <= condition_number(cov) * (1 + 1e-12)


def test_positive_definite_when_singular(rng):
    cov = sample_covariance(ReturnsPanel(rng.standard_normal((10, 30))))
    assert eigenvalues(shrink_to_identity(cov, 0.2).matrix)[-1] > 0


def test_ci_zero_sigma():
    ci = trace_confidence_interval(cov_of(np.eye(3), 100), fake_lrv(0.0, 100), 0.1)
    assert ci.half_width == 0.0 and ci.lower == ci.upper == 1.0


def test_ci_half_width_value():
    ci = trace_confidence_interval(cov_of(np.eye(2), 100), fake_lrv(1.0, 100), 0.10)
    assert ci.half_width == pytest.approx(1.6448536269514722 / 10, abs=1e-12)


def test_ci_sqrt_n_scaling():
    a = trace_confidence_interval(cov_of(np.eye(2), 100), fake_lrv(2.0, 100), 0.1)
    b = trace_confidence_interval(cov_of(np.eye(2), 200), fake_lrv(2.0, 200), 0.1)
    assert a.half_width / b.half_width == pytest.approx(math.sqrt(2), rel=1e-14)


def test_ci_nesting(make_panel):
    p = make_panel(100, 4)
    cov, lrv = sample_covariance(p), sigma_tr_sq(p)
    wide = trace_confidence_interval(cov, lrv, 0.01)
    narrow = trace_confidence_interval(cov, lrv, 0.10)
    assert wide.lower <= narrow.lower <= narrow.upper <= wide.upper


def test_ci_clamped_warns():
    p = ReturnsPanel(np.ones((10, 2)))
    with pytest.warns(DegenerateWidthWarning):
        ci = trace_confidence_interval(sample_covariance(p), sigma_tr_sq(p), 0.1)
    assert ci.degenerate


def test_bounds_w_zero(make_panel):
    p = make_panel(60, 5)
    cov = sample_covariance(p)
    b = shrinkage_bounds(shrink_to_identity(cov, 0.0), sigma_tr_sq(p), 0.05)
    np.testing.assert_array_equal(b.lower, cov.values)
    np.testing.assert_array_equal(b.upper, cov.values)


def test_bounds_eigen_shift(make_panel):
    p = make_panel(40, 8)
    est = shrink_to_identity(sample_covariance(p), 0.2)
    b = shrinkage_bounds(est, sigma_tr_sq(p), 0.05)
    np.testing.assert_allclose(eigenvalues(b.upper) - eigenvalues(b.lower), 2 * b.shift,
                               atol=1e-10)
    off = ~np.eye(8, dtype=bool)
    assert np.array_equal(b.lower[off], est.matrix[off])


def test_bounds_ordering_d32():
    p = simulate_ar1_panel(SimConfig(n=50, d=32, seed=4))
    est = shrink_to_identity(sample_covariance(p), 0.2)
    b = shrinkage_bounds(est, sigma_tr_sq(p), 0.01)
    lam = eigenvalues(est.matrix)
    assert np.all(eigenvalues(b.lower) <= lam) and np.all(lam <= eigenvalues(b.upper))


def test_bounds_reject_diagonal_target(make_panel):
    p = make_panel(30, 3)
    with pytest.raises(ConfigurationError):
        shrinkage_bounds(shrink_to_diagonal(sample_covariance(p), 0.2), sigma_tr_sq(p))


def test_projection_bounds_unit_vector(make_panel):
    p = make_panel(50, 4)
    est = shrink_to_identity(sample_covariance(p), 0.2)
    lrv = sigma_tr_sq(p)
    pb = projection_variance_bounds(est, np.eye(4)[0], lrv, 0.975)
    assert pb.point == est.matrix[0, 0]
    delta = 1.959963984540054 * math.sqrt(lrv.sigma_tr_sq / 50)
    assert pb.upper - pb.point == pytest.approx(delta, rel=1e-12)
    assert pb.point - pb.lower == pytest.approx(delta, rel=1e-12)


def test_projection_bounds_homogeneous(make_panel, rng):
    p = make_panel(50, 4)
    est = shrink_to_identity(sample_covariance(p), 0.2)
    lrv = sigma_tr_sq(p)
    w = rng.standard_normal(4)
    a = projection_variance_bounds(est, w, lrv, 0.95)
    b = projection_variance_bounds(est, 3.0 * w, lrv, 0.95)
    np.testing.assert_allclose(b, 9.0 * np.array(a), rtol=1e-12)
    assert a.lower <= a.point <= a.upper


def test_projection_point_against_loop(make_panel, rng):
    p = make_panel(30, 5)
    est = shrink_to_identity(sample_covariance(p), 0.2)
    w = rng.standard_normal(5)
    s = est.matrix
    loop = sum(w[i] * s[i, j] * w[j] for i in range(5) for j in range(5))
    assert projection_variance_bounds(est, w, sigma_tr_sq(p), 0.9).point == pytest.approx(loop, rel=1e-12)


def test_projection_dimension_mismatch(make_panel):
    p = make_panel(30, 3)
    with pytest.raises(ConfigurationError):
        projection_variance_bounds(shrink_to_identity(sample_covariance(p), 0.2),
                                   np.ones(4), sigma_tr_sq(p), 0.9)


def test_diag_covariance_d1(make_panel):
    p = make_panel(40, 1)
    k = KernelSpec("truncated", 3)
    c = diag_estimator_covariance(p, k)
    assert c.shape == (1, 1)
    assert c[0, 0] == pytest.approx(univariate_longrun_variance(p, 0, k), rel=1e-13)


def test_diag_covariance_diagonal_identity(make_panel):
    p = make_panel(40, 5)
    k = KernelSpec("truncated", 3)
    c = diag_estimator_covariance(p, k)
    for v in range(5):
        assert c[v, v] * 5 == pytest.approx(univariate_longrun_variance(p, v, k), rel=1e-12)


def test_diag_covariance_symmetrized_psd():
    p = simulate_ar1_panel(SimConfig(n=400, d=6, seed=8, shared_innovations=False))
    c = diag_estimator_covariance(p, KernelSpec("bartlett", 5))
    sym = 0.5 * (c + c.T)
    lam = np.linalg.eigvalsh(sym)
    assert lam[0] >= -1e-8 * lam[-1]
    proj = diag_estimator_covariance(p, KernelSpec("bartlett", 5), psd=True)
    assert np.linalg.eigvalsh(proj)[0] >= -1e-12


def test_marginal_intervals_constant_and_zero():
    y = np.column_stack([np.zeros(20), np.full(20, 2.0)])
    ivs = diag_marginal_intervals(ReturnsPanel(y), KernelSpec("truncated", 2))
    assert ivs[0].center == 0.0 and ivs[0].half_width == 0.0
    assert ivs[1].center == 4.0 and ivs[1].half_width == 0.0


def test_marginal_interval_matches_trace_interval_at_d1(make_panel):
    p = make_panel(80, 1)
    k = KernelSpec("truncated", 3)
    iv = diag_marginal_intervals(p, k, 0.1)[0]
    ci = trace_confidence_interval(sample_covariance(p), sigma_tr_sq(p, k), 0.1)
    assert iv.center == pytest.approx(ci.center, rel=1e-14)
    assert iv.half_width == pytest.approx(ci.half_width, rel=1e-12)


def test_marginal_negative_beta_flagged():
    # alternating squares give negative lag-1 autocovariance large enough to dominate
    y = np.tile([[0.0], [2.0]], (10, 1))
    iv = diag_marginal_intervals(ReturnsPanel(y), KernelSpec("truncated", 1))[0]
    assert iv.clamped and iv.half_width == 0.0


@pytest.mark.slow
def test_marginal_interval_coverage_ar1():
    cfg = SimConfig(n=10_000, d=1, rho=[0.5], seed=31)
    hits = 0
    for r in range(200):
        iv = diag_marginal_intervals(simulate_ar1_panel(cfg, key=(r,)), None, 0.1)[0]
        hits += iv.lower <= 4 / 3 <= iv.upper
    assert hits / 200 >= 0.85
