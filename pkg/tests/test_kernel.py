import numpy as np
import pytest

from tvvar.exceptions import EmptyKernelWindowError
from tvvar.kernel import (
    KernelConfig,
    epanechnikov,
    nw_weights,
    smoothed_cov,
)
from tvvar.linalg import spectral_norm
from tvvar.simulate import stationary_cov


def test_epanechnikov_values():
    assert epanechnikov(0.0) == pytest.approx(0.75)
    assert epanechnikov(1.0) == 0.0
    assert epanechnikov(-1.2) == 0.0
    assert epanechnikov(0.5) == pytest.approx(0.5625)


@pytest.mark.parametrize("kernel", ["epanechnikov", "flat"])
def test_kernel_integrates_to_one(kernel):
    cfg = KernelConfig(bandwidth=0.5, kernel=kernel, allow_test_kernels=True)
    v = np.linspace(-1.5, 1.5, 3_000_001)
    integral = np.trapezoid(cfg.evaluate(v), v)
    assert integral == pytest.approx(1.0, abs=1e-6)


def test_config_validation():
    with pytest.raises(ValueError):
        KernelConfig(bandwidth=1.0)
    with pytest.raises(ValueError):
        KernelConfig(bandwidth=0.3, kernel="gaussian")
    with pytest.raises(ValueError):
        # flat kernel is test-only
        KernelConfig(bandwidth=0.3, kernel="flat")


def test_weights_sum_to_one_across_window():
    cfg = KernelConfig(bandwidth=0.2)
    for t in np.linspace(0.2, 0.8, 25):
        w = nw_weights(t, 100, cfg)
        assert np.all(w >= 0)
        assert abs(w.sum() - 1.0) < 1e-12


def test_weights_single_support_point():
    # bandwidth below the grid spacing margin: only the on-grid point survives
    cfg = KernelConfig(bandwidth=0.09)
    w = nw_weights(0.5, 10, cfg)
    assert w[4] == pytest.approx(1.0)
    assert np.sum(w > 0) == 1


def test_weights_hand_computed_case():
    # t=0.5, n=4, b=0.3: K(0.8333)=0.2292, K(0)=0.75, m=4 outside
    cfg = KernelConfig(bandwidth=0.3)
    w = nw_weights(0.5, 4, cfg)
    k_off = 0.75 * (1.0 - (0.25 / 0.3) ** 2)
    denom = 2 * k_off + 0.75
    expected = np.array([k_off / denom, 0.75 / denom, k_off / denom, 0.0])
    assert np.allclose(w, expected, atol=1e-12)
    assert w[1] == pytest.approx(0.6206896551724138)


def test_weights_empty_window_raises():
    cfg = KernelConfig(bandwidth=0.01)
    with pytest.raises(EmptyKernelWindowError):
        nw_weights(0.455, 10, cfg)


def test_smoothed_cov_zero_series():
    cfg = KernelConfig(bandwidth=0.4)
    X = np.zeros((3, 20))
    for lag in (-1, 0, 1):
        assert np.all(smoothed_cov(X, 0.5, lag, cfg).matrix == 0.0)


def test_smoothed_cov_constant_series_lag0():
    cfg = KernelConfig(bandwidth=0.4)
    c = np.array([1.5, -2.0, 0.5])
    X = np.tile(c[:, None], (1, 30))
    S = smoothed_cov(X, 0.5, 0, cfg).matrix
    assert np.allclose(S, np.outer(c, c), atol=1e-12)


def test_smoothed_cov_uniform_weights_scalar():
    # flat kernel covering all of {1/3, 2/3, 1} gives weights 1/3 each
    cfg = KernelConfig(bandwidth=0.9, kernel="flat", allow_test_kernels=True)
    X = np.array([[1.0, 2.0, 3.0]])
    S = smoothed_cov(X, 2.0 / 3.0, 0, cfg).matrix
    assert S[0, 0] == pytest.approx(14.0 / 3.0)


def test_smoothed_cov_lag0_symmetric_psd():
    rng = np.random.default_rng(0)
    cfg = KernelConfig(bandwidth=0.3)
    X = rng.normal(size=(4, 60))
    S = smoothed_cov(X, 0.5, 0, cfg).matrix
    assert np.max(np.abs(S - S.T)) < 1e-10
    assert np.min(np.linalg.eigvalsh((S + S.T) / 2)) > -1e-10


def test_flat_kernel_equals_sample_second_moment():
    # the stationary-reduction oracle: uniform weights = plain average
    rng = np.random.default_rng(1)
    X = rng.normal(size=(3, 40))
    cfg = KernelConfig(bandwidth=0.999, kernel="flat", allow_test_kernels=True)
    S0 = smoothed_cov(X, 0.5, 0, cfg).matrix
    assert np.allclose(S0, X @ X.T / 40, atol=1e-12)
    S1 = smoothed_cov(X, 0.5, 1, cfg).matrix
    assert np.allclose(S1, X[:, :-1] @ X[:, 1:].T / 39, atol=1e-12)


def test_smoothed_cov_lag1_tracks_yule_walker():
    # stationary VAR(1): Sigma_1 = Sigma_0 A^T; smoke test at n=2000
    d, n = 3, 2000
    A = 0.5 * np.eye(d)
    A[0, 1] = 0.2
    assert spectral_norm(A) < 1
    cfg = KernelConfig(bandwidth=0.25)
    hits = 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        x = np.zeros(d)
        cols = []
        for _ in range(100):
            x = A @ x + rng.normal(size=d)
        for _ in range(n):
            x = A @ x + rng.normal(size=d)
            cols.append(x.copy())
        X = np.array(cols).T
        S0 = smoothed_cov(X, 0.5, 0, cfg).matrix
        S1 = smoothed_cov(X, 0.5, 1, cfg).matrix
        if np.max(np.abs(S1 - S0 @ A.T)) < 0.15:
            hits += 1
    assert hits >= 18


def test_true_cov_solves_yule_walker_exactly():
    A = np.array([[0.4, 0.1, 0.0], [0.0, 0.3, 0.2], [0.0, 0.0, 0.5]])
    S0 = stationary_cov(A, np.eye(3))
    # fixed point of S = A S A^T + Psi
    assert np.allclose(S0, A @ S0 @ A.T + np.eye(3), atol=1e-10)
