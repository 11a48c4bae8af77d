import numpy as np
import pytest

from tvvar.estimators import (
    EstimatorConfig,
    clime_from_moments,
    estimate_at,
    estimate_path,
    estimate_stationary_clime,
    estimate_tv_mle,
    estimate_tv_ridge,
    estimate_tvvar_clime,
    lasso_from_moments,
    stationary_moments,
)
from tvvar.exceptions import InfeasibleSubproblemError
from tvvar.kernel import KernelConfig, default_bandwidth, smoothed_cov
from tvvar.linalg import invert
from tvvar.simulate import interpolate_path, simulate_tvvar, stationary_cov


def sparse_var_matrix():
    A = np.array(
        [
            [0.5, 0.2, 0.0, 0.0],
            [0.0, 0.4, 0.0, 0.0],
            [0.0, 0.0, 0.3, -0.2],
            [0.1, 0.0, 0.0, 0.5],
        ]
    )
    return A


def exact_moments(A, Psi=None):
    d = A.shape[0]
    Psi = np.eye(d) if Psi is None else Psi
    S0 = stationary_cov(A, Psi)
    return S0, S0 @ A.T, A @ S0


def stationary_series(A, n, seed, Psi=None):
    d = A.shape[0]
    path = interpolate_path(A, A, n)
    object.__setattr__(path, "matrices", np.tile(A, (n, 1, 1)))
    return simulate_tvvar(path, np.eye(d) if Psi is None else Psi, seed=seed)


def test_exact_covariance_oracle_recovers_transition():
    A = sparse_var_matrix()
    S0, S1, Sm1 = exact_moments(A)
    A_hat = clime_from_moments(S0, S1, Sm1, tau=1e-8)
    assert np.max(np.abs(A_hat - A)) < 1e-6


def test_huge_tau_returns_zero_matrix():
    A = sparse_var_matrix()
    X = stationary_series(A, 500, seed=0)
    S0, S1, _ = stationary_moments(X)
    tau = np.max(np.abs(S1)) + 1.0
    A_hat = estimate_stationary_clime(X, tau)
    assert np.all(A_hat == 0.0)
    cfg = KernelConfig(bandwidth=0.3)
    A_tv = estimate_tvvar_clime(X, 0.5, tau + 1.0, cfg)
    assert np.all(A_tv == 0.0)


def test_monte_carlo_recovery_half_identity():
    # The l1 program shrinks each row to the boundary of its residual
    # box, so the entry-max error concentrates near tau |S0^-1|_l1
    # (= 0.15 here, Sigma0 = 4/3 I).  The Monte Carlo oracle therefore
    # checks the standard high-probability envelope 2 tau |S0^-1|_l1.
    d, n, tau = 4, 2000, 0.2
    A = 0.5 * np.eye(d)
    envelope = 2 * tau * 0.75  # Sigma0 = I/(1-0.25), column sums of inverse
    cfg = KernelConfig(bandwidth=default_bandwidth(n))
    errs_tv, errs_stat = [], []
    for seed in range(20):
        X = stationary_series(A, n, seed=seed)
        errs_tv.append(np.max(np.abs(estimate_tvvar_clime(X, 0.5, tau, cfg) - A)))
        errs_stat.append(np.max(np.abs(estimate_stationary_clime(X, tau) - A)))
    assert sum(e < envelope for e in errs_tv) >= 18
    assert sum(e < envelope for e in errs_stat) >= 18
    # informative band: bias ~0.15 plus sampling noise, not vacuous
    assert 0.10 < np.mean(errs_tv) < envelope
    assert 0.10 < np.mean(errs_stat) < envelope


def test_subproblem_order_independence():
    A = sparse_var_matrix()
    X = stationary_series(A, 300, seed=1)
    S0, S1, Sm1 = stationary_moments(X)
    A_hat = clime_from_moments(S0, S1, Sm1, tau=0.3)
    from tvvar.lp import solve_clime_subproblem

    rows = {}
    for j in reversed(range(4)):
        u, _ = solve_clime_subproblem(S0, S1[:, j], Sm1[j, :], 0.3)
        rows[j] = u
    reversed_order = np.vstack([rows[j] for j in range(4)])
    assert np.array_equal(A_hat, reversed_order)


def test_l1_norm_monotone_in_tau():
    A = sparse_var_matrix()
    X = stationary_series(A, 400, seed=2)
    a1 = estimate_stationary_clime(X, 0.1)
    a2 = estimate_stationary_clime(X, 0.3)
    assert np.abs(a2).sum() <= np.abs(a1).sum() + 1e-9


def test_residual_contract_on_returned_estimates():
    A = sparse_var_matrix()
    cfg = KernelConfig(bandwidth=0.25)
    for seed in range(5):
        X = stationary_series(A, 600, seed=seed)
        for tau in (0.15, 0.4):
            A_hat = estimate_tvvar_clime(X, 0.5, tau, cfg)
            S0 = smoothed_cov(X, 0.5, 0, cfg).matrix
            S1 = smoothed_cov(X, 0.5, 1, cfg).matrix
            Sm1 = smoothed_cov(X, 0.5, -1, cfg).matrix
            assert np.max(np.abs(S1 - S0 @ A_hat.T)) <= tau + 1e-8
            assert np.max(np.abs(Sm1 - A_hat @ S0)) <= tau + 1e-8


def test_infeasible_subproblem_carries_location():
    rng = np.random.default_rng(3)
    S0 = np.eye(3)
    S1 = rng.normal(size=(3, 3))
    Sm1 = S1.T + 1.0  # large asymmetry makes tiny tau infeasible
    with pytest.raises(InfeasibleSubproblemError) as exc:
        clime_from_moments(S0, S1, Sm1, tau=1e-6, t=0.4)
    assert exc.value.row == 0
    assert exc.value.t == 0.4


def test_lasso_zero_penalty_orthogonal_design():
    rng = np.random.default_rng(4)
    R = rng.normal(size=(3, 3))
    B, info = lasso_from_moments(np.eye(3), R, lam=0.0, tol=1e-12)
    assert info["converged"]
    assert np.max(np.abs(B - R)) < 1e-8


def test_lasso_kill_condition():
    rng = np.random.default_rng(5)
    R = rng.normal(size=(4, 4))
    lam = 2.0 * np.max(np.abs(R)) + 1e-6
    B, _ = lasso_from_moments(np.eye(4), R, lam=lam)
    assert np.all(B == 0.0)


def coordinate_descent_lasso(G, r, lam, iters=20000, tol=1e-13):
    # independent oracle: cyclic coordinate descent on
    # beta^T G beta - 2 beta^T r + lam |beta|_1
    d = G.shape[0]
    beta = np.zeros(d)
    for _ in range(iters):
        prev = beta.copy()
        for k in range(d):
            resid = r[k] - G[k] @ beta + G[k, k] * beta[k]
            z = resid / G[k, k]
            thresh = lam / (2.0 * G[k, k])
            beta[k] = np.sign(z) * max(abs(z) - thresh, 0.0)
        if np.max(np.abs(beta - prev)) < tol:
            break
    return beta


def test_lasso_agrees_with_coordinate_descent_oracle():
    rng = np.random.default_rng(6)
    for _ in range(5):
        Z = rng.normal(size=(3, 12))
        G = Z @ Z.T / 12 + 0.5 * np.eye(3)
        R = rng.normal(size=(3, 3))
        lam = 0.2
        B, _ = lasso_from_moments(G, R, lam=lam, max_iters=20000, tol=1e-12)
        for j in range(3):
            oracle = coordinate_descent_lasso(G, R[j], lam)
            assert np.max(np.abs(B[j] - oracle)) < 1e-4


def test_fista_objective_descends_and_beats_zero():
    rng = np.random.default_rng(7)
    Z = rng.normal(size=(5, 30))
    G = Z @ Z.T / 30
    R = rng.normal(size=(5, 5))
    B, info = lasso_from_moments(G, R, lam=0.1, track_objective=True, tol=1e-12)
    trace = info["objective_trace"]
    diffs = np.diff(trace, axis=0)
    assert np.all(diffs <= 1e-10)  # monotone after restarts
    assert np.all(trace[-1] <= trace[0] + 1e-12)  # never worse than beta = 0


def test_ridge_formula_and_shrinkage():
    A = sparse_var_matrix()
    X = stationary_series(A, 500, seed=8)
    cfg = KernelConfig(bandwidth=0.3)
    S0 = smoothed_cov(X, 0.5, 0, cfg).matrix
    S1 = smoothed_cov(X, 0.5, 1, cfg).matrix
    ridge = estimate_tv_ridge(X, 0.5, 1.0, cfg)
    manual = (invert(S0 + np.eye(4)) @ S1).T
    assert np.allclose(ridge, manual, atol=1e-12)
    small = estimate_tv_ridge(X, 0.5, 1.0, cfg)
    large = estimate_tv_ridge(X, 0.5, 100.0, cfg)
    assert np.max(np.abs(large)) < np.max(np.abs(small))
    assert np.allclose(large, S1.T / 100.0, atol=np.max(np.abs(S1)) * 0.05)
    # ridge estimates are dense: no exact zeros on generic data
    assert np.all(estimate_tv_ridge(X, 0.5, 0.5, cfg) != 0.0)


def test_mle_is_ridge_limit():
    A = sparse_var_matrix()
    X = stationary_series(A, 800, seed=9)
    cfg = KernelConfig(bandwidth=0.3)
    mle = estimate_tv_mle(X, 0.5, cfg)
    ridge = estimate_tv_ridge(X, 0.5, 1e-8, cfg)
    assert np.max(np.abs(mle - ridge)) < 1e-5


def test_mle_exact_moment_orientation():
    # with exact moments the weighted LS identity inverts Yule-Walker
    A = sparse_var_matrix()
    S0, S1, _ = exact_moments(A)
    assert np.max(np.abs((invert(S0) @ S1).T - A)) < 1e-10


def test_estimate_at_dispatch_and_config_validation():
    cfg = KernelConfig(bandwidth=0.3)
    with pytest.raises(ValueError):
        EstimatorConfig(method="unknown", kernel=cfg)
    with pytest.raises(ValueError):
        EstimatorConfig(method="tv_ridge", kernel=cfg, regularizer=-1.0)
    A = sparse_var_matrix()
    X = stationary_series(A, 300, seed=10)
    for method, reg in [
        ("tvvar_clime", 0.3),
        ("stationary_clime", 0.3),
        ("tv_lasso", 0.1),
        ("tv_ridge", 0.5),
        ("tv_mle", 0.0),
    ]:
        config = EstimatorConfig(method=method, kernel=cfg, regularizer=reg)
        out = estimate_at(X, 0.5, config)
        assert out.shape == (4, 4)
        assert np.all(np.isfinite(out))


def test_estimate_path_collects_and_raises():
    A = sparse_var_matrix()
    X = stationary_series(A, 300, seed=11)
    cfg = KernelConfig(bandwidth=0.3)
    config = EstimatorConfig(method="tvvar_clime", kernel=cfg, regularizer=0.4)
    times = np.array([0.35, 0.5, 0.65])
    path = estimate_path(X, times, config)
    assert path.matrices.shape == (3, 4, 4)
    assert path.failures == ()
    with pytest.raises(ValueError):
        estimate_path(X, [0.5, 0.4], config)
    # tau so small every point is infeasible on noisy data
    bad = EstimatorConfig(method="tvvar_clime", kernel=cfg, regularizer=1e-12)
    with pytest.raises(InfeasibleSubproblemError):
        estimate_path(X, times, bad)


def test_stationary_path_is_constant():
    A = sparse_var_matrix()
    X = stationary_series(A, 300, seed=12)
    config = EstimatorConfig(
        method="stationary_clime", kernel=KernelConfig(bandwidth=0.3), regularizer=0.3
    )
    path = estimate_path(X, np.array([0.4, 0.6]), config)
    assert np.array_equal(path.matrices[0], path.matrices[1])
