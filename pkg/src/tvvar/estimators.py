"""The five transition-matrix estimators compared in the benchmark.

All estimators recover A(t) from (smoothed or pooled) lag-zero and
lag-one second moments through the Yule-Walker relation
Sigma_1 = Sigma_0 A^T:

* ``tvvar_clime``     -- per-row l1 minimization under two-sided
                         element-wise residual constraints, solved as
                         d independent LPs (the main method);
* ``stationary_clime`` -- the same program on unweighted sample
                         moments, one matrix for the whole series;
* ``tv_lasso``        -- kernel-weighted least squares with an l1
                         penalty, solved row-wise by FISTA;
* ``tv_ridge``        -- closed-form l2-shrunk weighted least squares;
* ``tv_mle``          -- unregularized weighted least squares (the
                         Gaussian MLE of the transition matrix).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from tvvar.exceptions import EmptyKernelWindowError, InfeasibleSubproblemError
from tvvar.kernel import KernelConfig, nw_weights, smoothed_cov, validate_series
from tvvar.linalg import invert, spectral_norm
from tvvar.lp import solve_clime_subproblem
from tvvar.utils import parallel_map

logger = logging.getLogger(__name__)

METHODS = ("tvvar_clime", "stationary_clime", "tv_lasso", "tv_ridge", "tv_mle")


@dataclass(frozen=True)
class EstimatorConfig:
    method: str
    kernel: KernelConfig
    regularizer: float = 0.0
    fista_max_iters: int = 2000
    fista_tol: float = 1e-8

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.regularizer < 0:
            raise ValueError("regularizer must be nonnegative")
        if self.fista_max_iters < 1 or self.fista_tol <= 0:
            raise ValueError("invalid FISTA settings")


@dataclass(frozen=True)
class EstimatePath:
    """Estimated transition matrices on an increasing time grid."""

    times: np.ndarray
    matrices: np.ndarray  # (len(times), d, d)
    method: str
    params: dict = field(default_factory=dict)
    failures: tuple = ()  # (t, message) pairs for skipped time points


def clime_from_moments(S0, S1, Sm1, tau: float, t: float | None = None) -> np.ndarray:
    """Assemble A-hat from lag moments by solving the d row sub-problems.

    Row j of the estimate solves

        min |u|_1  s.t.  |[S1]_{*j} - S0 u|_inf <= tau,
                         |[Sm1]_{j*} - u^T S0|_inf <= tau.

    The sub-problems are independent; solving them in any order gives
    the same matrix.  Raises InfeasibleSubproblemError (carrying the row
    and time) when tau is too small for the sampled moments.
    """
    S0 = np.asarray(S0, dtype=np.float64)
    S1 = np.asarray(S1, dtype=np.float64)
    Sm1 = np.asarray(Sm1, dtype=np.float64)
    d = S0.shape[0]
    A = np.empty((d, d))
    for j in range(d):
        u, res = solve_clime_subproblem(S0, S1[:, j], Sm1[j, :], tau)
        if u is None:
            raise InfeasibleSubproblemError(j, t, f"row {j} {res.status} at tau={tau}")
        A[j, :] = u
    return A


def _smoothed_moments(X, t, cfg):
    S0 = smoothed_cov(X, t, 0, cfg).matrix
    S1 = smoothed_cov(X, t, 1, cfg).matrix
    Sm1 = smoothed_cov(X, t, -1, cfg).matrix
    return S0, S1, Sm1


def estimate_tvvar_clime(X, t: float, tau: float, cfg: KernelConfig) -> np.ndarray:
    """Time-varying l1-constrained estimate of A(t).

    Both constraint groups use the smoothed moments at the single time
    t; the one-grid-step offset between the lagged covariances is far
    inside the bandwidth and is not resolved separately.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    S0, S1, Sm1 = _smoothed_moments(X, t, cfg)
    return clime_from_moments(S0, S1, Sm1, tau, t=t)


def stationary_moments(X):
    """Unweighted lag moments over matched index windows.

    All three moments average the same n-1 consecutive pairs, so the
    lag minus-one moment is exactly the transpose of the lag-one moment
    and the lag-zero moment is symmetric.
    """
    X = validate_series(X)
    n = X.shape[1]
    if n < 2:
        raise ValueError("series needs at least two observations")
    lagged = X[:, : n - 1]
    lead = X[:, 1:]
    S0 = lagged @ lagged.T / (n - 1)
    S1 = lagged @ lead.T / (n - 1)
    return S0, S1, S1.T.copy()


def estimate_stationary_clime(X, tau: float) -> np.ndarray:
    """Single-matrix l1-constrained estimate ignoring time variation."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    S0, S1, Sm1 = stationary_moments(X)
    return clime_from_moments(S0, S1, Sm1, tau)


def soft_threshold(Z, thresh: float) -> np.ndarray:
    return np.sign(Z) * np.maximum(np.abs(Z) - thresh, 0.0)


def lasso_from_moments(
    G,
    R,
    lam: float,
    max_iters: int = 2000,
    tol: float = 1e-8,
    track_objective: bool = False,
):
    """Row-wise l1-penalized weighted least squares by FISTA.

    Minimizes, for each row j of B,

        beta^T G beta - 2 beta^T R_j + lam |beta|_1

    with fixed step 1/L, L = 2 rho(G), Nesterov momentum and an
    adaptive per-row restart whenever the objective increases.  Returns
    (B, info); info reports convergence, iterations and (optionally)
    the per-iteration objective trace.
    """
    G = np.asarray(G, dtype=np.float64)
    R = np.asarray(R, dtype=np.float64)
    d = R.shape[0]
    L = 2.0 * spectral_norm(G)
    if L <= 0.0:
        B = np.zeros_like(R)
        return B, {"converged": True, "iterations": 0}

    def objective(B):
        smooth = np.einsum("jk,kl,jl->j", B, G, B) - 2.0 * np.einsum("jk,jk->j", B, R)
        return smooth + lam * np.abs(B).sum(axis=1)

    B = np.zeros_like(R)
    Y = B.copy()
    tk = np.ones(d)
    obj = objective(B)
    trace = [obj.copy()] if track_objective else None
    converged = False
    change = np.inf
    for it in range(1, max_iters + 1):
        grad = 2.0 * (Y @ G - R)
        B_new = soft_threshold(Y - grad / L, lam / L)
        obj_new = objective(B_new)
        worse = obj_new > obj + 1e-15
        if np.any(worse):
            # restart momentum on rows whose objective went up
            tk[worse] = 1.0
            Y[worse] = B[worse]
            grad_w = 2.0 * (Y[worse] @ G - R[worse])
            B_new[worse] = soft_threshold(Y[worse] - grad_w / L, lam / L)
            obj_new[worse] = objective(B_new)[worse]
        tk_new = (1.0 + np.sqrt(1.0 + 4.0 * tk**2)) / 2.0
        Y = B_new + ((tk - 1.0) / tk_new)[:, None] * (B_new - B)
        change = float(np.max(np.abs(B_new - B)))
        B, obj, tk = B_new, obj_new, tk_new
        if track_objective:
            trace.append(obj.copy())
        if change < tol:
            converged = True
            break
    if not converged:
        logger.warning(
            "FISTA stopped at %d iterations with residual %.3e", max_iters, change
        )
    info = {"converged": converged, "iterations": it, "residual": change}
    if track_objective:
        info["objective_trace"] = np.array(trace)
    return B, info


def _lasso_design(X, t, cfg):
    # regression pairs x_{m-1} -> x_m with the kernel weight of the
    # target index, renormalized over the valid pairs
    X = validate_series(X)
    n = X.shape[1]
    w = nw_weights(t, n, cfg)[1:]
    total = w.sum()
    if total <= 0:
        raise EmptyKernelWindowError(f"no regression pair carries weight at t={t}")
    w = w / total
    lagged = X[:, :-1]
    lead = X[:, 1:]
    G = (lagged * w) @ lagged.T
    R = (lead * w) @ lagged.T  # row j: sum_m w_m X[j,m] x_{m-1}
    return G, R


def estimate_tv_lasso(
    X,
    t: float,
    lam: float,
    cfg: KernelConfig,
    max_iters: int = 2000,
    tol: float = 1e-8,
) -> np.ndarray:
    """Kernel-weighted lasso estimate of A(t) via FISTA."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    G, R = _lasso_design(X, t, cfg)
    B, _ = lasso_from_moments(G, R, lam, max_iters=max_iters, tol=tol)
    return B


def estimate_tv_ridge(X, t: float, lam: float, cfg: KernelConfig) -> np.ndarray:
    """Closed-form ridge estimate: A^T = (S0 + lam I)^(-1) S1."""
    if lam <= 0:
        raise ValueError("ridge lambda must be positive")
    S0 = smoothed_cov(X, t, 0, cfg).matrix
    S1 = smoothed_cov(X, t, 1, cfg).matrix
    d = S0.shape[0]
    return (invert(S0 + lam * np.eye(d)) @ S1).T


def estimate_tv_mle(X, t: float, cfg: KernelConfig) -> np.ndarray:
    """Unregularized weighted least squares: A^T = S0^(-1) S1."""
    S0 = smoothed_cov(X, t, 0, cfg).matrix
    S1 = smoothed_cov(X, t, 1, cfg).matrix
    return (invert(S0) @ S1).T


def estimate_at(X, t: float, config: EstimatorConfig) -> np.ndarray:
    """Dispatch a single-time estimate for the configured method."""
    m = config.method
    if m == "tvvar_clime":
        return estimate_tvvar_clime(X, t, config.regularizer, config.kernel)
    if m == "stationary_clime":
        return estimate_stationary_clime(X, config.regularizer)
    if m == "tv_lasso":
        return estimate_tv_lasso(
            X, t, config.regularizer, config.kernel,
            max_iters=config.fista_max_iters, tol=config.fista_tol,
        )
    if m == "tv_ridge":
        return estimate_tv_ridge(X, t, config.regularizer, config.kernel)
    return estimate_tv_mle(X, t, config.kernel)


def _estimate_one(args):
    X, t, config = args
    try:
        return t, estimate_at(X, t, config), None
    except Exception as exc:  # collected per point, re-raised if all fail
        return t, None, f"{type(exc).__name__}: {exc}"


def estimate_path(X, times, config: EstimatorConfig, workers: int = 1) -> EstimatePath:
    """Estimate A(t) over an increasing grid of interior times.

    Per-point failures (e.g. infeasible sub-problems at small tau) are
    collected on the result; the call only raises when every single
    time point fails.
    """
    X = validate_series(X)
    times = np.asarray(times, dtype=np.float64)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a nonempty 1-D grid")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")

    if config.method == "stationary_clime":
        # one matrix for all t
        A = estimate_stationary_clime(X, config.regularizer)
        mats = np.tile(A, (times.size, 1, 1))
        return EstimatePath(
            times=times, matrices=mats, method=config.method,
            params={"regularizer": config.regularizer},
        )

    results = parallel_map(
        _estimate_one, [(X, float(t), config) for t in times], workers=workers
    )
    good = [(t, A) for t, A, err in results if err is None]
    failures = tuple((t, err) for t, _, err in results if err is not None)
    if not good:
        raise InfeasibleSubproblemError(
            None, None, f"estimation failed at every time point: {failures[0][1]}"
        )
    ts = np.array([t for t, _ in good])
    mats = np.stack([A for _, A in good])
    return EstimatePath(
        times=ts, matrices=mats, method=config.method,
        params={"regularizer": config.regularizer}, failures=failures,
    )
