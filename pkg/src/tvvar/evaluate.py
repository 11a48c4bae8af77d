"""Error aggregation, support recovery, ROC sweeps, tuning, prediction.

Estimation quality is scored over the interior window [a, b] with
a = ceil(n b_n) + 1 and b = floor(n (1 - b_n)) - 1, where the kernel
sees a full two-sided neighborhood.  Support recovery thresholds the
estimate either at a fixed numeric-zero level (1e-3) or at the
theoretical level u# = 2 tau |Sigma(t)^-1|_l1 computed from the true
covariance path (simulation mode only).  Tuning picks the regularizer
minimizing rolling one-step-ahead prediction error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from tvvar.estimators import EstimatorConfig, estimate_at, estimate_tvvar_clime
from tvvar.exceptions import ZeroVarianceError
from tvvar.kernel import KernelConfig, validate_series
from tvvar.linalg import as_matrix, invert, matrix_norm, threshold_support
from tvvar.simulate import TransitionPath, stationary_cov
from tvvar.utils import parallel_map

NUMERIC_ZERO_THRESHOLD = 1e-3


def interior_window(n: int, bandwidth: float) -> tuple[int, int]:
    """1-based inclusive index window [a, b] away from both boundaries."""
    a = math.ceil(n * bandwidth) + 1
    b = math.floor(n * (1.0 - bandwidth)) - 1
    if a > b:
        raise ValueError(
            f"empty interior window for n={n}, bandwidth={bandwidth}"
        )
    return a, b


def window_times(n: int, bandwidth: float, stride: int = 1) -> np.ndarray:
    """Rescaled times i/n for the interior window, optionally strided."""
    a, b = interior_window(n, bandwidth)
    return np.arange(a, b + 1, stride) / n


def estimation_errors(est, truth: TransitionPath, norms) -> dict[str, float]:
    """Per-norm average of |A_hat(t) - A_t| over the estimate's grid.

    Estimate times must sit on the truth grid i/n (within 1e-9) or a
    misaligned-grid error is raised.
    """
    sums = {k: 0.0 for k in norms}
    count = 0
    for t, A_hat in zip(est.times, est.matrices):
        i = round(float(t) * truth.n)
        if not 1 <= i <= truth.n or abs(i / truth.n - t) > 1e-9:
            raise ValueError(f"estimate time {t} is not on the truth grid")
        diff = A_hat - truth.at_index(i)
        for k in norms:
            sums[k] += matrix_norm(diff, k)
        count += 1
    if count == 0:
        raise ValueError("estimate path is empty")
    return {k: v / count for k, v in sums.items()}


def theoretical_threshold(cov0_inv_l1: float, tau: float) -> float:
    """Thresholding level u# = 2 tau |Sigma^-1|_l1."""
    if cov0_inv_l1 < 0 or tau < 0:
        raise ValueError("inputs must be nonnegative")
    return 2.0 * tau * cov0_inv_l1


@dataclass(frozen=True)
class RecoveryReport:
    fpr: float
    fnr: float
    est_mask: np.ndarray
    true_mask: np.ndarray
    threshold: float


def recovery_report(A_hat, A_true, threshold: float) -> RecoveryReport:
    """Threshold an estimate and score its support against the truth."""
    est_mask = threshold_support(A_hat, threshold)
    true_mask = as_matrix(A_true) != 0.0
    fpr, fnr = pattern_metrics(est_mask, true_mask)
    return RecoveryReport(
        fpr=fpr, fnr=fnr, est_mask=est_mask, true_mask=true_mask,
        threshold=threshold,
    )


def pattern_metrics(est_mask, true_mask) -> tuple[float, float]:
    """False positive and false negative rates of a support estimate.

    FPR = |S_hat intersect S^c| / |S^c| and FNR = |S_hat^c intersect S|
    / |S|, with the empty-set conventions FPR = 0 when S^c is empty and
    FNR = 0 when S is empty.
    """
    est_mask = np.asarray(est_mask, dtype=bool)
    true_mask = np.asarray(true_mask, dtype=bool)
    if est_mask.shape != true_mask.shape:
        raise ValueError("mask shapes differ")
    n_zero = int((~true_mask).sum())
    n_supp = int(true_mask.sum())
    fpr = float((est_mask & ~true_mask).sum() / n_zero) if n_zero else 0.0
    fnr = float((~est_mask & true_mask).sum() / n_supp) if n_supp else 0.0
    return fpr, fnr


def one_step_predict(A_hat, x_prev) -> np.ndarray:
    A_hat = as_matrix(A_hat)
    x_prev = np.asarray(x_prev, dtype=np.float64)
    if x_prev.shape != (A_hat.shape[1],):
        raise ValueError("state length does not match the matrix")
    return A_hat @ x_prev


def rolling_one_step_errors(
    X,
    config: EstimatorConfig,
    targets,
    window: int | None = None,
) -> np.ndarray:
    """Euclidean one-step prediction errors over 1-based target indices.

    For each target t the estimator sees the data up to column t-1
    (the trailing `window` columns when a fixed width is given) and is
    evaluated at the right edge of that training span; the prediction
    is A_hat x_{t-1}.  Estimation failures propagate to the caller.
    """
    X = validate_series(X)
    n = X.shape[1]
    errs = np.empty(len(targets))
    for k, t in enumerate(targets):
        t = int(t)
        if not 2 <= t <= n:
            raise ValueError(f"target index {t} outside 2..{n}")
        lo = 0 if window is None else max(0, (t - 1) - window)
        train = X[:, lo : t - 1]
        A_hat = estimate_at(train, 1.0, config)
        pred = one_step_predict(A_hat, X[:, t - 2])
        errs[k] = float(np.linalg.norm(X[:, t - 1] - pred))
    return errs


@dataclass(frozen=True)
class TuningResult:
    grid: np.ndarray
    mean_errors: np.ndarray
    selected: float


def tune_by_prediction(
    X,
    method: str,
    grid,
    n1: int,
    kernel: KernelConfig,
    window: int | None = None,
    stride: int = 1,
    fista_max_iters: int = 2000,
    fista_tol: float = 1e-8,
) -> TuningResult:
    """Pick the regularizer minimizing mean one-step prediction error.

    Predictions roll over t = n1+1 .. n.  Candidates whose estimation
    fails anywhere in the span are recorded with infinite error and
    excluded from the argmin; ties break toward the smaller value
    (the grid is scanned in ascending order).
    """
    X = validate_series(X)
    n = X.shape[1]
    if not 1 <= n1 < n:
        raise ValueError("n1 must satisfy 1 <= n1 < n")
    grid = np.sort(np.asarray(grid, dtype=np.float64))
    if grid.size == 0:
        raise ValueError("empty tuning grid")
    targets = range(n1 + 1, n + 1, stride)
    means = np.empty(grid.size)
    for k, reg in enumerate(grid):
        config = EstimatorConfig(
            method=method,
            kernel=kernel,
            regularizer=float(reg),
            fista_max_iters=fista_max_iters,
            fista_tol=fista_tol,
        )
        try:
            means[k] = float(np.mean(rolling_one_step_errors(X, config, targets, window)))
        except Exception:
            means[k] = np.inf
    if not np.isfinite(means).any():
        raise ValueError("every tuning candidate failed")
    best = int(np.argmin(means))
    return TuningResult(grid=grid, mean_errors=means, selected=float(grid[best]))


def preprocess(X) -> np.ndarray:
    """Standardize each variable, remove its linear time trend, restore
    unit scale.

    Per variable: subtract the mean, divide by the standard deviation,
    regress out an ordinary-least-squares linear trend in the time
    index, then rescale the residual back to unit standard deviation
    (skipped for residuals that are numerically zero, e.g. a pure
    ramp).  The final rescale makes the map idempotent.  Output has
    per-variable mean ~0 and zero linear trend.
    """
    X = validate_series(X)
    n = X.shape[1]
    if n < 3:
        raise ValueError("need at least three observations to detrend")
    sd = np.std(X, axis=1, ddof=1)
    if np.any(sd < 1e-12 * max(1.0, float(np.max(np.abs(X))))):
        raise ZeroVarianceError("a variable has (near) zero variance")
    Z = (X - np.mean(X, axis=1, keepdims=True)) / sd[:, None]
    idx = np.arange(n, dtype=np.float64)
    idx_c = idx - idx.mean()
    slope = (Z @ idx_c) / (idx_c @ idx_c)
    resid = Z - slope[:, None] * idx_c
    rsd = np.std(resid, axis=1, ddof=1)
    keep = rsd > 1e-9
    resid[keep] = resid[keep] / rsd[keep, None]
    return resid


@dataclass(frozen=True)
class RocPoint:
    tau: float
    fpr: float
    tpr: float
    failures: int = 0


def _true_threshold_path(truth: TransitionPath, psi, tau: float, indices):
    u_sharp = {}
    for i in indices:
        sigma = stationary_cov(truth.at_index(i), psi)
        u_sharp[i] = theoretical_threshold(matrix_norm(invert(sigma), "op_l1"), tau)
    return u_sharp


def _roc_cell(args):
    X, truth, tau, indices, kernel, policy, u_sharp = args
    fprs, fnrs, failures = [], [], 0
    for i in indices:
        t = i / truth.n
        try:
            A_hat = estimate_tvvar_clime(X, t, tau, kernel)
        except Exception:
            failures += 1
            continue
        u = NUMERIC_ZERO_THRESHOLD if policy == "fixed" else u_sharp[i]
        est_mask = threshold_support(A_hat, u)
        true_mask = truth.at_index(i) != 0.0
        fpr, fnr = pattern_metrics(est_mask, true_mask)
        fprs.append(fpr)
        fnrs.append(fnr)
    return fprs, fnrs, failures


def roc_curve(
    series_list,
    truth: TransitionPath,
    tau_grid,
    threshold_policy: str = "fixed",
    kernel: KernelConfig | None = None,
    psi=None,
    stride: int = 1,
    workers: int = 1,
) -> list[RocPoint]:
    """Mean (FPR, TPR) per tau over replicates and the interior window.

    threshold_policy "fixed" thresholds at the numeric-zero level 1e-3;
    "theoretical" uses u# = 2 tau |Sigma(t)^-1|_l1 from the true
    covariance path (requires the innovation covariance psi).
    Estimation failures are counted per cell, not fatal.
    """
    if threshold_policy not in ("fixed", "theoretical"):
        raise ValueError("threshold_policy must be 'fixed' or 'theoretical'")
    if kernel is None:
        raise ValueError("kernel configuration is required")
    tau_grid = np.asarray(tau_grid, dtype=np.float64)
    if tau_grid.size == 0:
        raise ValueError("empty tau grid")
    a, b = interior_window(truth.n, kernel.bandwidth)
    indices = list(range(a, b + 1, stride))

    points = []
    for tau in tau_grid:
        u_sharp = None
        if threshold_policy == "theoretical":
            u_sharp = _true_threshold_path(truth, psi, float(tau), indices)
        cells = parallel_map(
            _roc_cell,
            [
                (X, truth, float(tau), indices, kernel, threshold_policy, u_sharp)
                for X in series_list
            ],
            workers=workers,
        )
        fprs = [v for cell in cells for v in cell[0]]
        fnrs = [v for cell in cells for v in cell[1]]
        failures = sum(cell[2] for cell in cells)
        if fprs:
            points.append(
                RocPoint(
                    tau=float(tau),
                    fpr=float(np.mean(fprs)),
                    tpr=float(1.0 - np.mean(fnrs)),
                    failures=failures,
                )
            )
        else:
            points.append(RocPoint(tau=float(tau), fpr=np.nan, tpr=np.nan, failures=failures))
    return points


def _recovery_cell(args):
    X, truth, tau, indices, kernel, u_sharp = args
    no_fp, strong, total = 0, 0, 0
    for i in indices:
        t = i / truth.n
        total += 1
        try:
            A_hat = estimate_tvvar_clime(X, t, tau, kernel)
        except Exception:
            continue  # failure counts against both events
        A_true = truth.at_index(i)
        est_mask = threshold_support(A_hat, u_sharp[i])
        true_mask = A_true != 0.0
        if not (est_mask & ~true_mask).any():
            no_fp += 1
        strong_mask = np.abs(A_true) > 2.0 * u_sharp[i]
        if not (strong_mask & ~est_mask).any():
            strong += 1
    return no_fp, strong, total


def partial_recovery_check(
    series_list,
    truth: TransitionPath,
    psi,
    tau: float,
    kernel: KernelConfig,
    stride: int = 1,
    workers: int = 1,
) -> tuple[float, float]:
    """Empirical frequencies of the partial-recovery events.

    Over replicates and interior time points, returns the frequency of
    {S_hat subset S} and of {strong signals (above 2 u#) subset S_hat},
    with u# computed from the true covariance path.  Estimation
    failures count as failures of both events.
    """
    a, b = interior_window(truth.n, kernel.bandwidth)
    indices = list(range(a, b + 1, stride))
    u_sharp = _true_threshold_path(truth, psi, tau, indices)
    cells = parallel_map(
        _recovery_cell,
        [(X, truth, tau, indices, kernel, u_sharp) for X in series_list],
        workers=workers,
    )
    total = sum(c[2] for c in cells)
    if total == 0:
        raise ValueError("no evaluation points")
    return (
        sum(c[0] for c in cells) / total,
        sum(c[1] for c in cells) / total,
    )


@dataclass(frozen=True)
class ErrorRow:
    method: str
    norm: str
    mean: float
    sd: float


@dataclass(frozen=True)
class ErrorTable:
    rows: list[ErrorRow]
    meta: dict = field(default_factory=dict)

    def get(self, method: str, norm: str) -> ErrorRow:
        for row in self.rows:
            if row.method == method and row.norm == norm:
                return row
        raise KeyError(f"no row for ({method}, {norm})")


def aggregate_error_table(per_replicate: dict[str, list[dict[str, float]]], meta=None) -> ErrorTable:
    """Aggregate per-replicate {norm: error} dicts into mean/sd rows."""
    rows = []
    for method, reps in per_replicate.items():
        if not reps:
            continue
        norms = reps[0].keys()
        for k in norms:
            vals = np.array([r[k] for r in reps])
            sd = float(np.std(vals, ddof=1)) if vals.size > 1 else 0.0
            rows.append(ErrorRow(method=method, norm=k, mean=float(np.mean(vals)), sd=sd))
    return ErrorTable(rows=rows, meta=meta or {})
