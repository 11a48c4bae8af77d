"""Nadaraya-Watson weights and kernel-smoothed lag covariances.

A series is a d x n array whose columns are the observations in time
order, living on the rescaled grid t_m = m/n for m = 1..n.  The lag-l
smoothed second moment at time t is

    S_hat(t, l) = sum_m w(t, m) x_m x_{m+l}^T,   l in {-1, 0, 1},

with w(t, m) the kernel weights normalized to sum to one.  Terms whose
shifted index m+l falls outside 1..n are dropped and the surviving
weights renormalized, the only convention that keeps the estimator
defined at the sample edges.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tvvar.exceptions import EmptyKernelWindowError

#: kernels exposed to production configs; "flat" (constant 1/2 on
#: [-1,1]) exists only so tests can realize exact uniform weights.
PRODUCTION_KERNELS = ("epanechnikov",)
_ALL_KERNELS = ("epanechnikov", "flat")


def epanechnikov(v):
    """Epanechnikov kernel 0.75 (1 - v^2) on [-1, 1], zero outside."""
    v = np.asarray(v, dtype=np.float64)
    out = np.where(np.abs(v) <= 1.0, 0.75 * (1.0 - v * v), 0.0)
    return float(out) if out.ndim == 0 else out


def flat(v):
    """Constant kernel 1/2 on [-1, 1] (test-only, gives uniform weights)."""
    v = np.asarray(v, dtype=np.float64)
    out = np.where(np.abs(v) <= 1.0, 0.5, 0.0)
    return float(out) if out.ndim == 0 else out


_KERNEL_FNS = {"epanechnikov": epanechnikov, "flat": flat}


@dataclass(frozen=True)
class KernelConfig:
    """Kernel choice and bandwidth b_n in (0, 1)."""

    bandwidth: float
    kernel: str = "epanechnikov"
    allow_test_kernels: bool = False

    def __post_init__(self):
        if not 0.0 < self.bandwidth < 1.0:
            raise ValueError(f"bandwidth must lie in (0,1), got {self.bandwidth}")
        allowed = _ALL_KERNELS if self.allow_test_kernels else PRODUCTION_KERNELS
        if self.kernel not in allowed:
            raise ValueError(f"kernel must be one of {allowed}, got {self.kernel!r}")

    def evaluate(self, v):
        return _KERNEL_FNS[self.kernel](v)


def default_bandwidth(n: int) -> float:
    """Simulation-study default 0.8 n^(-1/5)."""
    return 0.8 * float(n) ** (-0.2)


@dataclass(frozen=True)
class SmoothedCov:
    """A smoothed lag-l covariance estimate tagged with its time."""

    t: float
    lag: int
    matrix: np.ndarray


def nw_weights(t: float, n: int, cfg: KernelConfig) -> np.ndarray:
    """Normalized kernel weights w(t, m) over the grid m/n, m = 1..n.

    Raises EmptyKernelWindowError when no grid point carries positive
    kernel mass (nothing within the bandwidth of t).
    """
    if n < 1:
        raise ValueError("n must be positive")
    grid = np.arange(1, n + 1) / n
    raw = cfg.evaluate((t - grid) / cfg.bandwidth)
    total = float(np.sum(raw))
    if total <= 0.0:
        raise EmptyKernelWindowError(
            f"no grid point within bandwidth {cfg.bandwidth} of t={t}"
        )
    return raw / total


def validate_series(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("series must be a d x n matrix (variables x time)")
    if not np.all(np.isfinite(X)):
        raise ValueError("series contains non-finite entries")
    return X


def smoothed_cov(X, t: float, lag: int, cfg: KernelConfig) -> SmoothedCov:
    """Kernel-smoothed lag covariance sum_m w(t,m) x_m x_{m+lag}^T."""
    X = validate_series(X)
    n = X.shape[1]
    if n < 2:
        raise ValueError("series needs at least two observations")
    if lag not in (-1, 0, 1):
        raise ValueError("lag must be one of -1, 0, 1")
    w = nw_weights(t, n, cfg)
    if lag == 0:
        idx = np.arange(n)
    elif lag == 1:
        idx = np.arange(n - 1)
    else:
        idx = np.arange(1, n)
    wv = w[idx]
    total = float(np.sum(wv))
    if total <= 0.0:
        raise EmptyKernelWindowError(
            f"all kernel mass fell on dropped boundary terms at t={t}, lag={lag}"
        )
    wv = wv / total
    S = (X[:, idx] * wv) @ X[:, idx + lag].T
    return SmoothedCov(t=t, lag=lag, matrix=S)
