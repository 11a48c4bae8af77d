"""Batch benchmark protocols: simulation setups, error-table
replication, ROC sweeps, rolling prediction comparison, spatial-design
growth checks.

One truth path is drawn per (pattern, d, n, base seed) setup and held
fixed across replicates; replicates redraw the innovations only, so
per-time errors across replicates refer to the same target matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from tvvar.estimators import METHODS, EstimatorConfig, estimate_path
from tvvar.evaluate import (
    ErrorTable,
    aggregate_error_table,
    estimation_errors,
    rolling_one_step_errors,
    tune_by_prediction,
    window_times,
)
from tvvar.kernel import KernelConfig, default_bandwidth
from tvvar.simulate import (
    GraphPattern,
    TransitionPath,
    generate_baseline,
    innovation_cov,
    interpolate_path,
    normalize_spectral,
    simulate_tvvar,
)
from tvvar.utils import derive_seed, parallel_map

#: hub/cluster group counts used in the reference simulation designs
GROUP_COUNTS = {20: 8, 30: 10, 40: 15, 50: 20}

DEFAULT_NORMS = ("op_linf", "op_l1", "spectral", "frobenius")


def make_pattern(kind: str, d: int, v: float = 0.001, u_diag: float = 10.0,
                 g: int | None = None, prob: float | None = None) -> GraphPattern:
    """Pattern with the reference design defaults for dimension d."""
    if kind in ("hub", "cluster"):
        if g is None:
            if d not in GROUP_COUNTS:
                raise ValueError(
                    f"no default group count for d={d}; pass g explicitly"
                )
            g = GROUP_COUNTS[d]
        return GraphPattern(kind=kind, g=g, v=v, u_diag=u_diag)
    if kind == "band":
        return GraphPattern(kind="band", g=1, v=v, u_diag=u_diag)
    return GraphPattern(kind="random", prob=0.001 if prob is None else prob,
                        v=v, u_diag=u_diag)


@dataclass(frozen=True)
class SimulationSetup:
    pattern: GraphPattern
    d: int
    n: int
    seed: int
    rho01: float = 0.2
    rho02: float = 1.0
    burn_in: int = 100


def make_truth(setup: SimulationSetup) -> tuple[TransitionPath, np.ndarray]:
    """Baselines, interpolated path and innovation covariance."""
    A01 = normalize_spectral(
        generate_baseline(setup.pattern, setup.d, derive_seed(setup.seed, 1)),
        setup.rho01,
    )
    A02 = normalize_spectral(
        generate_baseline(setup.pattern, setup.d, derive_seed(setup.seed, 2)),
        setup.rho02,
    )
    truth = interpolate_path(A01, A02, setup.n)
    psi = innovation_cov(A01, np.eye(setup.d))
    return truth, psi


def simulate_replicate(truth: TransitionPath, psi, setup: SimulationSetup, rep: int) -> np.ndarray:
    return simulate_tvvar(
        truth, psi, burn_in=setup.burn_in, seed=derive_seed(setup.seed, 100 + rep)
    )


@dataclass(frozen=True)
class MethodSpec:
    """An estimator plus its tuning grid (empty grid means untuned)."""

    method: str
    grid: tuple = ()

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")


def _error_replicate(args):
    (truth, psi, setup, rep, specs, bandwidth, norms,
     n1, tune_stride, eval_stride) = args
    kernel = KernelConfig(bandwidth=bandwidth)
    X = simulate_replicate(truth, psi, setup, rep)
    times = window_times(setup.n, bandwidth, stride=eval_stride)
    out = {}
    for spec in specs:
        if spec.method == "tv_mle" or len(spec.grid) == 0:
            reg = 0.0
        elif len(spec.grid) == 1:
            reg = float(spec.grid[0])
        else:
            reg = tune_by_prediction(
                X, spec.method, spec.grid, n1=n1, kernel=kernel,
                stride=tune_stride,
            ).selected
        config = EstimatorConfig(method=spec.method, kernel=kernel, regularizer=reg)
        est = estimate_path(X, times, config)
        out[spec.method] = estimation_errors(est, truth, norms)
    return out


def error_table_replication(
    setup: SimulationSetup,
    specs: list[MethodSpec],
    n_reps: int,
    bandwidth: float | None = None,
    norms=DEFAULT_NORMS,
    train_frac: float = 0.7,
    tune_stride: int = 1,
    eval_stride: int = 1,
    workers: int = 1,
) -> ErrorTable:
    """Estimation-error comparison over replicates with per-replicate
    tuning by one-step-ahead prediction."""
    bandwidth = default_bandwidth(setup.n) if bandwidth is None else bandwidth
    truth, psi = make_truth(setup)
    n1 = int(train_frac * setup.n)
    jobs = [
        (truth, psi, setup, r, tuple(specs), bandwidth, tuple(norms),
         n1, tune_stride, eval_stride)
        for r in range(n_reps)
    ]
    reps = parallel_map(_error_replicate, jobs, workers=workers)
    per_method = {spec.method: [r[spec.method] for r in reps] for spec in specs}
    meta = {
        "pattern": setup.pattern.kind,
        "d": setup.d,
        "n": setup.n,
        "replicates": n_reps,
        "bandwidth": bandwidth,
        "seed": setup.seed,
    }
    return aggregate_error_table(per_method, meta=meta)


@dataclass(frozen=True)
class PredictionOutcome:
    method: str
    grid: np.ndarray
    mean_errors: np.ndarray
    selected: float
    best_mean: float
    best_sd: float


def prediction_comparison(
    X,
    specs: list[MethodSpec],
    test_span: int,
    window: int | None,
    kernel: KernelConfig,
    stride: int = 1,
) -> dict[str, PredictionOutcome]:
    """Rolling one-step comparison over the trailing test span.

    For every method the reported error is the minimum over its grid of
    the mean prediction error (the tuned value); candidates that fail
    anywhere in the span score infinity.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[1]
    if not 1 <= test_span < n:
        raise ValueError("test span must be shorter than the series")
    targets = list(range(n - test_span + 1, n + 1, stride))
    results = {}
    for spec in specs:
        grid = np.sort(np.asarray(spec.grid if spec.grid else (0.0,), dtype=np.float64))
        means = np.full(grid.size, np.inf)
        sds = np.full(grid.size, np.inf)
        for k, reg in enumerate(grid):
            config = EstimatorConfig(
                method=spec.method, kernel=kernel, regularizer=float(reg)
            )
            try:
                errs = rolling_one_step_errors(X, config, targets, window=window)
            except Exception:
                continue
            means[k] = float(np.mean(errs))
            sds[k] = float(np.std(errs, ddof=1)) if errs.size > 1 else 0.0
        if not np.isfinite(means).any():
            raise ValueError(f"every candidate failed for {spec.method}")
        best = int(np.argmin(means))
        results[spec.method] = PredictionOutcome(
            method=spec.method,
            grid=grid,
            mean_errors=means,
            selected=float(grid[best]),
            best_mean=float(means[best]),
            best_sd=float(sds[best]),
        )
    return results


def drifting_rotation_series(
    d: int, n: int, seed: int, modulus: float = 0.9, turns: float = 0.5,
    noise_scale: float = 1.0,
) -> tuple[np.ndarray, TransitionPath]:
    """Benchmark series with a smoothly rotating transition structure.

    A(t) is block-diagonal in 2x2 rotation blocks with angle
    2 pi turns t, scaled by a constant modulus < 1, so the process
    stays uniformly contractive while its dependence structure drifts
    through a quarter/half turn over the sample.  Innovations are iid
    N(0, noise_scale^2 I).
    """
    if d % 2 != 0:
        raise ValueError("dimension must be even for rotation blocks")
    if not 0 < modulus < 1:
        raise ValueError("modulus must lie in (0, 1)")
    grid = np.arange(1, n + 1) / n
    mats = np.zeros((n, d, d))
    for i, t in enumerate(grid):
        theta = 2.0 * np.pi * turns * t
        c, s = np.cos(theta), np.sin(theta)
        block = modulus * np.array([[c, -s], [s, c]])
        for b in range(d // 2):
            mats[i, 2 * b : 2 * b + 2, 2 * b : 2 * b + 2] = block
    truth = TransitionPath(n=n, d=d, matrices=mats, grid=grid)
    X = simulate_tvvar(truth, noise_scale**2 * np.eye(d), seed=seed)
    return X, truth


@dataclass(frozen=True)
class SpatialGrowth:
    dims: np.ndarray
    alpha_norms: np.ndarray
    op_norms: np.ndarray
    alpha_exponent: float
    op_exponent: float
    r: float
    gamma: float
    alpha: float
    meta: dict = field(default_factory=dict)


def spatial_growth_check(dims, r: float, gamma: float, alpha: float) -> SpatialGrowth:
    """Fit growth exponents of the spatial-design sparsity measures.

    Computes, over a ladder of dimensions, the maximum row alpha-norm
    (the approximate-sparsity measure, expected ~ d^r when
    2 gamma alpha > 1) and the operator row-sum norm (expected ~ d^r
    when gamma > 1/2), and fits log-log growth exponents.
    """
    from tvvar.linalg import matrix_norm
    from tvvar.simulate import SpatialDesignParams, spatial_design_matrix

    dims = np.asarray(sorted(dims), dtype=np.int64)
    if dims.size < 2:
        raise ValueError("need at least two dimensions to fit an exponent")
    a_norms, o_norms = [], []
    for d in dims:
        A = spatial_design_matrix(SpatialDesignParams(d=int(d), r=r, gamma=gamma))
        a_norms.append(float(np.max(np.sum(np.abs(A) ** alpha, axis=1))))
        o_norms.append(matrix_norm(A, "op_linf"))
    a_norms = np.array(a_norms)
    o_norms = np.array(o_norms)
    a_slope = float(np.polyfit(np.log(dims), np.log(a_norms), 1)[0])
    o_slope = float(np.polyfit(np.log(dims), np.log(o_norms), 1)[0])
    return SpatialGrowth(
        dims=dims,
        alpha_norms=a_norms,
        op_norms=o_norms,
        alpha_exponent=a_slope,
        op_exponent=o_slope,
        r=r,
        gamma=gamma,
        alpha=alpha,
        meta={"regime_2ga": 2 * gamma * alpha},
    )
