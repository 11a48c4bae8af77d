"""Batch command-line front end.

Subcommands: simulate, estimate, tune, evaluate, roc, predict,
spatial-check.  Every option can come from a flat key=value config file
(--config), with command-line flags taking precedence.  The worker
count honors the TVVAR_WORKERS environment variable over any flag.

Exit codes: 0 success, 1 config error, 2 data error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from tvvar import io
from tvvar.estimators import METHODS, EstimatorConfig, estimate_path
from tvvar.evaluate import (
    aggregate_error_table,
    estimation_errors,
    roc_curve,
    tune_by_prediction,
    window_times,
    preprocess,
)
from tvvar.exceptions import ConfigError, DataError, TvvarError
from tvvar.kernel import KernelConfig, default_bandwidth
from tvvar.linalg import spectral_norm, NORM_KINDS
from tvvar.protocols import (
    MethodSpec,
    SimulationSetup,
    make_pattern,
    make_truth,
    prediction_comparison,
    simulate_replicate,
    spatial_growth_check,
)
from tvvar.simulate import PATTERN_KINDS
from tvvar.utils import resolve_workers

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


def load_config(path) -> dict[str, str]:
    """Flat key=value file; blank lines and # comments ignored."""
    values: dict[str, str] = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value")
                key, _, value = line.partition("=")
                values[key.strip()] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return values


class Options:
    """Merged view over CLI flags, config file and defaults."""

    def __init__(self, args: argparse.Namespace):
        self._args = vars(args)
        self._cfg = load_config(args.config) if getattr(args, "config", None) else {}

    def get(self, key: str, cast, default=None, required=False):
        flag = self._args.get(key)
        if flag is not None:
            return flag
        if key in self._cfg:
            raw = self._cfg[key]
            try:
                if cast is bool:
                    return raw.lower() in ("1", "true", "yes", "on")
                return cast(raw)
            except ValueError as exc:
                raise ConfigError(f"config key {key}={raw!r}: {exc}") from exc
        if required:
            raise ConfigError(f"missing required option: {key}")
        return default


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _bandwidth(opts: Options, n: int) -> float:
    bw = opts.get("bandwidth", float)
    return default_bandwidth(n) if bw is None else bw


def _setup_from(opts: Options) -> SimulationSetup:
    kind = opts.get("pattern", str, required=True)
    if kind not in PATTERN_KINDS:
        raise ConfigError(f"pattern must be one of {PATTERN_KINDS}")
    d = opts.get("d", int, required=True)
    n = opts.get("n", int, required=True)
    if d < 2:
        raise ConfigError("dimension d must be at least 2")
    if n < 10:
        raise ConfigError("series length n must be at least 10")
    try:
        pattern = make_pattern(
            kind,
            d,
            v=opts.get("v", float, 0.001),
            u_diag=opts.get("u_diag", float, 10.0),
            g=opts.get("g", int),
            prob=opts.get("prob", float),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return SimulationSetup(
        pattern=pattern,
        d=d,
        n=n,
        seed=opts.get("seed", int, 0),
        rho01=opts.get("rho01", float, 0.2),
        rho02=opts.get("rho02", float, 1.0),
        burn_in=opts.get("burn_in", int, 100),
    )


def cmd_simulate(opts: Options) -> int:
    setup = _setup_from(opts)
    truth, psi = make_truth(setup)
    X = simulate_replicate(truth, psi, setup, rep=0)
    out_series = opts.get("out_series", str, "series.csv")
    out_truth = opts.get("out_truth", str, "truth.json")
    io.series_to_csv(X, out_series)
    meta = {
        "seed": setup.seed,
        "pattern": setup.pattern.kind,
        "g": setup.pattern.g,
        "prob": setup.pattern.prob,
        "v": setup.pattern.v,
        "u_diag": setup.pattern.u_diag,
        "n": setup.n,
        "d": setup.d,
        "rho01": setup.rho01,
        "rho02": setup.rho02,
        "burn_in": setup.burn_in,
        "psi": psi.tolist(),
    }
    io.transition_path_to_json(truth, out_truth, meta=meta)
    rho1 = spectral_norm(truth.at_index(1))
    rhon = spectral_norm(truth.at_index(setup.n))
    print(
        f"simulate: pattern={setup.pattern.kind} d={setup.d} n={setup.n} "
        f"seed={setup.seed} rho(A_1)={rho1:.4f} rho(A_n)={rhon:.4f} "
        f"-> {out_series}, {out_truth}"
    )
    return EXIT_OK


def _estimator_config(opts: Options, n: int) -> EstimatorConfig:
    method = opts.get("method", str, required=True)
    if method not in METHODS:
        raise ConfigError(f"method must be one of {METHODS}")
    try:
        return EstimatorConfig(
            method=method,
            kernel=KernelConfig(bandwidth=_bandwidth(opts, n)),
            regularizer=opts.get("regularizer", float, 0.0),
            fista_max_iters=opts.get("fista_max_iters", int, 2000),
            fista_tol=opts.get("fista_tol", float, 1e-8),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_estimate(opts: Options) -> int:
    series = opts.get("series", str, required=True)
    method = opts.get("method", str, required=True)
    if method not in METHODS:
        raise ConfigError(f"method must be one of {METHODS}")
    X = io.series_from_csv(series)
    n = X.shape[1]
    config = _estimator_config(opts, n)
    stride = opts.get("stride", int, 1)
    times = window_times(n, config.kernel.bandwidth, stride=stride)
    workers = resolve_workers(opts.get("workers", int))
    est = estimate_path(X, times, config, workers=workers)
    out = opts.get("out", str, "estimate.json")
    io.estimate_path_to_json(est, out)
    csv_dir = opts.get("out_csv_dir", str)
    if csv_dir:
        io.estimate_path_to_csv_dir(est, csv_dir)
    print(
        f"estimate: method={config.method} points={est.times.size} "
        f"failures={len(est.failures)} -> {out}"
    )
    for t, msg in est.failures:
        print(f"  failed at t={t:.4f}: {msg}", file=sys.stderr)
    return EXIT_NUMERIC if est.failures else EXIT_OK


def cmd_tune(opts: Options) -> int:
    series = opts.get("series", str, required=True)
    method = opts.get("method", str, required=True)
    if method not in METHODS:
        raise ConfigError(f"method must be one of {METHODS}")
    grid = opts.get("grid", _float_list, required=True)
    X = io.series_from_csv(series)
    n = X.shape[1]
    n1 = opts.get("n1", int, int(0.7 * n))
    try:
        kernel = KernelConfig(bandwidth=_bandwidth(opts, n))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    result = tune_by_prediction(
        X,
        method,
        grid,
        n1=n1,
        kernel=kernel,
        stride=opts.get("stride", int, 1),
    )
    out = opts.get("out", str, "tuning.json")
    io.tuning_to_json(result, out, meta={"method": method, "n1": n1})
    print(
        f"tune: method={method} selected={result.selected:.6g} "
        f"mean_err={result.mean_errors[int(np.argmin(result.mean_errors))]:.6g} -> {out}"
    )
    return EXIT_OK


def cmd_evaluate(opts: Options) -> int:
    truth, _ = io.transition_path_from_json(opts.get("truth", str, required=True))
    est_files = opts.get("est", str, required=True).split(",")
    norms = opts.get("norms", str, "entry_max,op_linf,op_l1,spectral,frobenius").split(",")
    for k in norms:
        if k not in NORM_KINDS:
            raise ConfigError(f"unknown norm {k!r}")
    per_method: dict[str, list[dict[str, float]]] = {}
    for f in est_files:
        est = io.estimate_path_from_json(f.strip())
        per_method.setdefault(est.method, []).append(
            estimation_errors(est, truth, norms)
        )
    table = aggregate_error_table(per_method, meta={"replicates": len(est_files)})
    out = opts.get("out", str, "errors")
    io.error_table_to_csv(table, out + ".csv")
    io.error_table_to_json(table, out + ".json")
    for row in table.rows:
        print(f"evaluate: {row.method} {row.norm} mean={row.mean:.4f} sd={row.sd:.4f}")
    return EXIT_OK


def cmd_roc(opts: Options) -> int:
    setup = _setup_from(opts)
    truth, psi = make_truth(setup)
    reps = opts.get("replicates", int, 10)
    series = [simulate_replicate(truth, psi, setup, rep=r) for r in range(reps)]
    tau_lo = opts.get("tau_min", float, 0.001)
    tau_hi = opts.get("tau_max", float, 0.45)
    tau_count = opts.get("tau_count", int, 30)
    grid = np.linspace(tau_lo, tau_hi, tau_count)
    policy = opts.get("policy", str, "fixed")
    if policy not in ("fixed", "theoretical"):
        raise ConfigError("policy must be 'fixed' or 'theoretical'")
    try:
        kernel = KernelConfig(bandwidth=_bandwidth(opts, setup.n))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    workers = resolve_workers(opts.get("workers", int))
    points = roc_curve(
        series,
        truth,
        grid,
        threshold_policy=policy,
        kernel=kernel,
        psi=psi,
        stride=opts.get("stride", int, 1),
        workers=workers,
    )
    out = opts.get("out", str, "roc")
    io.roc_to_csv(points, out + ".csv")
    io.roc_to_json(
        points, out + ".json",
        meta={"pattern": setup.pattern.kind, "d": setup.d, "n": setup.n,
              "replicates": reps, "policy": policy},
    )
    finite = [p for p in points if np.isfinite(p.fpr)]
    print(
        f"roc: pattern={setup.pattern.kind} d={setup.d} points={len(finite)}/{len(points)} "
        f"fpr range [{min(p.fpr for p in finite):.3f}, {max(p.fpr for p in finite):.3f}] -> {out}.csv"
    )
    return EXIT_OK


def cmd_predict(opts: Options) -> int:
    series = opts.get("series", str, required=True)
    methods = opts.get("methods", str, "tvvar_clime,stationary_clime").split(",")
    grid = tuple(opts.get("grid", _float_list, [0.05, 0.1, 0.2, 0.4]))
    specs = []
    for m in methods:
        m = m.strip()
        if m not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}")
        specs.append(MethodSpec(m, grid=() if m == "tv_mle" else grid))
    try:
        kernel = KernelConfig(bandwidth=opts.get("bandwidth", float, 0.3))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    X = io.series_from_csv(series)
    if opts.get("preprocess", bool, True):
        X = preprocess(X)
    n = X.shape[1]
    test_span = opts.get("test_span", int, 100)
    window = opts.get("window", int, n - test_span)
    results = prediction_comparison(
        X, specs, test_span=test_span, window=window, kernel=kernel,
        stride=opts.get("stride", int, 1),
    )
    out = opts.get("out", str, "prediction.json")
    io.write_json(
        {
            "kind": "prediction",
            "results": {
                m: {
                    "selected": r.selected,
                    "mean_error": r.best_mean,
                    "sd_error": r.best_sd,
                    "grid": r.grid.tolist(),
                    "mean_errors": r.mean_errors.tolist(),
                }
                for m, r in results.items()
            },
            "meta": {"test_span": test_span, "window": window,
                     "bandwidth": kernel.bandwidth},
        },
        out,
    )
    for m, r in results.items():
        print(f"predict: {m} mean_err={r.best_mean:.4f} (sd {r.best_sd:.4f}) at reg={r.selected:.4g}")
    return EXIT_OK


def cmd_spatial_check(opts: Options) -> int:
    dims = opts.get("dims", _int_list, [16, 32, 64])
    r = opts.get("r", float, 0.5)
    gamma = opts.get("gamma", float, 2.0)
    alpha = opts.get("alpha", float, 0.5)
    growth = spatial_growth_check(dims, r=r, gamma=gamma, alpha=alpha)
    out = opts.get("out", str, "spatial.json")
    io.write_json(
        {
            "kind": "spatial_check",
            "dims": growth.dims.tolist(),
            "alpha_norms": growth.alpha_norms.tolist(),
            "op_norms": growth.op_norms.tolist(),
            "alpha_exponent": growth.alpha_exponent,
            "op_exponent": growth.op_exponent,
            "expected_exponent": r,
            "meta": growth.meta,
        },
        out,
    )
    print(
        f"spatial-check: alpha-norm exponent {growth.alpha_exponent:.3f} "
        f"(expected ~{r}), operator-norm exponent {growth.op_exponent:.3f} -> {out}"
    )
    return EXIT_OK


_COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "tune": cmd_tune,
    "evaluate": cmd_evaluate,
    "roc": cmd_roc,
    "predict": cmd_predict,
    "spatial-check": cmd_spatial_check,
}

_FLAGS: dict[str, list[tuple[str, type | object]]] = {
    "simulate": [
        ("pattern", str), ("d", int), ("n", int), ("seed", int), ("g", int),
        ("prob", float), ("v", float), ("u_diag", float), ("rho01", float),
        ("rho02", float), ("burn_in", int), ("out_series", str), ("out_truth", str),
    ],
    "estimate": [
        ("series", str), ("method", str), ("regularizer", float),
        ("bandwidth", float), ("stride", int), ("workers", int), ("out", str),
        ("out_csv_dir", str), ("fista_max_iters", int), ("fista_tol", float),
    ],
    "tune": [
        ("series", str), ("method", str), ("grid", _float_list), ("n1", int),
        ("bandwidth", float), ("stride", int), ("out", str),
    ],
    "evaluate": [
        ("truth", str), ("est", str), ("norms", str), ("out", str),
    ],
    "roc": [
        ("pattern", str), ("d", int), ("n", int), ("seed", int), ("g", int),
        ("prob", float), ("v", float), ("u_diag", float), ("replicates", int),
        ("tau_min", float), ("tau_max", float), ("tau_count", int),
        ("policy", str), ("bandwidth", float), ("stride", int),
        ("workers", int), ("out", str),
    ],
    "predict": [
        ("series", str), ("methods", str), ("grid", _float_list),
        ("test_span", int), ("window", int), ("bandwidth", float),
        ("stride", int), ("preprocess", bool), ("out", str),
    ],
    "spatial-check": [
        ("dims", _int_list), ("r", float), ("gamma", float), ("alpha", float),
        ("out", str),
    ],
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tvvar",
        description="Time-varying sparse VAR estimation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, flags in _FLAGS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None,
                       help="flat key=value config file")
        for key, cast in flags:
            if cast is bool:
                p.add_argument(f"--{key.replace('_', '-')}", dest=key,
                               type=lambda s: s.lower() in ("1", "true", "yes", "on"),
                               default=None)
            else:
                p.add_argument(f"--{key.replace('_', '-')}", dest=key,
                               type=cast, default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = Options(args)
        return _COMMANDS[args.command](opts)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (TvvarError, ValueError, RuntimeError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
