"""File formats: series CSV/JSON, path JSON, result tables.

CSV series layout: variables as rows, time as columns, one header row
with the 1-based time indices.  Floats are written with %.17g, which
round-trips IEEE doubles exactly.  JSON documents carry a
schema_version field and round-trip bit-exactly (json preserves the
shortest repr of each double).
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict

import numpy as np

from tvvar.estimators import EstimatePath
from tvvar.evaluate import ErrorRow, ErrorTable, RocPoint, TuningResult
from tvvar.exceptions import DataError
from tvvar.simulate import TransitionPath

SCHEMA_VERSION = 1


def _require(path):
    if not os.path.exists(path):
        raise DataError(f"input file not found: {path}")
    return path


def series_to_csv(X, path) -> None:
    X = np.asarray(X, dtype=np.float64)
    d, n = X.shape
    with open(path, "w") as fh:
        fh.write(",".join(str(i) for i in range(1, n + 1)) + "\n")
        for j in range(d):
            fh.write(",".join(f"{v:.17g}" for v in X[j]) + "\n")


def series_from_csv(path) -> np.ndarray:
    _require(path)
    try:
        X = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except Exception as exc:
        raise DataError(f"could not parse series CSV {path}: {exc}") from exc
    if X.size == 0 or not np.all(np.isfinite(X)):
        raise DataError(f"series CSV {path} is empty or non-finite")
    return X


def series_to_json(X, path, meta=None) -> None:
    X = np.asarray(X, dtype=np.float64)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "series",
        "d": int(X.shape[0]),
        "n": int(X.shape[1]),
        "columns": X.T.tolist(),
        "meta": meta or {},
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def series_from_json(path):
    _require(path)
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("kind") != "series":
        raise DataError(f"{path} is not a series document")
    X = np.array(doc["columns"], dtype=np.float64).T
    return X, doc.get("meta", {})


def transition_path_to_json(path_obj: TransitionPath, path, meta=None) -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "transition_path",
        "n": path_obj.n,
        "d": path_obj.d,
        "matrices": path_obj.matrices.tolist(),
        "meta": meta or {},
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def transition_path_from_json(path):
    _require(path)
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("kind") != "transition_path":
        raise DataError(f"{path} is not a transition-path document")
    mats = np.array(doc["matrices"], dtype=np.float64)
    n = int(doc["n"])
    obj = TransitionPath(
        n=n, d=int(doc["d"]), matrices=mats, grid=np.arange(1, n + 1) / n
    )
    return obj, doc.get("meta", {})


def transition_path_to_csv(path_obj: TransitionPath, path) -> None:
    """Long-form CSV: columns i, row, col, value (one line per entry)."""
    with open(path, "w") as fh:
        fh.write("i,row,col,value\n")
        for i in range(1, path_obj.n + 1):
            A = path_obj.at_index(i)
            for r in range(path_obj.d):
                for c in range(path_obj.d):
                    fh.write(f"{i},{r},{c},{A[r, c]:.17g}\n")


def estimate_path_to_json(est: EstimatePath, path) -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "estimate_path",
        "method": est.method,
        "times": est.times.tolist(),
        "matrices": est.matrices.tolist(),
        "params": est.params,
        "failures": [[float(t), msg] for t, msg in est.failures],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def estimate_path_from_json(path) -> EstimatePath:
    _require(path)
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("kind") != "estimate_path":
        raise DataError(f"{path} is not an estimate-path document")
    return EstimatePath(
        times=np.array(doc["times"], dtype=np.float64),
        matrices=np.array(doc["matrices"], dtype=np.float64),
        method=doc["method"],
        params=doc.get("params", {}),
        failures=tuple((t, m) for t, m in doc.get("failures", [])),
    )


def estimate_path_to_csv_dir(est: EstimatePath, directory) -> list[str]:
    """One d x d CSV per time point, named by the grid index."""
    os.makedirs(directory, exist_ok=True)
    written = []
    for t, A in zip(est.times, est.matrices):
        name = os.path.join(directory, f"A_t{t:.6f}.csv")
        np.savetxt(name, A, delimiter=",", fmt="%.17g")
        written.append(name)
    return written


def error_table_to_csv(table: ErrorTable, path) -> None:
    with open(path, "w") as fh:
        fh.write("method,norm,mean,sd\n")
        for row in table.rows:
            fh.write(f"{row.method},{row.norm},{row.mean:.17g},{row.sd:.17g}\n")


def error_table_to_json(table: ErrorTable, path) -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "error_table",
        "rows": [asdict(r) for r in table.rows],
        "meta": table.meta,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def error_table_from_json(path) -> ErrorTable:
    _require(path)
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("kind") != "error_table":
        raise DataError(f"{path} is not an error-table document")
    rows = [ErrorRow(**r) for r in doc["rows"]]
    return ErrorTable(rows=rows, meta=doc.get("meta", {}))


def roc_to_csv(points: list[RocPoint], path) -> None:
    with open(path, "w") as fh:
        fh.write("tau,fpr,tpr,failures\n")
        for p in points:
            fh.write(f"{p.tau:.17g},{p.fpr:.17g},{p.tpr:.17g},{p.failures}\n")


def roc_to_json(points: list[RocPoint], path, meta=None) -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "roc",
        "points": [asdict(p) for p in points],
        "meta": meta or {},
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def roc_from_json(path):
    _require(path)
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("kind") != "roc":
        raise DataError(f"{path} is not a ROC document")
    return [RocPoint(**p) for p in doc["points"]], doc.get("meta", {})


def tuning_to_json(result: TuningResult, path, meta=None) -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "tuning",
        "grid": result.grid.tolist(),
        "mean_errors": result.mean_errors.tolist(),
        "selected": result.selected,
        "meta": meta or {},
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def tuning_from_json(path) -> TuningResult:
    _require(path)
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("kind") != "tuning":
        raise DataError(f"{path} is not a tuning document")
    return TuningResult(
        grid=np.array(doc["grid"], dtype=np.float64),
        mean_errors=np.array(doc["mean_errors"], dtype=np.float64),
        selected=float(doc["selected"]),
    )


def write_json(doc: dict, path) -> None:
    doc = {"schema_version": SCHEMA_VERSION, **doc}
    with open(path, "w") as fh:
        json.dump(doc, fh)


def read_json(path) -> dict:
    _require(path)
    with open(path) as fh:
        return json.load(fh)
