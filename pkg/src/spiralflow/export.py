"""Text formats for trajectories, tables and figure data.

Floats are written with 17 significant digits so every double survives a
write/read cycle unchanged.
"""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from .analysis import PathSamples

TRAJECTORY_COLUMNS = (
    "s", "rho", "theta_unwrapped", "r", "x", "y", "f_sign", "f_log", "grad_factored",
)


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return "%.17g" % float(v)


def write_table(fh, columns, rows) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])


def trajectory_rows(traj):
    with np.errstate(over="ignore"):
        grad = np.exp(traj.grad_log)
    cols = (
        traj.s, traj.rho, traj.theta, traj.r, traj.x, traj.y,
        traj.f_sign.astype(int), traj.f_log, grad,
    )
    return zip(*(c.tolist() for c in cols))


def write_trajectory_csv(fh, traj) -> None:
    write_table(fh, TRAJECTORY_COLUMNS, trajectory_rows(traj))


def trajectory_json(traj, report: dict | None = None) -> dict:
    cols = dict(zip(TRAJECTORY_COLUMNS, (list(c) for c in zip(*trajectory_rows(traj)))))
    out = {
        "stop_reason": traj.stop_reason.value,
        "field": traj.field_kind.value,
        "convention": traj.convention.value,
        "columns": cols,
    }
    if report is not None:
        out["report"] = report
    return out


def jsonable(x):
    if isinstance(x, dict):
        return {k: jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2) + "\n"


def read_table(fh) -> dict[str, list[str]]:
    rows = list(csv.reader(fh))
    if not rows:
        raise ValueError("empty table")
    header, body = rows[0], rows[1:]
    return {name: [r[i] for r in body] for i, name in enumerate(header)}


def read_trajectory_csv(source) -> PathSamples:
    """Path samples from a trajectory CSV (file path, open file or CSV text)."""
    if isinstance(source, str) and "\n" in source:
        table = read_table(io.StringIO(source))
    elif hasattr(source, "read"):
        table = read_table(source)
    else:
        with open(source, newline="") as fh:
            table = read_table(fh)
    missing = [c for c in ("s", "rho", "theta_unwrapped") if c not in table]
    if missing:
        raise ValueError(f"trajectory CSV lacks columns {missing}")
    return PathSamples(
        np.array([float(v) for v in table["rho"]]),
        np.array([float(v) for v in table["theta_unwrapped"]]),
        np.array([float(v) for v in table["s"]]),
    )
