"""
CSV, binary and JSON export utilities.

CSV files are comma separated with a header row and LF line endings; floats are
written with 17 significant digits and missing values as empty fields. Nothing
time-dependent is written, so identical runs produce identical files.
"""

import csv
import json
import math
import os
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

PathLike = Union[str, Path]


def format_value(value: Any) -> str:
    """One CSV field: '%.17g' for floats, '' for None, 0/1 for booleans."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % float(value)
    return str(value)


def _prepare(path: PathLike) -> Path:
    path = Path(path)
    if path.parent and not path.parent.exists():
        os.makedirs(path.parent, exist_ok=True)
    return path


def export_csv(
    rows: Iterable[Dict[str, Any]],
    path: PathLike,
    columns: Optional[Sequence[str]] = None,
) -> str:
    """
    Export a list of row dicts to CSV.

    Parameters
    ----------
    rows    : one dict per row
    path    : output file path (parent directories are created)
    columns : column order; defaults to the keys in order of first appearance

    Returns the path of the written file.
    """
    rows = list(rows)
    if columns is None:
        columns = []
        for row in rows:
            for key in row:
                if key not in columns:
                    columns.append(key)
    if not columns:
        raise ValueError("No columns to export.")

    path = _prepare(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row.get(col)) for col in columns])
    return str(path)


def export_json(data: Any, path: PathLike, indent: int = 2) -> str:
    """Export data to JSON with sorted keys; numpy scalars and arrays become plain values."""

    def _default(obj):
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, (np.integer, np.floating, np.bool_)):
            return obj.item()
        return str(obj)

    path = _prepare(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(data, fh, indent=indent, sort_keys=True, default=_default, ensure_ascii=False, allow_nan=True)
        fh.write("\n")
    return str(path)


# ---------------------------------------------------------------------------
# Writers for run artifacts
# ---------------------------------------------------------------------------

def trajectory_rows(traj) -> List[Dict[str, Any]]:
    """step, eta_k, S_k, R_D(f_k), ||grad||^2 and ||f_k|| (where a snapshot exists)."""
    rows = []
    K = traj.gram
    for k in range(traj.max_steps + 1):
        alpha = traj.snapshots.get(k)
        norm = math.sqrt(max(float(alpha @ K @ alpha), 0.0)) if alpha is not None else None
        rows.append({
            "step": k,
            "eta": float(traj.etas[k]) if k < traj.max_steps else None,
            "cum_step": float(traj.cum_steps[k]),
            "risk": float(traj.risks[k]),
            "grad_sq_norm": float(traj.grad_sq_norms[k]) if k < len(traj.grad_sq_norms) else None,
            "norm": norm,
        })
    return rows


def export_trajectory(traj, path: PathLike) -> str:
    return export_csv(trajectory_rows(traj), path,
                      columns=["step", "eta", "cum_step", "risk", "grad_sq_norm", "norm"])


def export_snapshots(traj, path: PathLike) -> str:
    """
    Snapshot coefficients as one ASCII header line 'n count idx...' followed by
    count rows of n little-endian float64 values, in increasing idx order.
    """
    times = sorted(traj.snapshots)
    n = traj.dataset.n
    header = " ".join(str(v) for v in [n, len(times), *times]) + "\n"
    path = _prepare(path)
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        for t in times:
            fh.write(np.asarray(traj.snapshots[t], dtype="<f8").tobytes())
    return str(path)


def read_snapshots(path: PathLike) -> Dict[int, np.ndarray]:
    """Inverse of export_snapshots."""
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").split()
        n, count = int(header[0]), int(header[1])
        times = [int(v) for v in header[2:2 + count]]
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != n * count:
        raise ValueError(f"snapshot file holds {data.size} values, expected {n * count}")
    return {t: data[i * n:(i + 1) * n].copy() for i, t in enumerate(times)}


def export_rerm_path(entries, path: PathLike) -> str:
    rows = [{"lambda": e.lam, "risk": e.risk, "norm": e.norm, "objective": e.objective,
             "gap_bound": e.gap_bound} for e in entries]
    return export_csv(rows, path, columns=["lambda", "risk", "norm", "objective", "gap_bound"])


CV_REPORT_COLUMNS = ["t", "psi", "lambda", "val_risk", "test_risk", "selected", "train_risk"]
MIRROR_TRAJECTORY_COLUMNS = ["step", "loss", "bregman_to_reference", "relatively_smooth"]


def cv_report_rows(report) -> List[Dict[str, Any]]:
    times = list(reversed(report.grid.times))
    psi = dict(zip(times, report.grid.psi_values))
    rows = []
    for t in report.grid.times:
        rows.append({
            "t": t,
            "psi": psi[t],
            "lambda": report.matched_lambdas.get(t),
            "val_risk": report.validation_risks[t],
            "test_risk": report.test_risks.get(t),
            "selected": t == report.selected_time,
            "train_risk": report.train_risks.get(t),
        })
    return rows


def export_cv_report(report, path: PathLike) -> str:
    return export_csv(cv_report_rows(report), path, columns=CV_REPORT_COLUMNS)


def export_checks(results, path: PathLike) -> str:
    """One row per check: name, instances, violations, worst_slack, tolerance, passed."""
    return export_csv([r.as_row() for r in results], path,
                      columns=["name", "instances", "violations", "worst_slack", "tolerance", "passed"])


def export_mirror_trajectory(traj, path: PathLike) -> str:
    rows = []
    for step in range(traj.steps + 1):
        rows.append({
            "step": step,
            "loss": float(traj.losses[step]),
            "bregman_to_reference": (float(traj.bregman_to_reference[step])
                                     if traj.bregman_to_reference is not None else None),
            "relatively_smooth": traj.smooth_steps[step] if step < len(traj.smooth_steps) else None,
        })
    return export_csv(rows, path, columns=MIRROR_TRAJECTORY_COLUMNS)


def export_rates(rows: List[Dict[str, Any]], path: PathLike) -> str:
    return export_csv(rows, path)
