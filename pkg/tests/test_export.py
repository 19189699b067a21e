"""
Tests for the CSV, JSON and snapshot writers (utils/export.py).
"""

import json
import math

import numpy as np
import pytest

from kernels import GaussianKernel
from learning import CvSettings, Dataset, GdConfig, cv_pipeline, rerm_risk_path, run_gd
from losses import LossSpec
from mirror import LpSpace, QuadraticObjective, run_mirror_descent
from utils.export import (
    cv_report_rows,
    export_checks,
    export_csv,
    export_cv_report,
    export_json,
    export_mirror_trajectory,
    export_rerm_path,
    export_snapshots,
    export_trajectory,
    format_value,
    read_snapshots,
    trajectory_rows,
)
from verify import CheckRecorder

LS = LossSpec("least_squares")


def _traj(record_times=None, steps=8):
    rng = np.random.default_rng(0)
    xs = rng.uniform(-1, 1, (12, 2))
    ds = Dataset(xs, np.cos(xs[:, 0]) + 0.1 * rng.standard_normal(12))
    return run_gd(LS, ds, GaussianKernel(0.7), GdConfig(0.5, steps, record_times=record_times))


class TestFormatValue:
    def test_float_round_trips(self):
        for value in (0.1, 1 / 3, -2.5e-300, 1e300):
            assert float(format_value(value)) == value

    def test_integers_and_booleans(self):
        assert format_value(3) == "3"
        assert format_value(np.int64(7)) == "7"
        assert format_value(True) == "1"
        assert format_value(np.bool_(False)) == "0"

    def test_none_is_empty(self):
        assert format_value(None) == ""

    def test_special_floats(self):
        assert format_value(math.inf) == "inf"
        assert format_value(np.float64(0.5)) == "0.5"


class TestExport:
    def test_export_csv_creates_parent_directories(self, tmp_path):
        path = export_csv([{"a": 1, "b": 0.25}], tmp_path / "nested" / "t.csv")
        assert (tmp_path / "nested" / "t.csv").read_text() == "a,b\n1,0.25\n"
        assert path.endswith("t.csv")

    def test_export_csv_column_order_and_missing_values(self, tmp_path):
        export_csv([{"a": 1}, {"b": 2, "a": None}], tmp_path / "t.csv")
        assert (tmp_path / "t.csv").read_text().splitlines() == ["a,b", "1,", ",2"]

    def test_export_csv_explicit_columns(self, tmp_path):
        export_csv([{"a": 1, "b": 2}], tmp_path / "t.csv", columns=["b"])
        assert (tmp_path / "t.csv").read_text() == "b\n2\n"

    def test_export_csv_empty_raises(self, tmp_path):
        with pytest.raises(ValueError):
            export_csv([], tmp_path / "t.csv")

    def test_export_json_sorted_and_numpy_aware(self, tmp_path):
        export_json({"b": np.arange(2), "a": np.float64(0.5)}, tmp_path / "s.json")
        text = (tmp_path / "s.json").read_text()
        assert text.index('"a"') < text.index('"b"')
        assert json.loads(text) == {"a": 0.5, "b": [0, 1]}


class TestTrajectoryExport:
    def test_rows(self):
        traj = _traj()
        rows = trajectory_rows(traj)
        assert len(rows) == 9
        assert rows[0]["cum_step"] == 0.0 and rows[0]["norm"] == 0.0
        assert rows[-1]["eta"] is None
        assert rows[4]["cum_step"] == 2.0

    def test_norm_only_at_snapshots(self):
        rows = trajectory_rows(_traj(record_times=[4]))
        assert [k for k, row in enumerate(rows) if row["norm"] is not None] == [0, 4, 8]

    def test_identical_runs_give_identical_files(self, tmp_path):
        a = export_trajectory(_traj(), tmp_path / "a.csv")
        b = export_trajectory(_traj(), tmp_path / "b.csv")
        assert open(a, "rb").read() == open(b, "rb").read()

    def test_snapshots_read_back(self, tmp_path):
        traj = _traj(record_times=[2, 5])
        path = export_snapshots(traj, tmp_path / "snap.bin")
        with open(path, "rb") as fh:
            assert fh.readline() == b"12 4 0 2 5 8\n"
        back = read_snapshots(path)
        assert sorted(back) == [0, 2, 5, 8]
        for t, alpha in traj.snapshots.items():
            np.testing.assert_array_equal(back[t], alpha)

    def test_truncated_snapshot_file(self, tmp_path):
        path = tmp_path / "snap.bin"
        export_snapshots(_traj(), path)
        data = path.read_bytes()
        path.write_bytes(data[:-8])
        with pytest.raises(ValueError):
            read_snapshots(path)


class TestReportExport:
    def test_rerm_path(self, tmp_path):
        traj = _traj()
        path = rerm_risk_path(LS, traj.dataset, traj.kernel, [0.1, 1.0])
        lines = open(export_rerm_path(path, tmp_path / "p.csv")).read().splitlines()
        assert lines[0] == "lambda,risk,norm,objective,gap_bound"
        assert lines[1].startswith("0.10000000000000001,")

    def test_cv_report(self, tmp_path):
        rng = np.random.default_rng(1)
        xs = rng.uniform(-1, 1, (40, 1))
        ds = Dataset(xs, np.sin(3 * xs[:, 0]))
        report = cv_pipeline(LS, ds, GaussianKernel(0.5), CvSettings(match_lambdas=False)).report
        rows = cv_report_rows(report)
        assert [r["t"] for r in rows] == list(report.grid.times)
        assert rows[0]["psi"] == 2.0
        assert [r["selected"] for r in rows].count(True) == 1
        assert rows[0]["test_risk"] is None
        lines = open(export_cv_report(report, tmp_path / "cv.csv")).read().splitlines()
        assert lines[0] == "t,psi,lambda,val_risk,test_risk,selected,train_risk"

    def test_checks(self, tmp_path):
        rec = CheckRecorder("demo", 1e-9)
        rec.record("a", 0.0, 0.5)
        lines = open(export_checks([rec.result()], tmp_path / "c.csv")).read().splitlines()
        assert lines == ["name,instances,violations,worst_slack,tolerance,passed",
                         "demo,1,0,0.5,1.0000000000000001e-09,1"]

    def test_mirror_trajectory(self, tmp_path):
        space = LpSpace.uniform(2.0, 1)
        obj = QuadraticObjective.diagonal([1.0], [1.0])
        traj = run_mirror_descent(obj, space.point([0.0]), 0.5, 2, smoothness=2.0,
                                  reference=space.point([1.0]))
        lines = open(export_mirror_trajectory(traj, tmp_path / "m.csv")).read().splitlines()
        assert lines == ["step,loss,bregman_to_reference,relatively_smooth",
                         "0,1,0.5,1", "1,0,0,1", "2,0,0,"]
