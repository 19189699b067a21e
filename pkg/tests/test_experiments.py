"""
Tests for configuration parsing, synthetic problems, the experiment runner and
the command-line entry point.
"""

import json
import math

import numpy as np
import pytest
from click.testing import CliRunner

from experiments import (
    CONFIG_KEYS,
    REGRESSION_TARGETS,
    build_config,
    describe_keys,
    generate_classification,
    generate_regression,
    load_config,
    parse_config_text,
    parse_value,
    truncated_noise_variance,
)
import experiments.runner as runner
from experiments.runner import (
    EXIT_CHECK_FAILED,
    EXIT_OK,
    EXIT_USAGE,
    cv_sanity_checks,
    rate_table,
    run,
)
from losses import LossSpec
from main import cli
from utils.errors import ConfigError, GridError, InputDomainError, ParameterError, RangeError
from utils.export import read_snapshots
from verify import CheckRecorder

ONE_POINT = """
mode = train
dataset.kind = explicit
dataset.xs = 0
dataset.ys = 1
kernel.kind = gaussian
kernel.sigma = 1
loss.kind = least_squares
gd.eta = 0.5
gd.steps = 1
"""


def _write(tmp_path, text, name="run.conf"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# experiments/config.py
# ---------------------------------------------------------------------------

class TestParseValue:
    def test_scalars(self):
        assert parse_value("gd.eta", " 0.25 ") == 0.25
        assert parse_value("gd.steps", "40") == 40
        assert parse_value("gd.strict", "off") is False
        assert parse_value("mode", "cv") == "cv"

    def test_lists(self):
        assert parse_value("cv.grid", "1, 2,4") == (1, 2, 4)
        assert parse_value("rerm.lambdas", "0.1,1") == (0.1, 1.0)
        assert parse_value("dataset.xs", "0,1; 2,3") == ((0.0, 1.0), (2.0, 3.0))

    @pytest.mark.parametrize("key,text", [
        ("gd.eta", "fast"),
        ("gd.eta", "inf"),
        ("gd.steps", "1.5"),
        ("gd.strict", "maybe"),
        ("mode", "predict"),
        ("dataset.xs", "0,1; 2"),
    ])
    def test_errors_carry_the_key(self, key, text):
        with pytest.raises(ConfigError) as info:
            parse_value(key, text)
        assert info.value.key == key

    def test_unknown_key(self):
        with pytest.raises(ConfigError) as info:
            parse_value("gd.momentum", "0.9")
        assert info.value.key == "gd.momentum"


class TestParseConfigText:
    def test_comments_and_blank_lines(self):
        values = parse_config_text("# header\n\nseed = 3   # trailing\nmode = rates\n")
        assert values == {"seed": 3, "mode": "rates"}

    def test_missing_equals(self):
        with pytest.raises(ConfigError):
            parse_config_text("seed 3\n")

    def test_duplicate_key(self):
        with pytest.raises(ConfigError) as info:
            parse_config_text("seed = 1\nseed = 2\n")
        assert info.value.key == "seed"


class TestBuildConfig:
    def test_defaults(self):
        config = build_config({})
        assert config.mode == "train"
        assert config.gd.eta == 0.5
        assert config.cv.grid == "dyadic"
        assert config.verify.cv_seeds == 20
        # the default sweep spans sample sizes 10 to 500
        assert (config.verify.n_min, config.verify.n_max) == (10, 500)
        assert config.rates.q == (2.0,)

    def test_cv_settings_follow_gd(self):
        config = build_config({"gd.eta": 0.25, "seed": 4, "cv.grid": (1, 2, 4), "cv.n1": 10})
        assert config.cv.eta == 0.25
        assert config.cv.seed == 4
        assert config.cv.grid == (1, 2, 4)
        assert config.cv.n1 == 10 and config.cv.n2 is None

    def test_verify_seed_follows_run_seed(self):
        assert build_config({"seed": 9}).verify.seed == 9

    @pytest.mark.parametrize("values,key", [
        ({"seed": -1}, "seed"),
        ({"gd.eta": 0.0}, "gd.eta"),
        ({"gd.decay": 1.0}, "gd.decay"),
        ({"kernel.sigma": -1.0}, "kernel.sigma"),
        ({"loss.tau": 1.0}, "loss.tau"),
        ({"dataset.n": 1}, "dataset.n"),
        ({"loss.kind": "logistic_classification"}, "loss.kind"),
        ({"dataset.kind": "explicit"}, "dataset.xs"),
        ({"dataset.kind": "explicit", "dataset.xs": ((0.0,),), "dataset.ys": (1.0, 2.0)}, "dataset.ys"),
        ({"rates.seeds": 0}, "rates.seeds"),
    ])
    def test_validation(self, values, key):
        with pytest.raises(ConfigError) as info:
            build_config(values)
        assert info.value.key == key

    def test_invalid_verify_settings(self):
        with pytest.raises(ConfigError) as info:
            build_config({"verify.p_values": (1.1,)})
        assert info.value.key == "verify"

    def test_with_overrides(self):
        config = build_config({"seed": 1, "gd.steps": 7})
        changed = config.with_overrides(seed=5, out="elsewhere")
        assert changed.seed == 5 and changed.out == "elsewhere"
        assert changed.gd.steps == 7
        assert config.seed == 1


class TestLoadConfig:
    def test_file_and_overrides(self, tmp_path):
        path = _write(tmp_path, ONE_POINT)
        config = load_config(path, {"seed": 2, "out": None})
        assert config.seed == 2
        assert config.out == "out"
        assert config.dataset.xs == ((0.0,),)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "absent.conf")

    def test_describe_keys(self):
        keys = describe_keys()
        assert set(keys) == set(CONFIG_KEYS)
        assert keys["gd.eta"] == {"desc": CONFIG_KEYS["gd.eta"]["desc"], "type": "float", "default": 0.5}


# ---------------------------------------------------------------------------
# experiments/synthetic.py
# ---------------------------------------------------------------------------

class TestSynthetic:
    def test_regression_deterministic(self):
        a = generate_regression(50, 2, "bump", 0.2, seed=3)
        b = generate_regression(50, 2, "bump", 0.2, seed=3)
        np.testing.assert_array_equal(a.dataset.xs, b.dataset.xs)
        np.testing.assert_array_equal(a.dataset.ys, b.dataset.ys)

    def test_seeds_differ(self):
        a = generate_regression(50, seed=1)
        b = generate_regression(50, seed=2)
        assert not np.array_equal(a.dataset.ys, b.dataset.ys)

    @pytest.mark.parametrize("target", sorted(REGRESSION_TARGETS))
    def test_noise_is_truncated(self, target):
        problem = generate_regression(400, 2, target, 0.3, seed=0)
        residual = problem.dataset.ys - problem.bayes_function(problem.dataset.xs)
        assert np.max(np.abs(residual)) <= 6.0 * 0.3 + 1e-12
        if REGRESSION_TARGETS[target]["bound"] is not None:
            assert np.max(np.abs(problem.dataset.ys)) <= problem.label_bound + 1e-12

    def test_zero_target(self):
        problem = generate_regression(20, 1, "zero", 0.0, seed=0)
        np.testing.assert_array_equal(problem.dataset.ys, np.zeros(20))
        assert problem.bayes_risk == 0.0

    def test_bayes_risk_is_noise_variance(self):
        problem = generate_regression(20, 1, "sine", 0.5, seed=0)
        assert problem.bayes_risk == pytest.approx(truncated_noise_variance(0.5))
        assert problem.bayes_risk < 0.25

    def test_fresh_sample_is_independent_of_training_draw(self):
        problem = generate_regression(30, 1, "sine", 0.1, seed=5)
        test = problem.sample(30, seed=5)
        assert not np.array_equal(test.xs, problem.dataset.xs)
        np.testing.assert_array_equal(test.ys, problem.sample(30, seed=5).ys)

    def test_classification_labels(self):
        problem = generate_classification(100, 2, "linear", seed=1)
        assert set(np.unique(problem.dataset.ys)) <= {-1.0, 1.0}
        assert 0.0 < problem.bayes_risk < math.log(2.0)

    def test_hard_profile_has_small_bayes_risk(self):
        easy = generate_classification(10, 1, "symmetric", seed=0)
        hard = generate_classification(10, 1, "hard", seed=0)
        assert hard.bayes_risk < easy.bayes_risk

    def test_monte_carlo_risk_of_bayes_function(self):
        problem = generate_regression(10, 1, "sine", 0.2, seed=0)
        mean, err = problem.monte_carlo_risk(LossSpec("least_squares"), problem.bayes_function, n=20_000)
        assert abs(mean - problem.bayes_risk) <= 5 * err

    def test_errors(self):
        with pytest.raises(ParameterError):
            generate_regression(10, target="cubic")
        with pytest.raises(ParameterError):
            generate_classification(10, profile="noisy")
        with pytest.raises(InputDomainError):
            generate_regression(1)
        with pytest.raises(InputDomainError):
            generate_regression(10).sample(0, seed=0)


# ---------------------------------------------------------------------------
# experiments/runner.py
# ---------------------------------------------------------------------------

class TestRunner:
    def test_train_one_point(self, tmp_path):
        config = load_config(_write(tmp_path, ONE_POINT), {"out": str(tmp_path / "out")})
        result = run(config, workers=1)
        assert result.exit_code == EXIT_OK
        out = tmp_path / "out"
        lines = (out / "trajectory.csv").read_text().splitlines()
        assert lines == [
            "step,eta,cum_step,risk,grad_sq_norm,norm",
            "0,0.5,0,1,4,0",
            "1,,0.5,0,0,1",
        ]
        snaps = read_snapshots(out / "snapshots.bin")
        np.testing.assert_array_equal(snaps[1], [1.0])
        summary = json.loads((out / "summary.json").read_text())
        assert summary["final_risk"] == 0.0
        assert summary["exit_code"] == 0

    def test_train_with_rerm_path(self, tmp_path):
        text = ONE_POINT + "rerm.lambdas = 0.5, 1, 2\n"
        config = load_config(_write(tmp_path, text), {"out": str(tmp_path / "out")})
        result = run(config, workers=1)
        assert result.exit_code == EXIT_OK
        rows = (tmp_path / "out" / "rerm_path.csv").read_text().splitlines()
        assert rows[0] == "lambda,risk,norm,objective,gap_bound"
        assert len(rows) == 4

    def test_step_size_above_cap(self, tmp_path):
        text = ONE_POINT.replace("gd.eta = 0.5", "gd.eta = 2")
        config = load_config(_write(tmp_path, text), {"out": str(tmp_path / "out")})
        result = run(config, workers=1)
        assert result.exit_code == EXIT_USAGE
        assert "exceeds" in result.error
        assert not (tmp_path / "out" / "summary.json").exists()

    def test_step_size_above_cap_warn_mode(self, tmp_path):
        text = ONE_POINT.replace("gd.eta = 0.5", "gd.eta = 2") + "gd.strict = false\n"
        config = load_config(_write(tmp_path, text), {"out": str(tmp_path / "out")})
        result = run(config, workers=1)
        assert result.exit_code == EXIT_OK
        assert result.summary["cap_violations"] == 1

    def test_cv_mode(self, tmp_path):
        config = build_config({"mode": "cv", "dataset.n": 60, "dataset.test_n": 100, "kernel.sigma": 0.5,
                               "cv.match_lambdas": False, "out": str(tmp_path / "cv")})
        result = run(config, workers=2)
        assert result.exit_code == EXIT_OK
        assert result.summary["n1"] == 30
        assert result.summary["selected_time"] in result.summary["grid"]
        rows = (tmp_path / "cv" / "cv_report.csv").read_text().splitlines()
        assert len(rows) == 1 + len(result.summary["grid"])
        assert rows[0] == "t,psi,lambda,val_risk,test_risk,selected,train_risk"
        assert sum(row.split(",")[5] == "1" for row in rows[1:]) == 1
        assert result.summary["bayes_risk_error"] == 0.0

    def test_cv_mode_classification_reports_monte_carlo_error(self, tmp_path):
        config = build_config({"mode": "cv", "dataset.kind": "classification", "dataset.n": 40,
                               "loss.kind": "logistic_classification", "cv.match_lambdas": False,
                               "out": str(tmp_path / "cv")})
        result = run(config, workers=1)
        assert result.exit_code == EXIT_OK
        assert 0.0 < result.summary["bayes_risk_error"] < result.summary["bayes_risk"]
        summary = json.loads((tmp_path / "cv" / "summary.json").read_text())
        assert summary["bayes_risk_error"] == result.summary["bayes_risk_error"]

    def test_rates_mode(self, tmp_path):
        config = build_config({"mode": "rates", "rates.beta": (1.0, 0.5), "rates.theta": (1.0, 0.0),
                               "out": str(tmp_path / "rates")})
        result = run(config)
        assert result.exit_code == EXIT_OK
        assert len(result.rates) == 4
        first = result.rates[0]
        assert (first["beta"], first["theta"]) == (1.0, 1.0)
        assert first["alpha"] == pytest.approx(2 / 3)
        assert (tmp_path / "rates" / "rates.csv").exists()

    def test_rate_table_q1_theta0(self):
        config = build_config({"rates.beta": (0.5,), "rates.gamma": (0.5,), "rates.theta": (0.0,),
                               "rates.q": (1.0,)})
        (row,) = rate_table(config)
        assert row["alpha"] == pytest.approx(0.4)

    def test_invalid_rate_parameters(self):
        with pytest.raises(ConfigError) as info:
            build_config({"mode": "rates", "rates.gamma": (1.0,)})
        assert info.value.key == "rates.gamma"
        with pytest.raises(ConfigError) as info:
            build_config({"mode": "rates", "rates.q": ()})
        assert info.value.key == "rates.q"

    @pytest.mark.parametrize("error", [RangeError("no lambda", bracket=(0.0, 1.0)), InputDomainError("empty"),
                                       GridError("eta above 1")])
    def test_computation_errors_exit_1(self, tmp_path, monkeypatch, error):

        def failing_mode(config, result, workers):
            raise error

        monkeypatch.setitem(runner.MODES, "train", failing_mode)
        result = run(build_config({"out": str(tmp_path / "t")}))
        assert result.exit_code == EXIT_CHECK_FAILED
        assert result.error == str(error)

    def test_empirical_rate_needs_least_squares_regression(self, tmp_path):
        config = build_config({"mode": "rates", "rates.empirical": True, "dataset.kind": "classification",
                               "loss.kind": "logistic_classification", "out": str(tmp_path / "r")})
        result = run(config)
        assert result.exit_code == EXIT_USAGE

    def test_empirical_rate(self, tmp_path):
        config = build_config({"mode": "rates", "rates.empirical": True, "rates.n_values": (32, 64),
                               "rates.seeds": 2, "rates.test_n": 200, "kernel.sigma": 0.5,
                               "out": str(tmp_path / "r")})
        result = run(config, workers=2)
        assert result.exit_code == EXIT_OK
        assert [row["n"] for row in result.empirical] == [32, 64]
        assert "empirical_slope" in result.summary
        assert (tmp_path / "r" / "empirical_rate.csv").exists()

    def test_cv_sanity_checks_structure(self):
        results = cv_sanity_checks(1, base_seed=0, workers=1)
        assert [r.name for r in results] == ["cv_realizable_top_half", "cv_noise_bottom_half",
                                             "cv_selection_vs_best"]
        for res in results:
            assert res.instances == 1
            assert 0.0 <= res.diagnostics["passing_fraction"] <= 1.0

    def test_verify_failure_sets_exit_code(self, tmp_path, monkeypatch):

        def failing_suite(settings, workers=None):
            rec = CheckRecorder("always_fails", 0.0)
            rec.record("x", 1.0, 0.0)
            return [rec.result()]

        monkeypatch.setattr(runner, "run_suite", failing_suite)
        config = build_config({"mode": "verify", "verify.cv_seeds": 0, "out": str(tmp_path / "v")})
        result = run(config)
        assert result.exit_code == EXIT_CHECK_FAILED
        assert result.summary["failed"] == ["always_fails"]
        assert (tmp_path / "v" / "checks.csv").read_text().splitlines()[1].startswith("always_fails,1,1,")
        mirror = (tmp_path / "v" / "mirror_quadratic_p2.csv").read_text().splitlines()
        assert mirror[0] == "step,loss,bregman_to_reference,relatively_smooth"
        assert len(mirror) == 1 + 201
        assert sorted(p.name for p in (tmp_path / "v").glob("mirror_*.csv")) == [
            "mirror_quadratic_p1.5.csv", "mirror_quadratic_p2.csv", "mirror_quadratic_p3.csv", "mirror_quadratic_p4.csv"]


# ---------------------------------------------------------------------------
# main.py
# ---------------------------------------------------------------------------

class TestCli:
    def test_train_command(self, tmp_path):
        path = _write(tmp_path, ONE_POINT)
        result = CliRunner().invoke(cli, ["train", "-c", str(path), "-o", str(tmp_path / "out"), "-w", "1"])
        assert result.exit_code == 0, result.output
        assert (tmp_path / "out" / "trajectory.csv").exists()

    def test_subcommand_overrides_mode(self, tmp_path):
        path = _write(tmp_path, ONE_POINT)
        result = CliRunner().invoke(cli, ["rates", "-c", str(path), "-o", str(tmp_path / "out")])
        assert result.exit_code == 0, result.output
        assert (tmp_path / "out" / "rates.csv").exists()

    def test_config_error_exits_2(self, tmp_path):
        path = _write(tmp_path, "gd.eta = fast\n")
        result = CliRunner().invoke(cli, ["run", "-c", str(path)])
        assert result.exit_code == 2
        assert "gd.eta" in result.output

    def test_unknown_key_exits_2(self, tmp_path):
        path = _write(tmp_path, "gd.momentum = 0.9\n")
        result = CliRunner().invoke(cli, ["run", "-c", str(path)])
        assert result.exit_code == 2

    def test_keys_command(self):
        result = CliRunner().invoke(cli, ["keys"])
        assert result.exit_code == 0
        assert "gd.eta" in result.output
