"""
Unit tests for kernel gradient descent (learning/gradient_descent.py).
"""

import numpy as np
import pytest

from kernels import GaussianKernel, LinearKernel, PolynomialKernel, RkhsFunction
from learning import (
    Dataset,
    GdConfig,
    cumulative_step_sum,
    empirical_risk,
    gd_step,
    interpolate,
    risk_gradient_coeffs,
    run_gd,
    smoothness_of_risk,
    step_size_cap,
)
from losses import LossSpec
from utils.errors import ContractError, InputDomainError, NumericError, ParameterError, StepSizeError

LS = LossSpec("least_squares")


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _one_point():
    """n = 1, k(x, x) = 1, y = 1."""
    return Dataset([[0.0]], [1.0]), GaussianKernel(1.0)


def _random_problem(n=20, seed=0):
    rng = np.random.default_rng(seed)
    xs = rng.uniform(-1, 1, (n, 2))
    ys = np.sin(3 * xs[:, 0]) + 0.1 * rng.standard_normal(n)
    return Dataset(xs, ys), GaussianKernel(0.7)


# ---------------------------------------------------------------------------
# Dataset
# ---------------------------------------------------------------------------

class TestDataset:
    def test_shapes(self):
        ds = Dataset([[0.0, 1.0], [2.0, 0.0]], [1.0, -1.0])
        assert ds.n == 2 and len(ds) == 2 and ds.dimension == 2
        assert ds.radius() == pytest.approx(2.0)
        assert ds.label_bound() == 1.0

    def test_flat_inputs_are_one_dimensional(self):
        assert Dataset([0.1, 0.2, 0.3], [1, 2, 3]).dimension == 1

    def test_label_count_mismatch(self):
        with pytest.raises(InputDomainError):
            Dataset([[0.0], [1.0]], [1.0])

    def test_non_finite_labels(self):
        with pytest.raises(InputDomainError):
            Dataset([[0.0]], [float("nan")])

    def test_arrays_are_read_only(self):
        ds = Dataset([[0.0]], [1.0])
        with pytest.raises(ValueError):
            ds.ys[0] = 2.0


# ---------------------------------------------------------------------------
# Risk and gradient
# ---------------------------------------------------------------------------

class TestEmpiricalRisk:
    def test_zero_function(self):
        ds = Dataset([[0.0], [1.0]], [1.0, -1.0])
        f = RkhsFunction.zero(GaussianKernel(1.0), ds.xs)
        assert empirical_risk(LS, ds, f) == pytest.approx(1.0)

    def test_perfect_interpolant(self):
        ds = Dataset([[1.0], [2.0]], [1.0, 2.0])
        f = RkhsFunction(ds.xs, [0.2, 0.4], LinearKernel())
        assert empirical_risk(LS, ds, f) == pytest.approx(0.0, abs=1e-15)

    def test_two_point_hand_example(self):
        ds = Dataset([[1.0], [2.0]], [1.0, 1.0])
        f = RkhsFunction(ds.xs, [0.5, 0.0], LinearKernel())
        assert empirical_risk(LS, ds, f) == pytest.approx(0.125)

    def test_function_off_the_support(self):
        ds = Dataset([[1.0], [2.0]], [1.0, 2.0])
        f = RkhsFunction([[1.0]], [1.0], LinearKernel())
        assert empirical_risk(LS, ds, f) == pytest.approx(0.0, abs=1e-15)


class TestRiskGradient:
    def test_zero_at_interpolant(self):
        ds = Dataset([[1.0], [2.0]], [1.0, 2.0])
        f = RkhsFunction(ds.xs, [0.2, 0.4], LinearKernel())
        np.testing.assert_allclose(risk_gradient_coeffs(LS, ds, f), 0.0, atol=1e-15)

    def test_one_point(self):
        ds, kernel = _one_point()
        g = risk_gradient_coeffs(LS, ds, RkhsFunction.zero(kernel, ds.xs))
        np.testing.assert_allclose(g, [-2.0])

    def test_support_mismatch(self):
        ds, kernel = _one_point()
        with pytest.raises(ContractError):
            risk_gradient_coeffs(LS, ds, RkhsFunction.zero(kernel, [[1.0]]))


class TestGdStep:
    def test_zero_gradient_is_stationary(self):
        ds, kernel = _one_point()
        f = RkhsFunction(ds.xs, [0.3], kernel)
        np.testing.assert_array_equal(gd_step(f, np.zeros(1), 0.5).coeffs, [0.3])

    def test_one_point_step(self):
        ds, kernel = _one_point()
        f = gd_step(RkhsFunction.zero(kernel, ds.xs), [-2.0], 0.5)
        np.testing.assert_allclose(f.coeffs, [1.0])
        assert empirical_risk(LS, ds, f) == pytest.approx(0.0)

    def test_nan_gradient(self):
        ds, kernel = _one_point()
        with pytest.raises(NumericError):
            gd_step(RkhsFunction.zero(kernel, ds.xs), [float("nan")], 0.5)

    def test_nonpositive_step(self):
        ds, kernel = _one_point()
        with pytest.raises(ParameterError):
            gd_step(RkhsFunction.zero(kernel, ds.xs), [1.0], 0.0)


# ---------------------------------------------------------------------------
# Step-size cap
# ---------------------------------------------------------------------------

class TestStepSizeCap:
    def test_gaussian_least_squares(self):
        ds, kernel = _one_point()
        assert smoothness_of_risk(LS, kernel, ds.xs) == 2.0
        assert step_size_cap(LS, kernel, ds.xs) == 0.5

    def test_linear_kernel_uses_data_radius(self):
        xs = [[1.0], [-3.0]]
        assert step_size_cap(LS, LinearKernel(), xs) == pytest.approx(1.0 / 18.0)

    def test_data_local_not_smaller_than_global(self):
        ds, _ = _random_problem()
        kernel = PolynomialKernel(2, 1.0)
        assert step_size_cap(LS, kernel, ds.xs, "data_local") >= step_size_cap(LS, kernel, ds.xs, "global")

    def test_unknown_bound(self):
        ds, kernel = _one_point()
        with pytest.raises(ParameterError):
            step_size_cap(LS, kernel, ds.xs, "local")


# ---------------------------------------------------------------------------
# GdConfig and run_gd
# ---------------------------------------------------------------------------

class TestGdConfig:
    def test_decayed_schedule(self):
        cfg = GdConfig(step_sizes=0.5, max_steps=4, decay=0.5)
        np.testing.assert_allclose(cfg.etas(), 0.5 * np.arange(1, 5) ** -0.5)

    def test_explicit_list_too_short(self):
        with pytest.raises(ParameterError):
            GdConfig(step_sizes=[0.1, 0.1], max_steps=3)

    def test_decay_with_list_rejected(self):
        with pytest.raises(ParameterError):
            GdConfig(step_sizes=[0.1, 0.1], max_steps=2, decay=0.3)

    def test_decay_out_of_range(self):
        with pytest.raises(ParameterError):
            GdConfig(step_sizes=0.1, max_steps=2, decay=1.0)

    def test_negative_steps(self):
        with pytest.raises(ParameterError):
            GdConfig(step_sizes=0.1, max_steps=-1)

    def test_snapshot_times_keep_endpoints(self):
        cfg = GdConfig(step_sizes=0.1, max_steps=10, record_times=[4, 2])
        assert cfg.snapshot_times() == (0, 2, 4, 10)


class TestRunGd:
    def test_zero_steps(self):
        ds, kernel = _one_point()
        traj = run_gd(LS, ds, kernel, GdConfig(0.5, 0))
        assert traj.max_steps == 0
        np.testing.assert_array_equal(traj.coefficients(0), [0.0])
        np.testing.assert_allclose(traj.risks, [1.0])

    def test_one_point_at_the_cap(self):
        ds, kernel = _one_point()
        traj = run_gd(LS, ds, kernel, GdConfig(0.5, 1))
        np.testing.assert_allclose(traj.risks, [1.0, 0.0])
        np.testing.assert_allclose(traj.coefficients(1), [1.0])

    def test_one_point_two_quarter_steps(self):
        ds, kernel = _one_point()
        traj = run_gd(LS, ds, kernel, GdConfig(0.25, 2))
        np.testing.assert_allclose(traj.coefficients(2), [0.75])
        assert traj.risks[2] == pytest.approx(0.0625)

    def test_strict_cap_violation(self):
        ds, kernel = _one_point()
        with pytest.raises(StepSizeError):
            run_gd(LS, ds, kernel, GdConfig(0.6, 3))

    def test_warn_mode_flags_violations(self):
        ds, kernel = _one_point()
        traj = run_gd(LS, ds, kernel, GdConfig(0.6, 3, strict=False))
        assert traj.cap_violations == [0, 1, 2]

    def test_step_cap_violation_is_a_value_error(self):
        assert issubclass(StepSizeError, ValueError)

    def test_risk_is_non_increasing(self):
        ds, kernel = _random_problem()
        traj = run_gd(LS, ds, kernel, GdConfig(0.5, 200))
        assert np.all(np.diff(traj.risks) <= 1e-12)

    def test_logistic_risk_is_non_increasing(self):
        rng = np.random.default_rng(3)
        xs = rng.uniform(-1, 1, (30, 2))
        ds = Dataset(xs, np.where(xs[:, 0] > 0, 1.0, -1.0))
        loss = LossSpec("logistic_classification")
        cap = step_size_cap(loss, GaussianKernel(0.5), ds.xs)
        traj = run_gd(loss, ds, GaussianKernel(0.5), GdConfig(cap, 100))
        assert np.all(np.diff(traj.risks) <= 1e-12)

    def test_replay_between_snapshots(self):
        ds, kernel = _random_problem()
        full = run_gd(LS, ds, kernel, GdConfig(0.5, 30))
        sparse = run_gd(LS, ds, kernel, GdConfig(0.5, 30, record_times=[10]))
        assert set(sparse.snapshots) == {0, 10, 30}
        np.testing.assert_allclose(sparse.coefficients(17), full.coefficients(17), rtol=1e-12, atol=1e-14)

    def test_coefficients_out_of_range(self):
        ds, kernel = _one_point()
        traj = run_gd(LS, ds, kernel, GdConfig(0.5, 1))
        with pytest.raises(InputDomainError):
            traj.coefficients(2)

    def test_deterministic(self):
        ds, kernel = _random_problem()
        a = run_gd(LS, ds, kernel, GdConfig(0.5, 25))
        b = run_gd(LS, ds, kernel, GdConfig(0.5, 25))
        np.testing.assert_array_equal(a.risks, b.risks)
        np.testing.assert_array_equal(a.coefficients(25), b.coefficients(25))


class TestInterpolate:
    def test_integer_time_is_snapshot(self):
        ds, kernel = _one_point()
        traj = run_gd(LS, ds, kernel, GdConfig(0.5, 1))
        np.testing.assert_array_equal(interpolate(traj, 1.0).coeffs, traj.coefficients(1))

    def test_half_step(self):
        ds, kernel = _one_point()
        traj = run_gd(LS, ds, kernel, GdConfig(0.5, 1))
        f = interpolate(traj, 0.5)
        np.testing.assert_allclose(f.coeffs, [0.5])
        assert empirical_risk(LS, ds, f) == pytest.approx(0.25)

    def test_out_of_range(self):
        ds, kernel = _one_point()
        traj = run_gd(LS, ds, kernel, GdConfig(0.5, 1))
        with pytest.raises(InputDomainError):
            interpolate(traj, 1.5)


class TestCumulativeStepSum:
    def test_constant(self):
        ds, kernel = _one_point()
        traj = run_gd(LS, ds, kernel, GdConfig(0.5, 4))
        assert cumulative_step_sum(traj, 4) == 2.0
        assert cumulative_step_sum(traj, 1) == 0.5

    def test_explicit_list(self):
        ds, kernel = Dataset([[0.0]], [0.0]), LinearKernel()
        traj = run_gd(LS, ds, kernel, GdConfig([1.0, 0.5, 0.25], 3))
        assert cumulative_step_sum(traj, 3) == 1.75

    def test_zero_is_rejected(self):
        ds, kernel = _one_point()
        traj = run_gd(LS, ds, kernel, GdConfig(0.5, 4))
        with pytest.raises(InputDomainError):
            cumulative_step_sum(traj, 0)
