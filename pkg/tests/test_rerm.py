"""
Unit tests for regularized ERM, its risk path and risk matching (learning/rerm.py).
"""

import math

import numpy as np
import pytest

from kernels import GaussianKernel, gram_matrix
from learning import (
    Dataset,
    GdConfig,
    LeastSquaresPath,
    match_risk,
    rerm_risk_path,
    run_gd,
    solve_rerm,
    solve_rerm_ls,
    solve_rerm_smooth,
)
from losses import LossSpec
import learning.rerm as rerm
from utils.errors import ConvergenceError, InputDomainError, ParameterError, RangeError

LS = LossSpec("least_squares")


def _one_point():
    return Dataset([[0.0]], [1.0]), GaussianKernel(1.0)


def _regression(n=25, seed=1):
    rng = np.random.default_rng(seed)
    xs = rng.uniform(-1, 1, (n, 1))
    return Dataset(xs, np.sin(np.pi * xs[:, 0]) + 0.2 * rng.standard_normal(n)), GaussianKernel(0.5)


def _classification(n=30, seed=2):
    rng = np.random.default_rng(seed)
    xs = rng.uniform(-1, 1, (n, 2))
    ys = np.where(rng.uniform(size=n) < 1 / (1 + np.exp(-4 * xs[:, 0])), 1.0, -1.0)
    return Dataset(xs, ys), GaussianKernel(0.8)


# ---------------------------------------------------------------------------
# Least squares
# ---------------------------------------------------------------------------

class TestSolveRermLs:
    def test_one_point_closed_form(self):
        ds, kernel = _one_point()
        sol = solve_rerm_ls(ds, kernel, 1.0)
        np.testing.assert_allclose(sol.coeffs, [0.5])
        assert sol.objective == pytest.approx(0.5)
        assert sol.risk == pytest.approx(0.25)
        assert sol.norm == pytest.approx(0.5)

    def test_huge_lambda_gives_nearly_zero(self):
        ds, kernel = _regression()
        sol = solve_rerm_ls(ds, kernel, 1e8)
        assert np.max(np.abs(sol.coeffs)) < 1e-6

    def test_normal_equations(self):
        ds, kernel = _regression()
        lam = 0.01
        sol = solve_rerm_ls(ds, kernel, lam)
        K = gram_matrix(kernel, ds.xs)
        np.testing.assert_allclose((K + ds.n * lam * np.eye(ds.n)) @ sol.coeffs, ds.ys, atol=1e-9)

    def test_nonpositive_lambda(self):
        ds, kernel = _one_point()
        with pytest.raises(ParameterError):
            solve_rerm_ls(ds, kernel, 0.0)

    def test_dispatch(self):
        ds, kernel = _regression()
        a = solve_rerm(LS, ds, kernel, 0.1)
        b = solve_rerm_ls(ds, kernel, 0.1)
        np.testing.assert_allclose(a.coeffs, b.coeffs)


# ---------------------------------------------------------------------------
# Smooth losses
# ---------------------------------------------------------------------------

class TestSolveRermSmooth:
    def test_logistic_beats_zero(self):
        ds = Dataset([[-1.0], [1.0]], [-1.0, 1.0])
        sol = solve_rerm(LossSpec("logistic_classification"), ds, GaussianKernel(1.0), 1.0)
        assert math.isfinite(sol.norm)
        assert sol.objective < math.log(2.0)

    def test_huge_lambda_norm_bound(self):
        ds, kernel = _classification()
        sol = solve_rerm(LossSpec("logistic_classification"), ds, kernel, 1e8)
        assert sol.norm <= math.sqrt(math.log(2.0) / 1e8) * (1 + 1e-9)

    @pytest.mark.parametrize("kind", ["huber", "logistic_regression", "expectile"])
    def test_certified_gap(self, kind):
        ds, kernel = _regression()
        lam = 0.05
        sol = solve_rerm_smooth(LossSpec(kind), ds, kernel, lam, eps_target=1e-8)
        assert sol.gap_bound <= max(lam * 1e-8, 1e-13 * (1 + abs(sol.objective))) * (1 + 1e-9)

    def test_uncertified_reports_applied_threshold(self):
        ds, kernel = _classification()
        with pytest.raises(ConvergenceError) as info:
            solve_rerm_smooth(LossSpec("logistic_classification"), ds, kernel, 1e-3, max_iter=0)
        # max(1e-3 * 1e-6, 1e-13 * (1 + ln 2))
        assert "needed 1.000e-09" in str(info.value)
        assert info.value.best_gap > 1e-9

    def test_best_effort_returns_best_iterate(self):
        ds, kernel = _classification()
        sol = solve_rerm_smooth(LossSpec("logistic_classification"), ds, kernel, 1e-3,
                                max_iter=0, best_effort=True)
        assert not np.any(sol.coeffs)
        assert sol.risk == pytest.approx(math.log(2.0))
        assert sol.gap_bound > 1e-9

    def test_least_squares_through_newton_matches_closed_form(self):
        ds, kernel = _regression()
        newton = solve_rerm_smooth(LS, ds, kernel, 0.05, eps_target=1e-10)
        closed = solve_rerm_ls(ds, kernel, 0.05)
        assert newton.objective == pytest.approx(closed.objective, rel=1e-8)

    def test_perturbations_do_not_improve_objective(self):
        ds, kernel = _classification()
        loss = LossSpec("logistic_classification")
        sol = solve_rerm(loss, ds, kernel, 0.1)
        K = gram_matrix(kernel, ds.xs)
        rng = np.random.default_rng(0)
        for _ in range(50):
            alpha = sol.coeffs + 1e-3 * rng.standard_normal(ds.n)
            pred = K @ alpha
            obj = float(np.mean(loss.value(ds.ys, pred))) + 0.1 * float(alpha @ pred)
            assert obj >= sol.objective - sol.gap_bound - 1e-12


# ---------------------------------------------------------------------------
# Risk path
# ---------------------------------------------------------------------------

class TestRermRiskPath:
    def test_single_lambda(self):
        ds, kernel = _regression()
        (entry,) = rerm_risk_path(LS, ds, kernel, [0.3])
        sol = solve_rerm(LS, ds, kernel, 0.3)
        assert entry.risk == pytest.approx(sol.risk)
        assert entry.norm == pytest.approx(sol.norm)

    def test_one_point_closed_form(self):
        ds, kernel = _one_point()
        path = rerm_risk_path(LS, ds, kernel, [0.5, 1.0, 2.0])
        np.testing.assert_allclose([e.norm for e in path], [2 / 3, 1 / 2, 1 / 3])
        np.testing.assert_allclose([e.risk for e in path], [1 / 9, 1 / 4, 4 / 9])

    @pytest.mark.parametrize("kind", ["least_squares", "huber", "logistic_regression"])
    def test_monotone(self, kind):
        ds, kernel = _regression()
        path = rerm_risk_path(LossSpec(kind), ds, kernel, np.logspace(-4, 1, 12), workers=2)
        risks = [e.risk for e in path]
        norms = [e.norm for e in path]
        assert all(b >= a - 1e-9 for a, b in zip(risks, risks[1:]))
        assert all(b <= a + 1e-9 for a, b in zip(norms, norms[1:]))

    def test_unsorted_lambdas(self):
        ds, kernel = _one_point()
        with pytest.raises(ParameterError):
            rerm_risk_path(LS, ds, kernel, [1.0, 0.5])

    def test_empty_grid(self):
        ds, kernel = _one_point()
        with pytest.raises(InputDomainError):
            rerm_risk_path(LS, ds, kernel, [])

    def test_eigen_path_matches_solver(self):
        ds, kernel = _regression()
        path = LeastSquaresPath(ds, gram_matrix(kernel, ds.xs))
        sol = solve_rerm_ls(ds, kernel, 0.02)
        assert path.risk(0.02) == pytest.approx(sol.risk, rel=1e-8)
        assert path.norm(0.02) == pytest.approx(sol.norm, rel=1e-8)


# ---------------------------------------------------------------------------
# Risk matching
# ---------------------------------------------------------------------------

class TestMatchRisk:
    def test_one_point_quarter(self):
        ds, kernel = _one_point()
        lam, sol = match_risk(LS, ds, kernel, 0.25)
        assert lam == pytest.approx(1.0, rel=1e-6)
        assert sol.risk == pytest.approx(0.25, abs=1e-9)

    def test_target_at_zero_function_risk(self):
        ds, kernel = _regression()
        risk0 = float(np.mean(ds.ys ** 2))
        lam, sol = match_risk(LS, ds, kernel, risk0)
        assert lam >= 1e3
        assert sol.risk == pytest.approx(risk0, rel=1e-8)

    def test_gd_iterate_risk(self):
        ds, kernel = _regression()
        traj = run_gd(LS, ds, kernel, GdConfig(0.5, 20))
        target = float(traj.risks[20])
        _, sol = match_risk(LS, ds, kernel, target)
        assert sol.risk == pytest.approx(target, abs=1e-9 * float(traj.risks[0]) * 2)

    def test_logistic_match(self):
        ds, kernel = _classification()
        loss = LossSpec("logistic_classification")
        target = 0.5
        _, sol = match_risk(loss, ds, kernel, target, tol=1e-8, lambda_min=1e-4)
        assert sol.risk == pytest.approx(target, abs=1e-5)

    def test_uncertified_lower_end_does_not_abort(self, monkeypatch):
        ds, kernel = _classification()
        loss = LossSpec("logistic_classification")
        solve = rerm.solve_rerm_smooth

        def no_certificate_at_lambda_min(loss, dataset, kernel, lam, *args, best_effort=False, **kwargs):
            if lam <= 1e-4 and not best_effort:
                raise ConvergenceError(f"no certificate at lambda={lam:g}", best_gap=1e-12)
            return solve(loss, dataset, kernel, lam, *args, best_effort=best_effort, **kwargs)

        monkeypatch.setattr(rerm, "solve_rerm_smooth", no_certificate_at_lambda_min)
        lam, sol = match_risk(loss, ds, kernel, 0.5, tol=1e-8, lambda_min=1e-4)
        assert lam > 1e-4
        assert sol.risk == pytest.approx(0.5, abs=1e-5)

    def test_target_above_range(self):
        ds, kernel = _one_point()
        with pytest.raises(RangeError) as info:
            match_risk(LS, ds, kernel, 2.0)
        assert info.value.bracket[1] == pytest.approx(1.0)

    def test_non_finite_target(self):
        ds, kernel = _one_point()
        with pytest.raises(InputDomainError):
            match_risk(LS, ds, kernel, float("inf"))

    def test_range_error_is_a_value_error(self):
        assert issubclass(RangeError, ValueError)
