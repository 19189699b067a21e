"""
Checks of the deterministic inequalities satisfied by kernel gradient descent:
risk monotonicity, Fejer monotonicity towards risk-matched comparators, the
telescoping risk bound, the C=2 self-regularization bound, the factor-4 norm
bound and the factor-17 risk-matching inequality.
"""

import logging
from typing import Iterable, Optional, Sequence

import numpy as np

from kernels import RkhsFunction
from learning import GdTrajectory, match_risk, risk_matching_psi, solve_rerm
from learning.gradient_descent import CAP_SLACK
from utils.errors import ContractError, ConvergenceError, RangeError

from .result import CheckRecorder, CheckResult

logger = logging.getLogger(__name__)

ALGEBRAIC_TOL = 1e-9
SOLVER_TOL = 1e-6
MONOTONE_TOL = 1e-12


def _norm_sq(K: np.ndarray, alpha: np.ndarray) -> float:
    return max(float(alpha @ K @ alpha), 0.0)


def _risk(traj: GdTrajectory, alpha: np.ndarray) -> float:
    return float(np.mean(traj.loss.value(traj.dataset.ys, traj.gram @ alpha)))


def _comparator_coeffs(traj: GdTrajectory, h: RkhsFunction) -> np.ndarray:
    if h.support.shape != traj.dataset.xs.shape or not np.array_equal(h.support, traj.dataset.xs):
        raise ContractError("comparator must be supported on the training points")
    return h.coeffs


def _default_times(traj: GdTrajectory, times: Optional[Iterable[int]]) -> Sequence[int]:
    if times is None:
        return sorted(traj.snapshots)
    return sorted(int(t) for t in times)


def check_risk_monotonicity(traj: GdTrajectory, tol: float = MONOTONE_TOL) -> CheckResult:
    """R_D(f_{k+1}) <= R_D(f_k) for every step whose size respects the cap."""
    rec = CheckRecorder("gd_risk_monotonicity", tol, keep_details=False)
    scale = 1.0 + float(traj.risks[0])
    for k in range(traj.max_steps):
        if traj.etas[k] > traj.step_cap * (1.0 + CAP_SLACK):
            rec.skip(f"k={k}", "step size above the cap")
            continue
        rec.record(f"k={k}", traj.risks[k + 1], traj.risks[k], scale)
    return rec.result()


def check_self_regularization_gd(traj: GdTrajectory, times: Optional[Iterable[int]] = None,
                                 tol: float = SOLVER_TOL, match_tol: Optional[float] = None) -> CheckResult:
    """||f_m|| <= 2 ||g_{lambda(m)}|| with lambda(m) matched so that R_D(g) = R_D(f_m)."""
    rec = CheckRecorder("gd_self_regularization", tol)
    K = traj.gram
    for m in _default_times(traj, times):
        f_norm = np.sqrt(_norm_sq(K, traj.coefficients(m)))
        if m == 0:
            rec.record("m=0", f_norm, 0.0)
            continue
        try:
            _, g = match_risk(traj.loss, traj.dataset, traj.kernel, float(traj.risks[m]),
                              tol=match_tol, gram=K)
        except (RangeError, ConvergenceError) as e:
            rec.skip(f"m={m}", str(e))
            continue
        rec.record(f"m={m}", f_norm, 2.0 * g.norm, 1.0 + g.norm)
        if g.norm > 0:
            rec.note("max_norm_ratio", f_norm / g.norm)
    return rec.result()


def check_norm_bound(traj: GdTrajectory, times: Optional[Iterable[int]] = None,
                     tol: float = SOLVER_TOL) -> CheckResult:
    """||f_m|| <= 4 ||g_{Psi(m)}|| (f_0 = 0)."""
    rec = CheckRecorder("gd_norm_bound_factor4", tol)
    for m in _default_times(traj, times):
        if m == 0:
            continue
        lam = risk_matching_psi(traj, m)
        try:
            g = solve_rerm(traj.loss, traj.dataset, traj.kernel, lam, gram=traj.gram)
        except ConvergenceError as e:
            rec.skip(f"m={m}", str(e))
            continue
        f_norm = np.sqrt(_norm_sq(traj.gram, traj.coefficients(m)))
        rec.record(f"m={m}", f_norm, 4.0 * g.norm, 1.0 + g.norm)
    return rec.result()


def check_risk_matching_bound(traj: GdTrajectory, times: Optional[Iterable[int]] = None,
                              tol: float = SOLVER_TOL) -> CheckResult:
    """R_D(f_m) + lam ||f_m||^2 <= R_D(g_lam) + 17 lam ||g_lam||^2 with lam = Psi(m)."""
    rec = CheckRecorder("gd_risk_matching_bound", tol)
    for m in _default_times(traj, times):
        if m == 0:
            continue
        lam = risk_matching_psi(traj, m)
        try:
            g = solve_rerm(traj.loss, traj.dataset, traj.kernel, lam, gram=traj.gram)
        except ConvergenceError as e:
            rec.skip(f"m={m}", str(e))
            continue
        alpha = traj.coefficients(m)
        lhs = float(traj.risks[m]) + lam * _norm_sq(traj.gram, alpha)
        rhs = g.risk + 17.0 * lam * g.norm ** 2
        rec.record(f"m={m}", lhs, rhs, 1.0 + abs(rhs))
    return rec.result()


def check_fejer(traj: GdTrajectory, h: RkhsFunction, t0: int, tol: float = ALGEBRAIC_TOL) -> CheckResult:
    """
    For every step: ||f_{k+1} - h||^2 <= ||f_k - h||^2 + 2 eta_k (R_D(h) - R_D(f_{k+1})).
    For k < t0 with R_D(h) = R_D(f_t0): ||f_k - h|| is non-increasing; any measured
    excess R_D(h) - R_D(f_t0) > 0 enters the allowance 2 eta_k (R_D(h) - R_D(f_t0)).
    """
    beta = _comparator_coeffs(traj, h)
    K = traj.gram
    risk_h = _risk(traj, beta)
    mismatch = max(0.0, risk_h - float(traj.risks[t0]))
    dists = [_norm_sq(K, traj.coefficients(k) - beta) for k in range(traj.max_steps + 1)]
    scale = 1.0 + dists[0]

    rec = CheckRecorder("gd_fejer", tol, keep_details=False)
    for k in range(traj.max_steps):
        if traj.etas[k] > traj.step_cap * (1.0 + CAP_SLACK):
            rec.skip(f"k={k}", "step size above the cap")
            continue
        eta = float(traj.etas[k])
        rec.record(f"raw:k={k}", dists[k + 1], dists[k] + 2.0 * eta * (risk_h - float(traj.risks[k + 1])), scale)
        if k < t0:
            rec.record(f"mono:k={k}", dists[k + 1], dists[k] + 2.0 * eta * mismatch, scale)
    rec.note("risk_mismatch", mismatch)
    return rec.result()


def check_telescoping(traj: GdTrajectory, h: RkhsFunction, m: int, tol: float = ALGEBRAIC_TOL) -> CheckResult:
    """S_m (R_D(f_m) - R_D(h)) <= ||f_0 - h||^2 / 2."""
    beta = _comparator_coeffs(traj, h)
    rec = CheckRecorder("gd_telescoping", tol)
    lhs = float(traj.cum_steps[m]) * (float(traj.risks[m]) - _risk(traj, beta))
    rhs = 0.5 * _norm_sq(traj.gram, traj.coefficients(0) - beta)
    rec.record(f"m={m}", lhs, rhs, 1.0 + abs(rhs))
    return rec.result()


def risk_matched_comparator(traj: GdTrajectory, t0: int, match_tol: Optional[float] = None) -> RkhsFunction:
    """g_{lambda} with R_D(g_lambda) = R_D(f_t0)."""
    _, sol = match_risk(traj.loss, traj.dataset, traj.kernel, float(traj.risks[t0]),
                        tol=match_tol, gram=traj.gram)
    return sol.f


def random_comparators(traj: GdTrajectory, count: int, seed: int = 0):
    """Random functions in the span, scaled around the trajectory's largest iterate."""
    rng = np.random.default_rng(seed)
    ref = np.max(np.abs(traj.coefficients(traj.max_steps))) + 1e-3
    for _ in range(count):
        coeffs = rng.standard_normal(traj.dataset.n) * ref * 10.0 ** rng.uniform(-1.0, 1.0)
        yield traj.function(coeffs)
