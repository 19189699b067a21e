"""
Regularized empirical risk minimization g_{D,lambda} = argmin R_D(f) + lambda ||f||^2,
its risk path over lambda, and risk matching by bisection in log lambda.

All solvers work in the span of the training sections; the regularized objective
is 2*lambda strongly convex in the RKHS norm, so a solution with function-space
gradient c (coefficients) has suboptimality at most c^T K c / (4 lambda).
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from kernels import BaseKernel, RkhsFunction, gram_matrix, jitter_cholesky
from losses import LossSpec
from utils.errors import ConvergenceError, InputDomainError, NumericError, ParameterError, RangeError
from utils.workers import parallel_map

from .dataset import Dataset

logger = logging.getLogger(__name__)

EPS_TARGET = 1e-6
CERT_FLOOR = 1e-13
MAX_NEWTON_ITER = 200
LAMBDA_MIN = 1e-8
LAMBDA_MAX = 1e8
LAMBDA_CEILING = 1e20
MAX_BISECTION_ITER = 200
ARMIJO = 1e-4


@dataclass(frozen=True, eq=False)
class RermSolution:
    f: RkhsFunction
    lam: float
    objective: float
    gap_bound: float
    risk: float
    norm: float
    iterations: int = 0
    residual: float = 0.0
    at_boundary: bool = False

    @property
    def coeffs(self) -> np.ndarray:
        return self.f.coeffs


@dataclass(frozen=True)
class PathEntry:
    lam: float
    risk: float
    norm: float
    objective: float
    gap_bound: float


def _check_lambda(lam: float):
    if not (math.isfinite(lam) and lam > 0):
        raise ParameterError(f"lambda must be a positive real, got {lam!r}")


def _objective(loss: LossSpec, ys: np.ndarray, K: np.ndarray, alpha: np.ndarray, lam: float) -> Tuple[float, float, float]:
    pred = K @ alpha
    risk = float(np.mean(loss.value(ys, pred)))
    sq_norm = max(float(alpha @ pred), 0.0)
    return risk + lam * sq_norm, risk, sq_norm


def _h_gradient(loss: LossSpec, ys: np.ndarray, K: np.ndarray, alpha: np.ndarray, lam: float) -> np.ndarray:
    """Coefficients of the RKHS gradient of R_D(f) + lam ||f||^2."""
    return np.asarray(loss.derivative(ys, K @ alpha), dtype=float) / ys.shape[0] + 2.0 * lam * alpha


def _gap_bound(K: np.ndarray, c: np.ndarray, lam: float) -> float:
    return max(float(c @ K @ c), 0.0) / (4.0 * lam)


def _certificate_threshold(lam: float, eps_target: float, objective: float) -> float:
    # below this the gap is smaller than the resolution of the objective itself
    return max(lam * eps_target, CERT_FLOOR * (1.0 + abs(objective)))


def _solution(loss, dataset, kernel, K, alpha, lam, iterations=0, residual=0.0, at_boundary=False) -> RermSolution:
    objective, risk, sq_norm = _objective(loss, dataset.ys, K, alpha, lam)
    c = _h_gradient(loss, dataset.ys, K, alpha, lam)
    return RermSolution(
        f=RkhsFunction(dataset.xs, alpha, kernel, K),
        lam=lam,
        objective=objective,
        gap_bound=_gap_bound(K, c, lam),
        risk=risk,
        norm=math.sqrt(sq_norm),
        iterations=iterations,
        residual=residual,
        at_boundary=at_boundary,
    )


# ---------------------------------------------------------------------------
# Solvers
# ---------------------------------------------------------------------------

def solve_rerm_ls(dataset: Dataset, kernel: BaseKernel, lam: float,
                  gram: Optional[np.ndarray] = None) -> RermSolution:
    """Least squares: alpha solves (K + n lam I) alpha = y."""
    _check_lambda(lam)
    K = gram_matrix(kernel, dataset.xs) if gram is None else gram
    n = dataset.n
    A = K + n * lam * np.eye(n)
    L, _ = jitter_cholesky(A)
    alpha = linalg.cho_solve((L, True), dataset.ys)
    if not np.all(np.isfinite(alpha)):
        raise NumericError(f"least-squares system is singular at lambda={lam:g}")
    residual = float(np.linalg.norm(A @ alpha - dataset.ys))
    logger.debug("[RERM] least squares lambda=%.6g residual=%.3e", lam, residual)
    return _solution(LossSpec("least_squares"), dataset, kernel, K, alpha, lam, residual=residual)


def solve_rerm_smooth(loss: LossSpec, dataset: Dataset, kernel: BaseKernel, lam: float,
                      eps_target: float = EPS_TARGET, gram: Optional[np.ndarray] = None,
                      warm_start: Optional[np.ndarray] = None,
                      max_iter: int = MAX_NEWTON_ITER, best_effort: bool = False) -> RermSolution:
    """
    Damped Newton in the RKHS metric: solve ((1/n) D K + 2 lam I) d = c with
    D = diag(L''), then backtrack along -d until the Armijo condition holds.
    Stops once c^T K c / (4 lam) <= max(lam * eps_target, CERT_FLOOR * (1 + |objective|)).

    Without a certificate after max_iter iterations this raises ConvergenceError,
    or with best_effort returns the iterate with the smallest gap bound.
    """
    _check_lambda(lam)
    if not (math.isfinite(eps_target) and eps_target > 0):
        raise ParameterError(f"eps_target must be positive, got {eps_target!r}")
    K = gram_matrix(kernel, dataset.xs) if gram is None else gram
    ys = dataset.ys
    n = dataset.n
    alpha = np.zeros(n) if warm_start is None else np.array(warm_start, dtype=float)

    obj, _, _ = _objective(loss, ys, K, alpha, lam)
    best_gap, best_alpha, best_threshold = math.inf, alpha, math.inf
    for it in range(max_iter + 1):
        c = _h_gradient(loss, ys, K, alpha, lam)
        gap = _gap_bound(K, c, lam)
        threshold = _certificate_threshold(lam, eps_target, obj)
        if gap < best_gap:
            best_gap, best_alpha, best_threshold = gap, alpha, threshold
        if gap <= threshold:
            logger.debug("[RERM] %s lambda=%.6g converged in %d iterations, gap %.3e",
                         loss.kind, lam, it, gap)
            return _solution(loss, dataset, kernel, K, alpha, lam, iterations=it)
        if it == max_iter:
            break

        curv = np.asarray(loss.curvature(ys, K @ alpha), dtype=float)
        hess = (curv[:, None] * K) / n + 2.0 * lam * np.eye(n)
        try:
            d = linalg.solve(hess, c)
        except linalg.LinAlgError:
            d = c
        slope = float(c @ K @ d)
        if not (np.all(np.isfinite(d)) and slope > 0):
            d = c
            slope = float(c @ K @ c)

        step = 1.0
        while step > 1e-20:
            trial = alpha - step * d
            trial_obj, _, _ = _objective(loss, ys, K, trial, lam)
            if trial_obj <= obj - ARMIJO * step * slope:
                break
            step *= 0.5
        else:
            logger.warning("[RERM] line search stalled at lambda=%.6g, gap %.3e", lam, gap)
            break
        alpha, obj = trial, trial_obj

    if best_effort:
        logger.warning("[RERM] %s lambda=%.6g uncertified after %d iterations, best gap %.3e (needed %.3e)",
                       loss.kind, lam, max_iter, best_gap, best_threshold)
        return _solution(loss, dataset, kernel, K, best_alpha, lam, iterations=max_iter)
    raise ConvergenceError(
        f"no optimality certificate for {loss.kind} at lambda={lam:g} after {max_iter} iterations "
        f"(best gap bound {best_gap:.3e}, needed {best_threshold:.3e})",
        best_gap=best_gap,
    )


def solve_rerm(loss: LossSpec, dataset: Dataset, kernel: BaseKernel, lam: float,
               eps_target: float = EPS_TARGET, gram: Optional[np.ndarray] = None,
               warm_start: Optional[np.ndarray] = None) -> RermSolution:
    if loss.kind == "least_squares":
        return solve_rerm_ls(dataset, kernel, lam, gram=gram)
    return solve_rerm_smooth(loss, dataset, kernel, lam, eps_target, gram=gram, warm_start=warm_start)


# ---------------------------------------------------------------------------
# Risk path
# ---------------------------------------------------------------------------

class LeastSquaresPath:
    """
    risk(lambda) and norm(lambda) of least-squares RERM from one eigendecomposition
    K = U diag(s) U^T: with z = U^T y, the residual y - K alpha has coordinates
    n lam / (s + n lam) * z.
    """

    def __init__(self, dataset: Dataset, K: np.ndarray):
        s, U = linalg.eigh(0.5 * (K + K.T))
        self.n = dataset.n
        self.spectrum = np.maximum(s, 0.0)
        self.z2 = (U.T @ dataset.ys) ** 2

    def risk(self, lam: float) -> float:
        nl = self.n * lam
        return float(np.sum((nl / (self.spectrum + nl)) ** 2 * self.z2) / self.n)

    def norm(self, lam: float) -> float:
        nl = self.n * lam
        return math.sqrt(float(np.sum(self.spectrum / (self.spectrum + nl) ** 2 * self.z2)))


def rerm_risk_path(loss: LossSpec, dataset: Dataset, kernel: BaseKernel, lambdas: Sequence[float],
                   eps_target: float = EPS_TARGET, workers: Optional[int] = None) -> List[PathEntry]:
    """(lambda, risk, norm, objective, gap) for each lambda; risk rises and norm falls along the path."""
    lambdas = [float(lam) for lam in lambdas]
    if not lambdas:
        raise InputDomainError("lambda grid is empty")
    for lam in lambdas:
        _check_lambda(lam)
    if any(b <= a for a, b in zip(lambdas, lambdas[1:])):
        raise ParameterError(f"lambdas must be strictly increasing, got {lambdas}")
    K = gram_matrix(kernel, dataset.xs)

    def solve(lam: float) -> PathEntry:
        sol = solve_rerm(loss, dataset, kernel, lam, eps_target, gram=K)
        return PathEntry(lam, sol.risk, sol.norm, sol.objective, sol.gap_bound)

    path = parallel_map(solve, lambdas, workers)
    logger.info("[RERM] path over %d lambdas in [%.3g, %.3g]", len(lambdas), lambdas[0], lambdas[-1])
    return path


# ---------------------------------------------------------------------------
# Risk matching
# ---------------------------------------------------------------------------

def _risk_function(loss: LossSpec, dataset: Dataset, kernel: BaseKernel, K: np.ndarray,
                   eps_target: float) -> Callable[[float], float]:
    if loss.kind == "least_squares":
        return LeastSquaresPath(dataset, K).risk

    warm = {"alpha": None}

    # bisection only needs the risk values; the returned solution is certified separately
    def risk(lam: float) -> float:
        sol = solve_rerm_smooth(loss, dataset, kernel, lam, eps_target, gram=K, warm_start=warm["alpha"],
                                best_effort=True)
        warm["alpha"] = sol.coeffs
        return sol.risk

    return risk


def match_risk(loss: LossSpec, dataset: Dataset, kernel: BaseKernel, target_risk: float,
               tol: Optional[float] = None, eps_target: float = EPS_TARGET,
               lambda_min: float = LAMBDA_MIN, lambda_max: float = LAMBDA_MAX,
               gram: Optional[np.ndarray] = None) -> Tuple[float, RermSolution]:
    """
    Solve R_D(g_{D,lambda}) = target_risk for lambda by bisection in log lambda.

    The achievable range is (risk(lambda_min), R_D(0)]. A target within tol of
    risk(lambda_min) returns lambda_min flagged at_boundary; a target outside the
    range raises RangeError carrying the bracket.
    """
    if not math.isfinite(target_risk):
        raise InputDomainError(f"target risk must be finite, got {target_risk!r}")
    K = gram_matrix(kernel, dataset.xs) if gram is None else gram
    risk0 = float(np.mean(loss.value(dataset.ys, np.zeros(dataset.n))))
    if tol is None:
        tol = max(1e-9 * risk0, 1e-15)
    if not tol > 0:
        raise ParameterError(f"tol must be positive, got {tol!r}")

    risk_of = _risk_function(loss, dataset, kernel, K, eps_target)

    def finish(lam: float, at_boundary: bool = False) -> Tuple[float, RermSolution]:
        sol = solve_rerm(loss, dataset, kernel, lam, eps_target, gram=K)
        if at_boundary:
            sol = RermSolution(sol.f, sol.lam, sol.objective, sol.gap_bound, sol.risk, sol.norm,
                               sol.iterations, sol.residual, at_boundary=True)
        logger.debug("[MATCH] target %.10g -> lambda %.6g (risk %.10g)", target_risk, lam, sol.risk)
        return lam, sol

    lo, hi = lambda_min, lambda_max
    risk_lo = risk_of(lo)
    if target_risk > risk0 + tol or target_risk < risk_lo - tol:
        raise RangeError(
            f"target risk {target_risk:.10g} outside the achievable range [{risk_lo:.10g}, {risk0:.10g}]",
            bracket=(risk_lo, risk0),
        )
    if abs(target_risk - risk_lo) <= tol:
        logger.info("[MATCH] target %.10g at the interpolation boundary, lambda=%.3g", target_risk, lo)
        return finish(lo, at_boundary=True)

    risk_hi = risk_of(hi)
    while risk_hi < target_risk - tol:
        if hi >= LAMBDA_CEILING:
            raise RangeError(
                f"target risk {target_risk:.10g} not reached below lambda={hi:.3g}",
                bracket=(risk_lo, risk_hi),
            )
        lo, risk_lo = hi, risk_hi
        hi *= 100.0
        risk_hi = risk_of(hi)
    if abs(risk_hi - target_risk) <= tol:
        return finish(hi)

    # risk(lo) < target <= risk(hi)
    best_lam, best_err = hi, abs(risk_hi - target_risk)
    for _ in range(MAX_BISECTION_ITER):
        mid = math.sqrt(lo * hi)
        if not lo < mid < hi:
            break
        r = risk_of(mid)
        err = abs(r - target_risk)
        if err < best_err or (err == best_err and mid < best_lam):
            best_lam, best_err = mid, err
        if err <= tol:
            return finish(mid)
        if r < target_risk:
            lo = mid
        else:
            hi = mid
    logger.warning("[MATCH] bisection ended %.3e from target %.10g; using lambda=%.6g",
                   best_err, target_risk, best_lam)
    return finish(best_lam)
