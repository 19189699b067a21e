"""
Certificates for the building blocks: loss properties, clipping, RERM optimality,
risk matching accuracy and the geometric stopping grids.
"""

import logging
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence

import numpy as np

from kernels import BaseKernel, RkhsFunction, gram_matrix
from learning import (
    Dataset,
    build_geometric_time_grid,
    grid_from_step_sizes,
    match_risk,
    rerm_risk_path,
    solve_rerm,
    solve_rerm_ls,
    solve_rerm_smooth,
)
from learning.rerm import LAMBDA_MIN
from losses import LossSpec, clip_value
from utils.errors import ConvergenceError, InputDomainError, ParameterError, RangeError

from .result import CheckRecorder, CheckResult

logger = logging.getLogger(__name__)

GRADIENT_TOL = 1e-6
CONVEXITY_TOL = 1e-12
SMOOTHNESS_TOL = 1e-9
SOLVER_TOL = 1e-6
MATCH_TOL = 1e-9
KINK_MARGIN = 1e-4


# ---------------------------------------------------------------------------
# Losses
# ---------------------------------------------------------------------------

def _sample_labels(loss: LossSpec, rng: np.random.Generator, size: int) -> np.ndarray:
    if loss.info["labels"] == "binary":
        return rng.choice([-1.0, 1.0], size=size)
    return rng.uniform(-loss.clip_level, loss.clip_level, size=size)


def _near_kink(loss: LossSpec, y: float, t: float, h: float) -> bool:
    r = t - y
    if loss.kind == "huber":
        return abs(abs(r) - loss.delta) < 2.0 * h + KINK_MARGIN
    if loss.kind == "expectile":
        return abs(r) < 2.0 * h + KINK_MARGIN
    return False


def check_loss_certificates(loss: LossSpec, samples: int = 10_000, seed: int = 0) -> List[CheckResult]:
    """
    Sampled certificates for one loss: analytic derivative against central
    differences, midpoint convexity, clipping monotonicity (clippable losses only),
    difference quotients of the derivative against M, and the growth envelope.
    """
    rng = np.random.default_rng(seed)
    spread = 3.0 * max(1.0, loss.clip_level)
    y = _sample_labels(loss, rng, samples)
    t1 = rng.normal(0.0, spread, samples)
    t2 = rng.normal(0.0, spread, samples)
    kind = loss.kind

    grad = CheckRecorder(f"loss_gradient[{kind}]", GRADIENT_TOL, keep_details=False)
    h = 1e-5 * np.maximum(1.0, np.abs(t1))
    fd = (loss.value(y, t1 + h) - loss.value(y, t1 - h)) / (2.0 * h)
    d1 = np.asarray(loss.derivative(y, t1))
    for i in range(samples):
        if _near_kink(loss, y[i], t1[i], h[i]):
            grad.skip(f"i={i}", "within the kink margin")
            continue
        grad.record(f"i={i}", abs(fd[i] - d1[i]), 0.0, 1.0 + abs(d1[i]))

    convex = CheckRecorder(f"loss_convexity[{kind}]", CONVEXITY_TOL, keep_details=False)
    v1, v2 = np.asarray(loss.value(y, t1)), np.asarray(loss.value(y, t2))
    vm = np.asarray(loss.value(y, 0.5 * (t1 + t2)))
    for i in range(samples):
        convex.record(f"i={i}", vm[i], 0.5 * (v1[i] + v2[i]), 1.0 + v1[i] + v2[i])

    smooth = CheckRecorder(f"loss_smoothness[{kind}]", SMOOTHNESS_TOL, keep_details=False)
    m_smooth = loss.smoothness_constant()
    d2 = np.asarray(loss.derivative(y, t2))
    for i in range(samples):
        if t1[i] == t2[i]:
            continue
        bound = m_smooth * abs(t1[i] - t2[i])
        smooth.record(f"i={i}", abs(d1[i] - d2[i]), bound, 1.0 + bound)

    growth = CheckRecorder(f"loss_growth[{kind}]", CONVEXITY_TOL, keep_details=False)
    b, q = loss.growth_params()
    for i in range(samples):
        bound = b * (1.0 + abs(t1[i]) ** q)
        growth.record(f"i={i}", v1[i], bound, 1.0 + bound)
    growth.note("B", b)
    growth.note("q", q)

    results = [grad.result(), convex.result(), smooth.result(), growth.result()]
    if loss.is_clippable:
        clip = CheckRecorder(f"loss_clipping[{kind}]", CONVEXITY_TOL, keep_details=False)
        vc = np.asarray(loss.value(y, clip_value(t1, loss.clip_level)))
        for i in range(samples):
            clip.record(f"i={i}", vc[i], v1[i], 1.0 + v1[i])
        results.append(clip.result())
    logger.debug("[VERIFY] loss certificates for %s over %d samples", kind, samples)
    return results


def check_clipping_risk(loss: LossSpec, dataset: Dataset, f: RkhsFunction, m: float,
                        tol: float = CONVEXITY_TOL) -> CheckResult:
    """R_D(clip f) <= R_D(f), pointwise and for the average, when all |y_i| <= M."""
    if not loss.is_clippable:
        raise ParameterError(f"loss '{loss.kind}' is not clippable")
    if not m > 0:
        raise ParameterError(f"clip level M must be positive, got {m!r}")
    if dataset.label_bound() > m:
        raise InputDomainError(f"labels reach {dataset.label_bound():.6g}, above the clip level {m:.6g}")
    pred = f.evaluate_many(dataset.xs)
    raw = np.asarray(loss.value(dataset.ys, pred))
    clipped = np.asarray(loss.value(dataset.ys, clip_value(pred, m)))

    rec = CheckRecorder("clipping_risk", tol)
    for i in range(dataset.n):
        rec.record(f"i={i}", clipped[i], raw[i], 1.0 + raw[i])
    risk, risk_clipped = float(np.mean(raw)), float(np.mean(clipped))
    rec.record("risk", risk_clipped, risk, 1.0 + risk)
    rec.note("risk_decrease", risk - risk_clipped)
    return rec.result()


# ---------------------------------------------------------------------------
# RERM
# ---------------------------------------------------------------------------

def _objectives(loss: LossSpec, dataset: Dataset, K: np.ndarray, alphas: np.ndarray, lam: float):
    """Risk, squared norm and objective for each column of alphas."""
    pred = K @ alphas
    risks = np.mean(loss.value(dataset.ys[:, None], pred), axis=0)
    sq_norms = np.maximum(np.einsum("ij,ij->j", alphas, pred), 0.0)
    return risks, sq_norms, risks + lam * sq_norms


def check_rerm_closed_form(dataset: Dataset, kernel: BaseKernel, lambdas: Iterable[float],
                           tol: float = SOLVER_TOL) -> CheckResult:
    """Least-squares RERM: the linear-system solution against the Newton solver."""
    K = gram_matrix(kernel, dataset.xs)
    loss = LossSpec("least_squares")
    rec = CheckRecorder("rerm_closed_form", tol)
    for lam in lambdas:
        exact = solve_rerm_ls(dataset, kernel, lam, gram=K)
        try:
            newton = solve_rerm_smooth(loss, dataset, kernel, lam, gram=K)
        except ConvergenceError as e:
            rec.skip(f"lambda={lam:.3g}", str(e))
            continue
        pred_exact, pred_newton = K @ exact.coeffs, K @ newton.coeffs
        scale = 1.0 + float(np.max(np.abs(pred_exact)))
        rec.record(f"lambda={lam:.3g}:predictions", float(np.max(np.abs(pred_exact - pred_newton))), 0.0, scale)
        rec.record(f"lambda={lam:.3g}:objective", abs(exact.objective - newton.objective), 0.0,
                   1.0 + abs(exact.objective))
    return rec.result()


def check_rerm_perturbation(loss: LossSpec, dataset: Dataset, kernel: BaseKernel, lam: float,
                            perturbations: int = 1000, seed: int = 0, tol: float = SOLVER_TOL) -> CheckResult:
    """No perturbation of g_lambda lowers the regularized objective by more than its gap bound."""
    K = gram_matrix(kernel, dataset.xs)
    sol = solve_rerm(loss, dataset, kernel, lam, gram=K)
    rng = np.random.default_rng(seed)
    ref = 1.0 + float(np.max(np.abs(sol.coeffs)))
    scales = ref * 10.0 ** rng.uniform(-4.0, 0.0, perturbations)
    deltas = rng.standard_normal((dataset.n, perturbations)) * scales
    _, _, objs = _objectives(loss, dataset, K, sol.coeffs[:, None] + deltas, lam)

    rec = CheckRecorder(f"rerm_perturbation[{loss.kind}]", tol, keep_details=False)
    floor = sol.objective - sol.gap_bound
    for j in range(perturbations):
        rec.record(f"j={j}", floor, float(objs[j]), 1.0 + abs(sol.objective))
    rec.note("gap_bound", sol.gap_bound)
    return rec.result()


def check_rerm_path_monotonicity(loss: LossSpec, dataset: Dataset, kernel: BaseKernel,
                                 lambdas: Optional[Sequence[float]] = None, tol: float = SOLVER_TOL,
                                 workers: Optional[int] = None) -> CheckResult:
    """Along increasing lambda the RERM risk is non-decreasing and the norm non-increasing."""
    lambdas = list(np.logspace(-4.0, 1.0, 20) if lambdas is None else lambdas)
    path = rerm_risk_path(loss, dataset, kernel, lambdas, workers=workers)
    rec = CheckRecorder(f"rerm_path_monotonicity[{loss.kind}]", tol)
    for a, b in zip(path, path[1:]):
        inst = f"lambda={a.lam:.3g}->{b.lam:.3g}"
        rec.record(f"{inst}:risk", a.risk, b.risk, 1.0 + abs(b.risk))
        rec.record(f"{inst}:norm", b.norm, a.norm, 1.0 + a.norm)
    return rec.result()


def check_rerm_self_regularization(loss: LossSpec, dataset: Dataset, kernel: BaseKernel, lam: float,
                                   perturbations: int = 1000, seed: int = 0,
                                   tol: float = SOLVER_TOL) -> CheckResult:
    """
    g_lambda has the smallest norm among functions with no larger empirical risk:
    R_D(f) <= R_D(g) implies ||f||^2 >= ||g||^2 - gap / lambda. Perturbations point
    into the risk-decreasing half space so that the premise is met.
    """
    K = gram_matrix(kernel, dataset.xs)
    sol = solve_rerm(loss, dataset, kernel, lam, gram=K)
    rng = np.random.default_rng(seed)
    alpha = sol.coeffs
    risk_grad = np.asarray(loss.derivative(dataset.ys, K @ alpha)) / dataset.n

    ref = 1.0 + float(np.max(np.abs(alpha)))
    deltas = rng.standard_normal((dataset.n, perturbations)) * ref * 10.0 ** rng.uniform(-4.0, -1.0, perturbations)
    signs = np.where(risk_grad @ K @ deltas > 0.0, -1.0, 1.0)
    deltas *= signs
    risks, sq_norms, _ = _objectives(loss, dataset, K, alpha[:, None] + deltas, lam)

    rec = CheckRecorder(f"rerm_self_regularization[{loss.kind}]", tol, keep_details=False)
    g_sq = sol.norm ** 2
    for j in range(perturbations):
        if risks[j] > sol.risk:
            rec.skip(f"j={j}", "risk above R_D(g)")
            continue
        rec.record(f"j={j}", g_sq, float(sq_norms[j]) + sol.gap_bound / lam, 1.0 + g_sq)
    rec.note("qualifying", float(rec.instances))
    return rec.result()


def check_risk_matching_accuracy(loss: LossSpec, dataset: Dataset, kernel: BaseKernel, targets: int = 20,
                                 seed: int = 0, tol: float = MATCH_TOL) -> CheckResult:
    """|R_D(g_lambda) - target| <= tol R_D(0) for targets drawn from (R_D(g_lambda_min), R_D(0)]."""
    K = gram_matrix(kernel, dataset.xs)
    risk0 = float(np.mean(loss.value(dataset.ys, np.zeros(dataset.n))))
    floor = solve_rerm(loss, dataset, kernel, LAMBDA_MIN, gram=K).risk
    rng = np.random.default_rng(seed)
    match_tol = max(tol * risk0, 1e-15)

    rec = CheckRecorder(f"risk_matching_accuracy[{loss.kind}]", tol)
    for i, u in enumerate(rng.uniform(0.01, 1.0, targets)):
        target = floor + u * (risk0 - floor)
        try:
            lam, sol = match_risk(loss, dataset, kernel, target, tol=match_tol, gram=K)
        except (RangeError, ConvergenceError) as e:
            rec.skip(f"i={i}", str(e))
            continue
        rec.record(f"i={i}:lambda={lam:.6g}", abs(sol.risk - target), 0.0, max(risk0, 1e-300))
    return rec.result()


# ---------------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------------

def check_geometric_grids(ns: Iterable[int] = (16, 100, 1000),
                          etas: Iterable[float] = (1.0, 0.5, 0.1)) -> CheckResult:
    """
    Dyadic times with constant eta: expansion factor exactly 2, lambda_1 <= 1/n,
    lambda_max >= 1 and 2^m <= 2n / eta, all in exact arithmetic.
    """
    rec = CheckRecorder("geometric_grids", 0.0)
    for n in ns:
        for eta in etas:
            inst = f"n={n}:eta={eta:g}"
            times = build_geometric_time_grid(n, eta)
            grid = grid_from_step_sizes([eta] * times[-1], times)
            step = Fraction(eta)
            lam_min = 1 / (times[-1] * step)
            lam_max = 1 / (times[0] * step)
            ratios = [Fraction(b, a) for a, b in zip(times, times[1:])]

            rec.record(f"{inst}:expansion", float(max(abs(r - 2) for r in ratios)), 0.0)
            rec.record(f"{inst}:expansion_reported", abs(grid.expansion_factor - 2.0), 0.0)
            rec.record(f"{inst}:lambda_min", float(lam_min - Fraction(1, n)), 0.0)
            rec.record(f"{inst}:lambda_max", float(1 - lam_max), 0.0)
            rec.record(f"{inst}:grid_size", float(times[-1] - 2 * Fraction(n) / step), 0.0)
            rec.note("max_grid_points", float(len(times)))
    return rec.result()
