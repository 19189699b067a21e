"""
The default verification suite: random synthetic instances for every check,
run concurrently and reported in declaration order.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from kernels import BaseKernel, GaussianKernel, LinearKernel
from learning import Dataset, GdConfig, build_geometric_time_grid, run_gd, solve_rerm, step_size_cap
from losses import LOSSES, LossSpec
from mirror import (
    EmpiricalLossObjective,
    LpPoint,
    LpSpace,
    MirrorTrajectory,
    Objective,
    QuadraticObjective,
    estimate_relative_smoothness,
    level_set_comparator,
    run_mirror_descent,
)
from utils.errors import ConvergenceError, ParameterError, RangeError
from utils.workers import parallel_map

from .approx_error import ApproxErrorOracle, ApproxErrorProblem, check_reg_trafo, check_reg_trafo_power
from .certificates import (
    check_clipping_risk,
    check_geometric_grids,
    check_loss_certificates,
    check_rerm_closed_form,
    check_rerm_path_monotonicity,
    check_rerm_perturbation,
    check_rerm_self_regularization,
    check_risk_matching_accuracy,
)
from .gd_checks import (
    check_fejer,
    check_norm_bound,
    check_risk_matching_bound,
    check_risk_monotonicity,
    check_self_regularization_gd,
    check_telescoping,
    random_comparators,
    risk_matched_comparator,
)
from .mirror_checks import (
    check_bregman_contraction,
    check_duality_algebra,
    check_key_recursion,
    check_mirror_loss_monotonicity,
    check_p2_cross_oracle,
)
from .result import CheckResult, merge_results

logger = logging.getLogger(__name__)

GD_LOSSES = ("least_squares", "logistic_classification", "huber")
RERM_LOSSES = ("least_squares", "logistic_classification", "huber", "logistic_regression", "expectile")
TRAFO_PAIRS = ((1.0, 2.0), (2.0, 1.0), (2.0, 2.0))
SMOOTHNESS_RETRIES = 6

Task = Callable[[], List[CheckResult]]


@dataclass(frozen=True)
class VerifySettings:
    """
    Sizes of the default suite. Every random draw derives from seed, so two runs
    with the same settings produce the same results.
    """

    seed: int = 0
    gd_instances: int = 100
    n_min: int = 10
    n_max: int = 500
    telescoping_comparators: int = 50
    mirror_steps: int = 200
    p_values: Tuple[float, ...] = (1.5, 2.0, 3.0, 4.0)
    key_samples: int = 100
    duality_cases: int = 10_000
    rerm_instances: int = 5
    perturbations: int = 1000
    loss_samples: int = 10_000
    approx_grid_points: int = 41
    cv_seeds: int = 20

    def __post_init__(self):
        if self.seed < 0:
            raise ParameterError(f"verify.seed must be nonnegative, got {self.seed!r}")
        for name in ("gd_instances", "telescoping_comparators", "mirror_steps", "key_samples",
                     "duality_cases", "rerm_instances", "perturbations", "loss_samples", "cv_seeds"):
            if getattr(self, name) < 0:
                raise ParameterError(f"verify.{name} must be nonnegative, got {getattr(self, name)!r}")
        if not 2 <= self.n_min <= self.n_max:
            raise ParameterError(f"need 2 <= verify.n_min <= verify.n_max, got {self.n_min}, {self.n_max}")
        if self.approx_grid_points < 2:
            raise ParameterError(f"verify.approx_grid_points must be >= 2, got {self.approx_grid_points}")
        if any(p < 1.2 for p in self.p_values):
            raise ParameterError(f"verify.p_values must all be >= 1.2, got {list(self.p_values)}")


# ---------------------------------------------------------------------------
# Gradient descent sweep
# ---------------------------------------------------------------------------

def random_gd_instance(index: int, settings: VerifySettings) -> Tuple[LossSpec, Dataset, BaseKernel]:
    """Instance index of the sweep; losses and kernels cycle so all pairs appear."""
    rng = np.random.default_rng([settings.seed, index])
    kind = GD_LOSSES[index % len(GD_LOSSES)]
    n = int(round(math.exp(rng.uniform(math.log(settings.n_min), math.log(settings.n_max)))))
    d = int(rng.integers(1, 4))
    xs = rng.uniform(-1.0, 1.0, (n, d))
    if LOSSES[kind]["labels"] == "binary":
        ys = np.where(xs[:, 0] + 0.3 * rng.standard_normal(n) >= 0.0, 1.0, -1.0)
    else:
        ys = np.sin(np.pi * xs[:, 0]) + 0.1 * rng.standard_normal(n)
    kernel = GaussianKernel(sigma=float(rng.uniform(0.3, 2.0))) if index % 2 == 0 else LinearKernel()
    return LossSpec.for_labels(kind, ys), Dataset(xs, ys), kernel


def _gd_instance_checks(index: int, settings: VerifySettings) -> List[CheckResult]:
    loss, dataset, kernel = random_gd_instance(index, settings)
    eta = min(1.0, step_size_cap(loss, kernel, dataset.xs))
    times = build_geometric_time_grid(dataset.n, eta)
    traj = run_gd(loss, dataset, kernel, GdConfig(step_sizes=eta, max_steps=times[-1]))

    results = [
        check_risk_monotonicity(traj),
        check_self_regularization_gd(traj, times),
        check_norm_bound(traj, times),
        check_risk_matching_bound(traj, times),
    ]
    t0 = times[len(times) // 2]
    try:
        results.append(check_fejer(traj, risk_matched_comparator(traj, t0), t0))
    except (RangeError, ConvergenceError) as e:
        logger.warning("[VERIFY] instance %d: no risk-matched comparator at t=%d: %s", index, t0, e)
    for h in random_comparators(traj, settings.telescoping_comparators, seed=settings.seed + 7919 * (index + 1)):
        results.append(check_fejer(traj, h, t0))
        results.append(check_telescoping(traj, h, traj.max_steps))
        results.append(check_telescoping(traj, h, t0))
    logger.debug("[VERIFY] GD instance %d (%s, %s, n=%d) checked", index, loss.kind, kernel.kind, dataset.n)
    return results


# ---------------------------------------------------------------------------
# Mirror descent
# ---------------------------------------------------------------------------

def _stable_run(objective: Objective, f0: LpPoint, region, steps: int, seed: int,
                reference: Optional[LpPoint] = None) -> MirrorTrajectory:
    """Run with eta = 1/L_s, doubling L_s until every step is relatively smooth."""
    smoothness = estimate_relative_smoothness(objective, region, f0.space, seed=seed)
    traj = None
    for _ in range(SMOOTHNESS_RETRIES):
        traj = run_mirror_descent(objective, f0, 1.0 / smoothness, steps, smoothness=smoothness,
                                  reference=reference)
        if all(traj.smooth_steps):
            return traj
        smoothness *= 2.0
    logger.warning("[VERIFY] relative smoothness still fails after %d doublings", SMOOTHNESS_RETRIES)
    return traj


def _quadratic_instance(p: float, settings: VerifySettings) -> Tuple[Objective, LpPoint, tuple]:
    rng = np.random.default_rng([settings.seed, 101, int(round(10 * p))])
    dim = int(rng.integers(2, 6))
    center = rng.uniform(0.5, 1.5, dim)
    objective = QuadraticObjective.diagonal(rng.uniform(0.2, 2.0, dim), center)
    x0 = center + rng.uniform(0.5, 1.5, dim)
    region = (0.5 * float(np.min(center)), float(np.max(x0)))
    return objective, LpPoint(x0, LpSpace.uniform(p, dim)), region


def _logistic_instance(p: float, settings: VerifySettings) -> Tuple[Objective, LpPoint, tuple]:
    rng = np.random.default_rng([settings.seed, 202, int(round(10 * p))])
    dim = int(rng.integers(2, 6))
    loss = LossSpec("logistic_classification")
    if p > 2.0:
        # identity design with positive labels keeps iterates away from the flat part of psi
        objective = EmpiricalLossObjective(loss, np.eye(dim), np.ones(dim))
        x0 = rng.uniform(0.5, 1.5, dim)
        region = (float(np.min(x0)), float(np.max(x0)) + 10.0)
    else:
        rows = 3 * dim
        objective = EmpiricalLossObjective(loss, rng.standard_normal((rows, dim)), rng.choice([-1.0, 1.0], rows))
        x0 = np.zeros(dim)
        region = (-3.0, 3.0)
    return objective, LpPoint(x0, LpSpace.uniform(p, dim)), region


def _mirror_checks(p: float, builder, settings: VerifySettings) -> List[CheckResult]:
    objective, f0, region = builder(p, settings)
    traj = _stable_run(objective, f0, region, settings.mirror_steps, settings.seed)
    results = [check_mirror_loss_monotonicity(traj)]
    t0 = traj.steps // 2
    comparators = []
    try:
        u = level_set_comparator(objective, traj.iterates[-1], float(traj.losses[t0]), seed=settings.seed)
        comparators.append(u)
        results.append(check_bregman_contraction(traj, u, t0))
    except RangeError as e:
        logger.warning("[VERIFY] p=%g: no level-set comparator: %s", p, e)
    results.append(check_key_recursion(traj, settings.key_samples, settings.seed, comparators))
    return results


def mirror_reference_runs(settings: VerifySettings) -> Dict[str, MirrorTrajectory]:
    """Quadratic-instance run per p, recording the Bregman distance to the known minimizer."""
    runs = {}
    for p in settings.p_values:
        objective, f0, region = _quadratic_instance(p, settings)
        reference = LpPoint(objective.minimizer(), f0.space)
        runs[f"quadratic_p{p:g}"] = _stable_run(objective, f0, region, settings.mirror_steps, settings.seed,
                                                reference=reference)
    return runs


def _cross_oracle_checks(settings: VerifySettings) -> List[CheckResult]:
    rng = np.random.default_rng([settings.seed, 303])
    n = 8
    steps = max(2, min(settings.mirror_steps, 100))
    ls_labels = rng.uniform(-1.0, 1.0, n)
    cls_labels = rng.choice([-1.0, 1.0], n)
    return [
        check_p2_cross_oracle(LossSpec.for_labels("least_squares", ls_labels), ls_labels, 0.25, steps),
        check_p2_cross_oracle(LossSpec("logistic_classification"), cls_labels, 2.0, steps),
    ]


# ---------------------------------------------------------------------------
# RERM, losses, grids, approximation error
# ---------------------------------------------------------------------------

def _rerm_checks(index: int, settings: VerifySettings) -> List[CheckResult]:
    rng = np.random.default_rng([settings.seed, 404, index])
    kind = RERM_LOSSES[index % len(RERM_LOSSES)]
    n = int(rng.integers(15, 41))
    xs = rng.uniform(-1.0, 1.0, (n, 2))
    if LOSSES[kind]["labels"] == "binary":
        ys = np.where(xs[:, 0] - xs[:, 1] + 0.3 * rng.standard_normal(n) >= 0.0, 1.0, -1.0)
    else:
        ys = np.cos(2.0 * xs[:, 0]) * xs[:, 1] + 0.1 * rng.standard_normal(n)
    loss = LossSpec.for_labels(kind, ys)
    dataset = Dataset(xs, ys)
    kernel = GaussianKernel(sigma=float(rng.uniform(0.4, 1.5)))
    lam = float(10.0 ** rng.uniform(-3.0, 0.0))
    seed = settings.seed + index

    results = [
        check_rerm_closed_form(dataset, kernel, np.logspace(-4.0, 0.0, 5)),
        check_rerm_perturbation(loss, dataset, kernel, lam, settings.perturbations, seed),
        check_rerm_path_monotonicity(loss, dataset, kernel, workers=1),
        check_rerm_self_regularization(loss, dataset, kernel, lam, settings.perturbations, seed),
        check_risk_matching_accuracy(loss, dataset, kernel, seed=seed),
    ]
    if loss.is_clippable:
        overshoot = solve_rerm(loss, dataset, kernel, 1e-4).f * 10.0
        results.append(check_clipping_risk(loss, dataset, overshoot, dataset.label_bound()))
    return results


def _loss_checks(settings: VerifySettings) -> List[CheckResult]:
    specs = [
        LossSpec("least_squares"),
        LossSpec("logistic_classification"),
        LossSpec("huber", delta=1.0),
        LossSpec("huber", delta=0.3, clip_level=2.0),
        LossSpec("logistic_regression"),
        LossSpec("expectile", tau=0.5),
        LossSpec("expectile", tau=0.2, clip_level=2.0),
    ]
    results = []
    for i, loss in enumerate(specs):
        results.extend(check_loss_certificates(loss, settings.loss_samples, settings.seed + i))
    return results


def _approx_checks(settings: VerifySettings) -> List[CheckResult]:
    oracle = ApproxErrorOracle(ApproxErrorProblem(), settings.approx_grid_points)
    lambdas = np.logspace(-4.0, 0.0, 10)
    gammas = np.logspace(-5.0, 0.0, 10)
    results = [check_reg_trafo(oracle, p, r, lambdas, gammas) for p, r in TRAFO_PAIRS]
    results.append(check_reg_trafo_power(oracle, 1.0, 2.0, lambdas))
    results.append(check_reg_trafo_power(oracle, 2.0, 2.0, lambdas))
    return results


# ---------------------------------------------------------------------------
# Suite
# ---------------------------------------------------------------------------

def suite_tasks(settings: VerifySettings) -> List[Task]:
    """Independent units of work, in declaration order."""
    tasks: List[Task] = []
    tasks += [lambda i=i: _gd_instance_checks(i, settings) for i in range(settings.gd_instances)]
    for p in settings.p_values:
        tasks.append(lambda p=p: _mirror_checks(p, _quadratic_instance, settings))
        tasks.append(lambda p=p: _mirror_checks(p, _logistic_instance, settings))
    if 2.0 in settings.p_values:
        tasks.append(lambda: _cross_oracle_checks(settings))
    tasks += [lambda p=p: [check_duality_algebra((p,), settings.duality_cases, settings.seed)]
              for p in settings.p_values]
    tasks += [lambda i=i: _rerm_checks(i, settings) for i in range(settings.rerm_instances)]
    tasks.append(lambda: _loss_checks(settings))
    tasks.append(lambda: [check_geometric_grids()])
    tasks.append(lambda: _approx_checks(settings))
    return tasks


def collect(results: List[CheckResult]) -> List[CheckResult]:
    """Merge results sharing a name, keeping the order in which names first appear."""
    groups: Dict[str, List[CheckResult]] = {}
    for res in results:
        groups.setdefault(res.name, []).append(res)
    return [group[0] if len(group) == 1 else merge_results(name, group) for name, group in groups.items()]


def run_suite(settings: Optional[VerifySettings] = None, workers: Optional[int] = None) -> List[CheckResult]:
    settings = settings or VerifySettings()
    tasks = suite_tasks(settings)
    logger.info("[VERIFY] running %d task(s), seed %d", len(tasks), settings.seed)
    per_task = parallel_map(lambda task: task(), tasks, workers)
    results = collect([res for batch in per_task for res in batch])
    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.warning("[VERIFY] %d of %d check(s) failed: %s", len(failed), len(results), ", ".join(failed))
    else:
        logger.info("[VERIFY] all %d check(s) passed", len(results))
    return results
