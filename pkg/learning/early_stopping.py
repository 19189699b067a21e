"""
Data-dependent early stopping for gradient descent.

The candidate stopping times form a dyadic grid {1, 2, ..., 2^m}; each time t is
compared with the RERM regularization parameter Psi(t) = 1 / sum_{k<t} eta_k, and
the final time is the grid point with the smallest clipped risk on a held-out
validation split.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from kernels import BaseKernel, RkhsFunction
from losses import LossSpec, clip_value
from utils.errors import (
    ContractError,
    ConvergenceError,
    GridError,
    InputDomainError,
    ParameterError,
    RangeError,
)
from utils.workers import parallel_map

from .dataset import Dataset
from .gradient_descent import GdConfig, GdTrajectory, run_gd
from .rerm import match_risk

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StoppingGrid:
    """
    times           : t_0 < ... < t_m
    psi_values      : Psi(t) for t in reversed(times), so ascending in lambda
    expansion_factor: max ratio of adjacent lambdas (1 for a single time)
    """

    times: Tuple[int, ...]
    psi_values: Tuple[float, ...]
    expansion_factor: float

    @property
    def lambda_min(self) -> float:
        return self.psi_values[0]

    @property
    def lambda_max(self) -> float:
        return self.psi_values[-1]

    def psi_of(self, t: int) -> float:
        return dict(zip(reversed(self.times), self.psi_values))[t]

    def is_geometric_cover(self, factor: Optional[float] = None) -> bool:
        """lambda_max >= 1 and every adjacent ratio <= factor (default: the expansion factor)."""
        factor = self.expansion_factor if factor is None else factor
        return self.lambda_max >= 1.0 and self.expansion_factor <= factor


@dataclass
class CvReport:
    selected_time: int
    validation_risks: Dict[int, float]
    grid: StoppingGrid
    clip_level: float
    train_risks: Dict[int, float] = field(default_factory=dict)
    test_risks: Dict[int, float] = field(default_factory=dict)
    matched_lambdas: Dict[int, Optional[float]] = field(default_factory=dict)
    selected_test_risk: Optional[float] = None

    @property
    def selected_validation_risk(self) -> float:
        return self.validation_risks[self.selected_time]


@dataclass(frozen=True)
class CvSettings:
    """
    n1, n2  : training / validation sizes (None: n1 = n // 2, n2 = n - n1)
    grid    : "dyadic" or an explicit list of stopping times
    eta     : constant step size, 0 < eta <= 1
    """

    seed: int = 0
    n1: Optional[int] = None
    n2: Optional[int] = None
    grid: Union[str, Sequence[int]] = "dyadic"
    eta: float = 0.5
    decay: float = 0.0
    strict: bool = True
    bound: str = "global"
    match_lambdas: bool = True


@dataclass
class CvResult:
    report: CvReport
    predictor: RkhsFunction
    trajectory: GdTrajectory
    train: Dataset
    validation: Dataset


# ---------------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------------

def build_geometric_time_grid(n: int, eta: float) -> Tuple[int, ...]:
    """{1, 2, 4, ..., 2^m} with m the smallest integer such that 2^m >= n / eta."""
    if isinstance(n, bool) or int(n) != n or n < 2:
        raise InputDomainError(f"n must be an integer >= 2, got {n!r}")
    if not (math.isfinite(eta) and 0.0 < eta <= 1.0):
        raise GridError(f"eta must lie in (0, 1], got {eta!r}")
    ratio = Fraction(int(n)) / Fraction(eta)
    m = 0
    while 2 ** m < ratio:
        m += 1
    return tuple(2 ** i for i in range(m + 1))


def _exact_sum(traj: GdTrajectory, m: int) -> Fraction:
    return sum((Fraction(float(e)) for e in traj.etas[:m]), Fraction(0))


def risk_matching_psi(traj: GdTrajectory, m: int) -> float:
    """Psi(m) = 1 / sum_{k<m} eta_k."""
    if isinstance(m, bool) or int(m) != m or not 1 <= m <= traj.max_steps:
        raise InputDomainError(f"m must be an integer in [1, {traj.max_steps}], got {m!r}")
    return float(1 / _exact_sum(traj, int(m)))


def comparator_grid(traj: GdTrajectory, times: Sequence[int]) -> StoppingGrid:
    """Lambda_i = 1 / sum_{k < t_i} eta_k for the step sizes of traj."""
    return grid_from_step_sizes(traj.etas, times)


def grid_from_step_sizes(etas: Sequence[float], times: Sequence[int]) -> StoppingGrid:
    times = tuple(int(t) for t in times)
    if not times:
        raise GridError("stopping-time grid is empty")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise GridError(f"stopping times must be strictly increasing, got {list(times)}")
    if times[0] < 1 or times[-1] > len(etas):
        raise GridError(f"stopping times must lie in [1, {len(etas)}], got {list(times)}")

    sums, acc, k = [], Fraction(0), 0
    for t in times:
        while k < t:
            acc += Fraction(float(etas[k]))
            k += 1
        sums.append(acc)
    if sums[0] > 1:
        raise GridError(
            f"sum of the first {times[0]} step sizes is {float(sums[0]):.6g} > 1, so lambda_max < 1"
        )
    lambdas = [1 / s for s in reversed(sums)]
    ratios = [b / a for a, b in zip(lambdas, lambdas[1:])]
    expansion = float(max(ratios)) if ratios else 1.0
    return StoppingGrid(times, tuple(float(lam) for lam in lambdas), expansion)


# ---------------------------------------------------------------------------
# Split and selection
# ---------------------------------------------------------------------------

def split_dataset(dataset: Dataset, n1: int, n2: int, seed: int) -> Tuple[Dataset, Dataset]:
    """Random disjoint split D = D1 + D2 with |D1| = n1, |D2| = n2."""
    if n1 < 1 or n2 < 1 or n1 + n2 != dataset.n:
        raise InputDomainError(
            f"split sizes must be positive and sum to n={dataset.n}, got n1={n1}, n2={n2}"
        )
    perm = np.random.default_rng(seed).permutation(dataset.n)
    return dataset.subset(perm[:n1]), dataset.subset(perm[n1:])


def _clipped_risk(loss: LossSpec, ys: np.ndarray, pred: np.ndarray, clip_level: float) -> float:
    if loss.is_clippable:
        pred = np.asarray(clip_value(pred, clip_level), dtype=float)
    return float(np.mean(loss.value(ys, pred)))


def select_stopping_time(traj: GdTrajectory, times: Sequence[int], validation: Dataset,
                         clip_level: float, test: Optional[Dataset] = None,
                         workers: Optional[int] = None) -> CvReport:
    """argmin over the grid of the clipped validation risk; ties go to the smallest time."""
    times = tuple(sorted(int(t) for t in times))
    missing = [t for t in times if t not in traj.snapshots]
    if missing:
        raise ContractError(f"no snapshot recorded for stopping time(s) {missing}")
    if not clip_level > 0:
        raise ParameterError(f"clip level must be positive, got {clip_level!r}")

    kernel, support = traj.kernel, traj.dataset.xs
    k_val = kernel.cross(validation.xs, support)
    k_test = kernel.cross(test.xs, support) if test is not None else None

    def evaluate(t: int) -> Tuple[float, Optional[float]]:
        alpha = traj.snapshots[t]
        val = _clipped_risk(traj.loss, validation.ys, k_val @ alpha, clip_level)
        tst = _clipped_risk(traj.loss, test.ys, k_test @ alpha, clip_level) if k_test is not None else None
        return val, tst

    results = parallel_map(evaluate, times, workers)

    selected, best = times[0], results[0][0]
    for t, (val, _) in zip(times, results):
        if val < best:
            selected, best = t, val

    report = CvReport(
        selected_time=selected,
        validation_risks={t: r[0] for t, r in zip(times, results)},
        grid=comparator_grid(traj, times),
        clip_level=float(clip_level),
        train_risks={t: float(traj.risks[t]) for t in times},
    )
    if k_test is not None:
        report.test_risks = {t: r[1] for t, r in zip(times, results)}
        report.selected_test_risk = report.test_risks[selected]
    logger.info("[CV] selected t=%d (validation risk %.10g) from %d candidates",
                selected, best, len(times))
    return report


# ---------------------------------------------------------------------------
# Rate exponents
# ---------------------------------------------------------------------------

def _check_exponents(beta: float, gamma: float, theta: float, q: float):
    if not 0.0 < beta <= 1.0:
        raise ParameterError(f"beta must lie in (0, 1], got {beta!r}")
    if not 0.0 < gamma < 1.0:
        raise ParameterError(f"gamma must lie in (0, 1), got {gamma!r}")
    if not 0.0 <= theta <= 1.0:
        raise ParameterError(f"theta must lie in [0, 1], got {theta!r}")
    if not (math.isfinite(q) and q >= 1.0):
        raise ParameterError(f"q must be >= 1, got {q!r}")


def learning_rate_exponent(beta: float, gamma: float, theta: float, q: float) -> float:
    """alpha = min{2 beta / (beta (2 - q) + q), beta / (gamma + beta (2 - gamma - theta + theta gamma))}"""
    _check_exponents(beta, gamma, theta, q)
    first = 2.0 * beta / (beta * (2.0 - q) + q)
    second = beta / (gamma + beta * (2.0 - gamma - theta + theta * gamma))
    return min(first, second)


def simple_rate_exponent(beta: float, gamma: float, q: float) -> Tuple[float, float]:
    """(rho, rate) of the basic oracle inequality, where lambda_n = n^-rho."""
    _check_exponents(beta, gamma, 0.0, q)
    rho = (1.0 + beta) / (2.0 * (1.0 + gamma) * (q + q * beta + 2.0 * beta))
    return rho, 2.0 * beta * rho / (1.0 + beta)


def reference_gd_exponent(beta: float, gamma: float, theta: float, q: float) -> float:
    """Rate exponent known for gradient descent stopped with distribution knowledge."""
    _check_exponents(beta, gamma, theta, q)
    return 2.0 * beta / ((2.0 * beta + 1.0) * (2.0 - theta + gamma * theta) + (q - 1.0) * (1.0 + gamma))


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------

def _matched_lambdas(traj: GdTrajectory, times: Sequence[int]) -> Dict[int, Optional[float]]:
    matched: Dict[int, Optional[float]] = {}
    for t in times:
        try:
            lam, _ = match_risk(traj.loss, traj.dataset, traj.kernel, float(traj.risks[t]), gram=traj.gram)
            matched[t] = lam
        except (RangeError, ConvergenceError) as e:
            logger.warning("[CV] no matched lambda for t=%d: %s", t, e)
            matched[t] = None
    return matched


def cv_pipeline(loss: LossSpec, dataset: Dataset, kernel: BaseKernel, settings: CvSettings,
                test: Optional[Dataset] = None, workers: Optional[int] = None) -> CvResult:
    """Split, train one GD pass on D1 through the grid, select on D2."""
    n1 = settings.n1 if settings.n1 is not None else dataset.n // 2
    n2 = settings.n2 if settings.n2 is not None else dataset.n - n1
    train, validation = split_dataset(dataset, n1, n2, settings.seed)

    if isinstance(settings.grid, str):
        if settings.grid != "dyadic":
            raise ParameterError(f"Unknown grid: '{settings.grid}'. Available: ['dyadic', explicit list]")
        times = build_geometric_time_grid(train.n, settings.eta)
    else:
        times = tuple(sorted(set(int(t) for t in settings.grid)))
        if not times or times[0] < 1:
            raise GridError(f"explicit stopping times must be positive, got {list(settings.grid)}")

    config = GdConfig(step_sizes=settings.eta, max_steps=times[-1], record_times=times,
                      decay=settings.decay, strict=settings.strict, bound=settings.bound)
    traj = run_gd(loss, train, kernel, config)

    clip_level = train.label_bound() if loss.info["labels"] == "real" else 1.0
    if clip_level <= 0:
        clip_level = 1.0
    report = select_stopping_time(traj, times, validation, clip_level, test=test, workers=workers)
    if settings.match_lambdas:
        report.matched_lambdas = _matched_lambdas(traj, times)

    return CvResult(
        report=report,
        predictor=traj.iterate(report.selected_time),
        trajectory=traj,
        train=train,
        validation=validation,
    )
