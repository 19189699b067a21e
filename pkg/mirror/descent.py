"""
Mirror descent with the l^p mirror map: J(f_{t+1}) = J(f_t) - eta * grad F(f_t).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from utils.errors import InputDomainError, NumericError, ParameterError, RangeError, StepSizeError

from .lp import LpPoint, LpSpace, bregman_divergence, duality_map, duality_map_inverse, mirror_map_value
from .objectives import Objective

logger = logging.getLogger(__name__)

SAFETY_FACTOR = 2.0
SMOOTHNESS_FLOOR = 1e-8
CAP_SLACK = 1e-12

Region = Tuple[Union[Sequence[float], np.ndarray], Union[Sequence[float], np.ndarray]]


@dataclass(eq=False)
class MirrorTrajectory:
    space: LpSpace
    objective: Objective
    eta: float
    iterates: List[LpPoint]
    dual_iterates: List[np.ndarray]
    losses: np.ndarray
    relative_smoothness: Optional[float] = None
    smooth_steps: List[bool] = field(default_factory=list)
    reference: Optional[LpPoint] = None
    bregman_to_reference: Optional[np.ndarray] = None

    @property
    def steps(self) -> int:
        return len(self.iterates) - 1

    def dual_gradient(self, t: int) -> np.ndarray:
        return _dual_gradient(self.objective, self.iterates[t])


def _dual_gradient(objective: Objective, f: LpPoint) -> np.ndarray:
    # gradient w.r.t. <g, h>_w = sum_i w_i g_i h_i
    return objective.gradient(f.values) / f.space.weights


def _relative_gap(objective: Objective, f: LpPoint, g: LpPoint) -> Tuple[float, float]:
    """(F(g) - F(f) - <grad F(f), g - f>, D(g, f))"""
    lin = objective.value(g.values) - objective.value(f.values) - float(objective.gradient(f.values) @ (g.values - f.values))
    return lin, bregman_divergence(g, f)


def is_relatively_smooth_step(objective: Objective, f: LpPoint, g: LpPoint,
                              smoothness: float, tol: float = 1e-12) -> bool:
    """F(g) <= F(f) + <grad F(f), g - f> + L_s D(g, f), up to tol * (1 + |F(f)|)."""
    lin, div = _relative_gap(objective, f, g)
    return lin <= smoothness * div + tol * (1.0 + abs(objective.value(f.values)))


def estimate_relative_smoothness(objective: Objective, region: Region, space: LpSpace,
                                 samples: int = 1000, seed: int = 0,
                                 safety: float = SAFETY_FACTOR) -> float:
    """
    Sampled relative smoothness constant of objective w.r.t. psi over the box
    region = (lower, upper): the largest ratio (F(g) - F(f) - <grad F(f), g - f>) / D(g, f)
    over random pairs, times safety, never below SMOOTHNESS_FLOOR.
    """
    lower = np.broadcast_to(np.asarray(region[0], dtype=float), (space.dim,))
    upper = np.broadcast_to(np.asarray(region[1], dtype=float), (space.dim,))
    if np.any(upper < lower):
        raise InputDomainError("region upper bound lies below its lower bound")
    if samples < 1:
        raise ParameterError(f"samples must be >= 1, got {samples!r}")

    rng = np.random.default_rng(seed)
    worst = 0.0
    skipped = 0
    for _ in range(samples):
        f = LpPoint(rng.uniform(lower, upper), space)
        g = LpPoint(rng.uniform(lower, upper), space)
        lin, div = _relative_gap(objective, f, g)
        if div <= 1e-14 * (1.0 + mirror_map_value(f) + mirror_map_value(g)):
            skipped += 1
            continue
        worst = max(worst, lin / div)
    if skipped:
        logger.debug("[MD] skipped %d degenerate pairs while estimating L_s", skipped)
    estimate = max(safety * worst, SMOOTHNESS_FLOOR)
    logger.info("[MD] relative smoothness estimate %.6g (p=%g, %d samples)", estimate, space.p, samples)
    return estimate


def mirror_step(f: LpPoint, grad, eta: float) -> LpPoint:
    """J^-1(J(f) - eta * grad), grad a dual vector."""
    grad = np.asarray(grad, dtype=float)
    if not np.all(np.isfinite(grad)):
        raise NumericError("non-finite entries in the mirror-descent gradient")
    if not (math.isfinite(eta) and eta > 0):
        raise ParameterError(f"step size must be a positive real, got {eta!r}")
    dual = duality_map(f) - eta * grad
    if not np.all(np.isfinite(dual)):
        raise NumericError("dual iterate overflowed")
    return duality_map_inverse(dual, f.space)


def run_mirror_descent(objective: Objective, f0: LpPoint, eta: float, steps: int,
                       smoothness: Optional[float] = None, strict: bool = True,
                       reference: Optional[LpPoint] = None) -> MirrorTrajectory:
    """
    Iterate mirror descent from f0. With a relative smoothness constant, eta must
    not exceed 1/L_s (strict) or is flagged with a warning; each step records
    whether the relative smoothness inequality held along it.
    """
    if isinstance(steps, bool) or int(steps) != steps or steps < 0:
        raise ParameterError(f"steps must be a nonnegative integer, got {steps!r}")
    if smoothness is not None and eta > (1.0 / smoothness) * (1.0 + CAP_SLACK):
        msg = f"step size {eta:.6g} exceeds 1/L_s = {1.0 / smoothness:.6g}"
        if strict:
            raise StepSizeError(msg)
        logger.warning("[MD] %s; continuing in warn mode", msg)

    space = f0.space
    iterates = [f0]
    duals = [duality_map(f0)]
    losses = [objective.value(f0.values)]
    smooth_steps: List[bool] = []
    f = f0
    for t in range(int(steps)):
        nxt = mirror_step(f, _dual_gradient(objective, f), eta)
        if smoothness is not None:
            smooth_steps.append(is_relatively_smooth_step(objective, f, nxt, smoothness))
        iterates.append(nxt)
        duals.append(duality_map(nxt))
        losses.append(objective.value(nxt.values))
        logger.debug("[MD] step %d loss=%.10g", t, losses[-1])
        f = nxt

    if smooth_steps and not all(smooth_steps):
        logger.warning("[MD] relative smoothness failed on %d of %d steps",
                       smooth_steps.count(False), len(smooth_steps))
    traj = MirrorTrajectory(
        space=space,
        objective=objective,
        eta=float(eta),
        iterates=iterates,
        dual_iterates=duals,
        losses=np.array(losses, dtype=float),
        relative_smoothness=smoothness,
        smooth_steps=smooth_steps,
        reference=reference,
    )
    if reference is not None:
        traj.bregman_to_reference = np.array([bregman_divergence(reference, it) for it in iterates])
    logger.info("[MD] p=%g steps=%d final loss %.10g", space.p, int(steps), losses[-1])
    return traj


def level_set_comparator(objective: Objective, center: LpPoint, target: float, seed: int = 0,
                         directions: int = 8, tol: float = 1e-12) -> LpPoint:
    """
    A point u with F(u) = target (from below, F(u) <= target) on a ray from
    center, where F(center) <= target. Tries random directions until one
    reaches the level set, then bisects along it.
    """
    base = objective.value(center.values)
    if base > target + tol * (1.0 + abs(target)):
        raise RangeError(
            f"center has value {base:.10g} above the target level {target:.10g}",
            bracket=(base, math.inf),
        )
    if abs(base - target) <= tol * (1.0 + abs(target)):
        return center

    rng = np.random.default_rng(seed)
    scale = max(1.0, float(np.max(np.abs(center.values))))
    for attempt in range(directions):
        v = rng.standard_normal(center.space.dim)
        v /= np.linalg.norm(v)

        def value_at(c: float) -> float:
            return objective.value(center.values + c * v)

        hi = scale
        for _ in range(60):
            if value_at(hi) >= target:
                break
            hi *= 2.0
        else:
            logger.debug("[MD] direction %d never reaches level %.10g", attempt, target)
            continue

        lo = 0.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if not lo < mid < hi:
                break
            if value_at(mid) <= target:
                lo = mid
            else:
                hi = mid
            if target - value_at(lo) <= tol * (1.0 + abs(target)):
                break
        return LpPoint(center.values + lo * v, center.space)

    raise RangeError(f"no ray from the center reached level {target:.10g} after {directions} directions",
                     bracket=(base, math.inf))
