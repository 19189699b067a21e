"""
Checks for mirror descent in weighted l^p and for the l^p duality algebra.
"""

import logging
from typing import Iterable, Optional, Sequence

import numpy as np

from kernels import LinearKernel
from learning import Dataset, GdConfig, run_gd
from losses import LossSpec
from mirror import (
    EmpiricalLossObjective,
    LpPoint,
    LpSpace,
    MirrorTrajectory,
    bregman_divergence,
    duality_map,
    duality_map_inverse,
    identity_scale,
    run_mirror_descent,
    three_point_identity_check,
)
from utils.errors import ContractError

from .gd_checks import check_fejer
from .result import CheckRecorder, CheckResult

logger = logging.getLogger(__name__)

IDENTITY_TOL = 1e-10
RECURSION_TOL = 1e-9
MONOTONE_TOL = 1e-12
CROSS_TOL = 1e-10


def check_mirror_loss_monotonicity(traj: MirrorTrajectory, tol: float = MONOTONE_TOL) -> CheckResult:
    """F(f_{t+1}) <= F(f_t)."""
    rec = CheckRecorder("md_loss_monotonicity", tol, keep_details=False)
    scale = 1.0 + abs(float(traj.losses[0]))
    for t in range(traj.steps):
        rec.record(f"t={t}", traj.losses[t + 1], traj.losses[t], scale)
    if traj.smooth_steps:
        rec.note("relatively_smooth_steps", float(sum(traj.smooth_steps)))
    return rec.result()


def _recursion_terms(traj: MirrorTrajectory, u: LpPoint, t: int):
    f_t, f_next = traj.iterates[t], traj.iterates[t + 1]
    d_t = bregman_divergence(u, f_t)
    d_next = bregman_divergence(u, f_next)
    obj_u = traj.objective.value(u.values)
    return d_t, d_next, obj_u


def check_key_recursion(traj: MirrorTrajectory, samples: int = 100, seed: int = 0,
                        comparators: Optional[Sequence[LpPoint]] = None,
                        tol: float = RECURSION_TOL) -> CheckResult:
    """
    D(u, f_{t+1}) <= D(u, f_t) + eta (F(u) - F(f_{t+1})) for every step and
    every u: random points around the current iterate plus any given comparators.
    """
    rec = CheckRecorder("md_key_recursion", tol, keep_details=False)
    rng = np.random.default_rng(seed)
    space = traj.space
    spread = 1.0 + float(np.max(np.abs(traj.iterates[0].values)))
    extra = list(comparators or [])
    for t in range(traj.steps):
        us = [LpPoint(traj.iterates[t].values + spread * rng.standard_normal(space.dim)
                      * 10.0 ** rng.uniform(-2.0, 0.5), space) for _ in range(samples)]
        obj_next = float(traj.losses[t + 1])
        for i, u in enumerate(us + extra):
            d_t, d_next, obj_u = _recursion_terms(traj, u, t)
            rhs = d_t + traj.eta * (obj_u - obj_next)
            scale = 1.0 + d_t + traj.eta * (abs(obj_u) + abs(obj_next))
            rec.record(f"t={t}:u={i}", d_next, rhs, scale)
    return rec.result()


def check_bregman_contraction(traj: MirrorTrajectory, u: LpPoint, t0: int,
                              tol: float = RECURSION_TOL) -> CheckResult:
    """
    The key recursion for this u at every step, and D(u, f_t) non-increasing for
    t <= t0 when F(u) = F(f_t0); a measured excess F(u) - F(f_t0) > 0 enters the
    allowance eta (F(u) - F(f_t0)).
    """
    if u.space != traj.space:
        raise ContractError("comparator lives in a different l^p space")
    obj_u = traj.objective.value(u.values)
    mismatch = max(0.0, obj_u - float(traj.losses[t0]))
    divs = [bregman_divergence(u, it) for it in traj.iterates]
    scale = 1.0 + divs[0]

    rec = CheckRecorder("md_bregman_contraction", tol, keep_details=False)
    for t in range(traj.steps):
        rhs = divs[t] + traj.eta * (obj_u - float(traj.losses[t + 1]))
        rec.record(f"recursion:t={t}", divs[t + 1], rhs, scale)
        if t < t0:
            rec.record(f"mono:t={t}", divs[t + 1], divs[t] + traj.eta * mismatch, scale)
    rec.note("level_mismatch", mismatch)
    return rec.result()


def check_duality_algebra(p_values: Iterable[float] = (1.5, 2.0, 3.0, 4.0), cases: int = 10_000,
                          seed: int = 0, tol: float = IDENTITY_TOL) -> CheckResult:
    """J^-1(J(f)) = f, the three-point identity and D(u, f) >= 0 with D(f, f) = 0."""
    rec = CheckRecorder("md_duality_algebra", tol, keep_details=False)
    rng = np.random.default_rng(seed)
    for p in p_values:
        for i in range(cases):
            dim = int(rng.integers(1, 6))
            space = LpSpace(p, rng.dirichlet(np.ones(dim)))
            x, y, z = (LpPoint(rng.standard_normal(dim) * 10.0 ** rng.uniform(-1.0, 1.0), space)
                       for _ in range(3))

            back = duality_map_inverse(duality_map(x), space).values
            err = float(np.max(np.abs(back - x.values)))
            rec.record(f"p={p}:roundtrip:{i}", err, 0.0, float(np.max(np.abs(x.values))))

            scale = identity_scale(x, y, z)
            rec.record(f"p={p}:three_point:{i}", three_point_identity_check(x, y, z), 0.0, scale)
            rec.record(f"p={p}:positivity:{i}", 0.0, bregman_divergence(x, y), identity_scale(x, y))
            rec.record(f"p={p}:zero:{i}", abs(bregman_divergence(x, x)), 0.0, identity_scale(x))
    return rec.result()


def check_p2_cross_oracle(loss: LossSpec, labels: Sequence[float], eta_gd: float, steps: int,
                          tol: float = CROSS_TOL) -> CheckResult:
    """
    Mirror descent at p = 2 with uniform weights on F(x) = (1/n) sum L(y_i, x_i)
    against kernel GD with the linear kernel on the basis vectors e_1..e_n (K = I),
    using the mirror step eta_gd / n. Iterates must agree coordinatewise, and the
    Fejer and Bregman-contraction checks must agree on pass/fail.
    """
    y = np.asarray(labels, dtype=float)
    n = y.size
    dataset = Dataset(np.eye(n), y)
    gd = run_gd(loss, dataset, LinearKernel(), GdConfig(step_sizes=eta_gd, max_steps=steps))

    space = LpSpace.uniform(2.0, n)
    objective = EmpiricalLossObjective(loss, np.eye(n), y)
    md = run_mirror_descent(objective, LpPoint(np.zeros(n), space), eta_gd / n, steps)

    rec = CheckRecorder("md_p2_cross_oracle", tol, keep_details=False)
    for t in range(steps + 1):
        diff = float(np.max(np.abs(gd.coefficients(t) - md.iterates[t].values)))
        rec.record(f"t={t}", diff, 0.0, 1.0 + float(np.max(np.abs(md.iterates[t].values))))

    t0 = steps // 2
    h = gd.iterate(steps)
    fejer = check_fejer(gd, h, t0)
    contraction = check_bregman_contraction(md, md.iterates[steps], t0)
    rec.record("pass_fail_agreement", float(fejer.passed != contraction.passed), 0.0)
    rec.note("fejer_worst_slack", fejer.worst_slack, min)
    rec.note("contraction_worst_slack", contraction.worst_slack, min)
    return rec.result()
