"""
Run one experiment configuration and write its artifacts.

Modes
  train  : one GD run (trajectory CSV, snapshot file, optional RERM path)
  cv     : split, train through the stopping grid, select on the validation split
  verify : the verification suite plus the end-to-end CV sanity checks
  rates  : rate exponents for a parameter table, optionally an empirical rate fit

Exit codes: 0 ok, 1 a check failed or a computation broke down, 2 usage/config error.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from kernels import BaseKernel, GaussianKernel, make_kernel
from learning import (
    CvSettings,
    Dataset,
    GdConfig,
    cv_pipeline,
    learning_rate_exponent,
    reference_gd_exponent,
    rerm_risk_path,
    run_gd,
    simple_rate_exponent,
)
from losses import LossSpec
from utils.errors import ConfigError, SelfRegError, StepSizeError
from utils.export import (
    export_checks,
    export_csv,
    export_cv_report,
    export_json,
    export_mirror_trajectory,
    export_rates,
    export_rerm_path,
    export_snapshots,
    export_trajectory,
)
from utils.workers import parallel_map
from verify import CheckRecorder, CheckResult, mirror_reference_runs, run_suite

from .config import ExperimentConfig
from .synthetic import SyntheticProblem, generate_classification, generate_regression

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2
CV_PASS_FRACTION = 0.9
SANITY_N = 200
SANITY_TEST_N = 1000


@dataclass
class RunResult:
    mode: str
    exit_code: int
    out_dir: Path
    artifacts: Dict[str, str] = field(default_factory=dict)
    summary: Dict[str, Any] = field(default_factory=dict)
    trajectory: Any = None
    cv: Any = None
    checks: List[CheckResult] = field(default_factory=list)
    rates: List[Dict[str, Any]] = field(default_factory=list)
    empirical: List[Dict[str, Any]] = field(default_factory=list)
    error: Optional[str] = None


# ---------------------------------------------------------------------------
# Building blocks
# ---------------------------------------------------------------------------

def build_problem(config: ExperimentConfig) -> Tuple[Dataset, Optional[SyntheticProblem]]:
    ds = config.dataset
    if ds.kind == "explicit":
        return Dataset(np.array(ds.xs, dtype=float), np.array(ds.ys, dtype=float)), None
    if ds.kind == "classification":
        problem = generate_classification(ds.n, ds.d, ds.profile, config.seed, scale=ds.scale)
    else:
        problem = generate_regression(ds.n, ds.d, ds.target, ds.noise_sigma, config.seed,
                                      sigma=config.kernel.sigma)
    return problem.dataset, problem


def build_kernel(config: ExperimentConfig) -> BaseKernel:
    return make_kernel(config.kernel.kind, **config.kernel.params)


def build_loss(config: ExperimentConfig, dataset: Dataset) -> LossSpec:
    lc = config.loss
    if lc.clip_level > 0:
        return LossSpec(lc.kind, clip_level=lc.clip_level, **lc.params)
    return LossSpec.for_labels(lc.kind, dataset.ys, **lc.params)


def build_gd_config(config: ExperimentConfig) -> GdConfig:
    gd = config.gd
    steps = gd.step_sizes if gd.step_sizes else gd.eta
    return GdConfig(
        step_sizes=steps,
        max_steps=gd.steps,
        record_times=gd.record_times or None,
        decay=gd.decay,
        strict=gd.strict,
        bound=gd.bound,
    )


def _test_set(config: ExperimentConfig, problem: Optional[SyntheticProblem]) -> Optional[Dataset]:
    if problem is None or config.dataset.test_n <= 0:
        return None
    return problem.sample(config.dataset.test_n, config.seed)


# ---------------------------------------------------------------------------
# Modes
# ---------------------------------------------------------------------------

def run_train(config: ExperimentConfig, result: RunResult, workers: Optional[int]):
    dataset, _ = build_problem(config)
    kernel = build_kernel(config)
    loss = build_loss(config, dataset)
    traj = run_gd(loss, dataset, kernel, build_gd_config(config))
    result.trajectory = traj
    out = result.out_dir
    result.artifacts["trajectory"] = export_trajectory(traj, out / "trajectory.csv")
    result.artifacts["snapshots"] = export_snapshots(traj, out / "snapshots.bin")
    if config.gd.rerm_lambdas:
        path = rerm_risk_path(loss, dataset, kernel, config.gd.rerm_lambdas, workers=workers)
        result.artifacts["rerm_path"] = export_rerm_path(path, out / "rerm_path.csv")
    result.summary.update({
        "n": dataset.n,
        "steps": traj.max_steps,
        "step_cap": traj.step_cap,
        "initial_risk": float(traj.risks[0]),
        "final_risk": float(traj.risks[-1]),
        "cap_violations": len(traj.cap_violations),
    })


def run_cv(config: ExperimentConfig, result: RunResult, workers: Optional[int]):
    dataset, problem = build_problem(config)
    kernel = build_kernel(config)
    loss = build_loss(config, dataset)
    cv = cv_pipeline(loss, dataset, kernel, config.cv, test=_test_set(config, problem), workers=workers)
    result.cv = cv
    result.trajectory = cv.trajectory
    out = result.out_dir
    result.artifacts["cv_report"] = export_cv_report(cv.report, out / "cv_report.csv")
    result.artifacts["trajectory"] = export_trajectory(cv.trajectory, out / "trajectory.csv")
    report = cv.report
    result.summary.update({
        "n1": cv.train.n,
        "n2": cv.validation.n,
        "grid": list(report.grid.times),
        "selected_time": report.selected_time,
        "selected_validation_risk": report.selected_validation_risk,
        "selected_test_risk": report.selected_test_risk,
        "clip_level": report.clip_level,
        "expansion_factor": report.grid.expansion_factor,
        "bayes_risk": problem.bayes_risk if problem is not None else None,
        "bayes_risk_error": problem.bayes_risk_error if problem is not None else None,
    })


def _cv_sanity_instance(kind: str, seed: int) -> Tuple[int, int, float, float, float]:
    """(selected index, grid size, selected test risk, best test risk, deviation) for one seed."""
    if kind == "realizable":
        problem = generate_regression(SANITY_N, 1, "kernel_span", 0.0, seed, sigma=0.5)
    elif kind == "noise":
        problem = generate_regression(SANITY_N, 1, "zero", 1.0, seed)
    else:
        problem = generate_regression(SANITY_N, 1, "sine", 0.3, seed)
    test = problem.sample(SANITY_TEST_N, seed)
    loss = LossSpec.for_labels("least_squares", problem.dataset.ys)
    settings = CvSettings(seed=seed, eta=0.5, match_lambdas=False)
    report = cv_pipeline(loss, problem.dataset, GaussianKernel(0.5), settings, test=test, workers=1).report
    times = list(report.grid.times)
    deviation = max(abs(report.validation_risks[t] - report.test_risks[t]) for t in times)
    return (times.index(report.selected_time), len(times), float(report.selected_test_risk),
            min(report.test_risks.values()), deviation)


def cv_sanity_checks(seeds: int, base_seed: int = 0, workers: Optional[int] = None) -> List[CheckResult]:
    """
    End-to-end selection sanity over many seeds: noiseless realizable data selects
    in the top half of the grid, pure noise in the bottom half, and the selected
    test risk stays within twice the validation/test deviation of the grid best.
    Each criterion passes when at least 90% of the seeds pass.
    """
    jobs = [(kind, base_seed + s) for kind in ("realizable", "noise", "selection") for s in range(seeds)]
    outcomes = dict(zip(jobs, parallel_map(lambda job: _cv_sanity_instance(*job), jobs, workers)))
    required = math.ceil(CV_PASS_FRACTION * seeds)

    criteria = {
        "cv_realizable_top_half": ("realizable", lambda i, m, sel, best, dev: i >= m / 2),
        "cv_noise_bottom_half": ("noise", lambda i, m, sel, best, dev: i < m / 2),
        "cv_selection_vs_best": ("selection", lambda i, m, sel, best, dev: sel <= best + 2.0 * dev + 1e-12),
    }
    results = []
    for name, (kind, passes) in criteria.items():
        rec = CheckRecorder(name, 0.0)
        count = 0
        for s in range(seeds):
            outcome = outcomes[(kind, base_seed + s)]
            ok = passes(*outcome)
            count += int(ok)
            if not ok:
                rec.skip(f"seed={base_seed + s}", f"selected index {outcome[0]} of {outcome[1]}")
        rec.record("passing_seeds", float(required), float(count))
        rec.note("passing_fraction", count / seeds)
        results.append(rec.result())
    return results


def run_verify(config: ExperimentConfig, result: RunResult, workers: Optional[int]):
    checks = run_suite(config.verify, workers=workers)
    if config.verify.cv_seeds > 0:
        checks.extend(cv_sanity_checks(config.verify.cv_seeds, config.seed, workers))
    result.checks = checks
    result.artifacts["checks"] = export_checks(checks, result.out_dir / "checks.csv")
    for name, traj in mirror_reference_runs(config.verify).items():
        result.artifacts[f"mirror_{name}"] = export_mirror_trajectory(traj, result.out_dir / f"mirror_{name}.csv")
    failed = [c.name for c in checks if not c.passed]
    result.summary.update({"checks": len(checks), "failed": failed})
    if failed:
        result.exit_code = EXIT_CHECK_FAILED


def rate_table(config: ExperimentConfig) -> List[Dict[str, Any]]:
    rc = config.rates
    rows = []
    for beta, gamma, theta, q in itertools.product(rc.beta, rc.gamma, rc.theta, rc.q):
        rho, simple = simple_rate_exponent(beta, gamma, q)
        rows.append({
            "beta": beta,
            "gamma": gamma,
            "theta": theta,
            "q": q,
            "alpha": learning_rate_exponent(beta, gamma, theta, q),
            "simple_rho": rho,
            "simple_rate": simple,
            "reference_gd": reference_gd_exponent(beta, gamma, theta, q),
        })
    return rows


def empirical_rate(config: ExperimentConfig, workers: Optional[int] = None) -> Tuple[List[Dict[str, Any]], float]:
    """
    Mean excess clipped test risk of CV-selected predictors per sample size and
    the least-squares slope of log excess against log n.
    """
    ds = config.dataset
    if config.loss.kind != "least_squares" or ds.kind != "regression":
        raise ConfigError("the empirical rate fit needs a least-squares regression problem", key="rates.empirical")
    kernel = build_kernel(config)

    def one(job: Tuple[int, int]) -> float:
        n, s = job
        problem = generate_regression(n, ds.d, ds.target, ds.noise_sigma, config.seed + s,
                                      sigma=config.kernel.sigma)
        test = problem.sample(config.rates.test_n, config.seed + s)
        loss = LossSpec.for_labels("least_squares", problem.dataset.ys)
        settings = CvSettings(seed=config.seed + s, eta=config.gd.eta, decay=config.gd.decay,
                              strict=config.gd.strict, bound=config.gd.bound, match_lambdas=False)
        report = cv_pipeline(loss, problem.dataset, kernel, settings, test=test, workers=1).report
        return float(report.selected_test_risk) - problem.bayes_risk

    jobs = [(n, s) for n in config.rates.n_values for s in range(config.rates.seeds)]
    excess = dict(zip(jobs, parallel_map(one, jobs, workers)))
    rows = []
    for n in config.rates.n_values:
        values = [excess[(n, s)] for s in range(config.rates.seeds)]
        rows.append({"n": n, "mean_excess": float(np.mean(values)), "std_excess": float(np.std(values))})

    logs = [(math.log(r["n"]), math.log(r["mean_excess"])) for r in rows if r["mean_excess"] > 0]
    slope = float(np.polyfit(*zip(*logs), 1)[0]) if len(logs) >= 2 else math.nan
    logger.info("[RUN] empirical rate slope %.4f over %d sample sizes", slope, len(logs))
    return rows, slope


def run_rates(config: ExperimentConfig, result: RunResult, workers: Optional[int]):
    result.rates = rate_table(config)
    result.artifacts["rates"] = export_rates(result.rates, result.out_dir / "rates.csv")
    if config.rates.empirical:
        rows, slope = empirical_rate(config, workers)
        result.empirical = rows
        result.artifacts["empirical_rate"] = export_csv(rows, result.out_dir / "empirical_rate.csv",
                                                        columns=["n", "mean_excess", "std_excess"])
        result.summary["empirical_slope"] = slope


MODES = {
    "train": run_train,
    "cv": run_cv,
    "verify": run_verify,
    "rates": run_rates,
}


def run(config: ExperimentConfig, workers: Optional[int] = None) -> RunResult:
    """Execute config.mode, write its artifacts and a JSON summary into config.out."""
    result = RunResult(mode=config.mode, exit_code=EXIT_OK, out_dir=Path(config.out))
    result.summary.update({"mode": config.mode, "seed": config.seed,
                           "config": {k: v for k, v in sorted(config.values.items())}})
    logger.info("[RUN] mode=%s seed=%d out=%s", config.mode, config.seed, config.out)
    try:
        MODES[config.mode](config, result, workers)
    except (ConfigError, StepSizeError) as e:
        # a step size above the data-dependent cap is a configuration error
        logger.error("[RUN] %s failed: %s", config.mode, e)
        result.error = str(e)
        result.exit_code = EXIT_USAGE
        return result
    except (SelfRegError, ValueError, ArithmeticError, RuntimeError) as e:
        logger.error("[RUN] %s failed: %s", config.mode, e)
        result.error = str(e)
        result.exit_code = EXIT_CHECK_FAILED
        return result

    result.summary["artifacts"] = {k: Path(v).name for k, v in sorted(result.artifacts.items())}
    result.summary["exit_code"] = result.exit_code
    result.artifacts["summary"] = export_json(result.summary, result.out_dir / "summary.json")
    return result
