"""
Gradient descent on the empirical risk in an RKHS.

Iterates live in span{k(x_i, .)}, so f_k is stored as its coefficient vector
alpha_k on the training points and

    f_{k+1} = f_k - eta_k * grad R_D(f_k),   grad R_D(f) = (1/n) sum_i L'(y_i, f(x_i)) k(x_i, .)

becomes alpha_{k+1} = alpha_k - eta_k * g_k with g_k = L'(y, K alpha_k) / n.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from kernels import BaseKernel, RkhsFunction, as_points, data_local_bound, gram_matrix, sup_embedding_bound
from losses import LossSpec
from utils.errors import ContractError, InputDomainError, NumericError, ParameterError, StepSizeError

from .dataset import Dataset

logger = logging.getLogger(__name__)

CAP_SLACK = 1e-12
BOUNDS = ("global", "data_local")


@dataclass(frozen=True)
class GdConfig:
    """
    step_sizes   : constant eta (optionally decayed as eta * (k+1)^-decay) or an explicit list
    max_steps    : number of gradient steps
    record_times : snapshot indices; None records every step. 0 and max_steps are always kept.
    strict       : raise StepSizeError when some eta_k exceeds 1/M' (otherwise warn and flag)
    bound        : "global" (sup embedding bound over the data ball) or "data_local" kappa
    """

    step_sizes: Union[float, Sequence[float]]
    max_steps: int
    record_times: Optional[Sequence[int]] = None
    decay: float = 0.0
    strict: bool = True
    bound: str = "global"

    def __post_init__(self):
        if isinstance(self.max_steps, bool) or int(self.max_steps) != self.max_steps or self.max_steps < 0:
            raise ParameterError(f"max_steps must be a nonnegative integer, got {self.max_steps!r}")
        object.__setattr__(self, "max_steps", int(self.max_steps))
        if not (math.isfinite(self.decay) and 0.0 <= self.decay < 1.0):
            raise ParameterError(f"decay must lie in [0, 1), got {self.decay!r}")
        if self.bound not in BOUNDS:
            raise ParameterError(f"Unknown embedding bound: '{self.bound}'. Available: {list(BOUNDS)}")

        if np.ndim(self.step_sizes) == 0:
            eta = float(self.step_sizes)
            if not (math.isfinite(eta) and eta > 0):
                raise ParameterError(f"step size must be a positive real, got {self.step_sizes!r}")
            object.__setattr__(self, "step_sizes", eta)
        else:
            etas = tuple(float(e) for e in self.step_sizes)
            if self.decay:
                raise ParameterError("decay applies to a constant step size, not to an explicit list")
            if len(etas) < self.max_steps:
                raise ParameterError(
                    f"explicit step list has {len(etas)} entries, max_steps is {self.max_steps}"
                )
            if not all(math.isfinite(e) and e > 0 for e in etas):
                raise ParameterError(f"step sizes must be positive reals, got {list(etas)}")
            object.__setattr__(self, "step_sizes", etas)

        if self.record_times is not None:
            times = sorted(set(int(m) for m in self.record_times))
            if times and (times[0] < 0 or times[-1] > self.max_steps):
                raise ParameterError(
                    f"record_times must lie in [0, {self.max_steps}], got {list(self.record_times)}"
                )
            object.__setattr__(self, "record_times", tuple(times))

    def eta(self, k: int) -> float:
        if isinstance(self.step_sizes, tuple):
            return self.step_sizes[k]
        if self.decay:
            return self.step_sizes * (k + 1) ** (-self.decay)
        return self.step_sizes

    def etas(self) -> np.ndarray:
        return np.array([self.eta(k) for k in range(self.max_steps)], dtype=float)

    def snapshot_times(self) -> Tuple[int, ...]:
        if self.record_times is None:
            return tuple(range(self.max_steps + 1))
        return tuple(sorted(set(self.record_times) | {0, self.max_steps}))


@dataclass(eq=False)
class GdTrajectory:
    """
    Result of run_gd. risks[k] = R_D(f_k) for k = 0..max_steps, cum_steps[m] = S_m
    (cum_steps[0] = 0), snapshots[m] = alpha_m for every recorded m.
    """

    config: GdConfig
    dataset: Dataset
    kernel: BaseKernel
    loss: LossSpec
    gram: np.ndarray
    etas: np.ndarray
    cum_steps: np.ndarray
    risks: np.ndarray
    grad_sq_norms: np.ndarray
    snapshots: Dict[int, np.ndarray]
    step_cap: float
    cap_violations: List[int] = field(default_factory=list)

    @property
    def max_steps(self) -> int:
        return self.config.max_steps

    def coefficients(self, m: int) -> np.ndarray:
        """alpha_m, replayed from the nearest earlier snapshot when m was not recorded."""
        if not 0 <= m <= self.max_steps:
            raise InputDomainError(f"step index must lie in [0, {self.max_steps}], got {m}")
        if m in self.snapshots:
            return self.snapshots[m]
        start = max(k for k in self.snapshots if k <= m)
        alpha = self.snapshots[start]
        for k in range(start, m):
            alpha = alpha - self.etas[k] * self.gradient(alpha)
        return alpha

    def gradient(self, alpha: np.ndarray) -> np.ndarray:
        return _gradient_coeffs(self.loss, self.dataset.ys, self.gram @ alpha)

    def function(self, alpha: np.ndarray) -> RkhsFunction:
        return RkhsFunction(self.dataset.xs, alpha, self.kernel, self.gram)

    def iterate(self, m: int) -> RkhsFunction:
        return self.function(self.coefficients(m))


# ---------------------------------------------------------------------------
# Risk and gradient
# ---------------------------------------------------------------------------

def _gradient_coeffs(loss: LossSpec, ys: np.ndarray, predictions: np.ndarray) -> np.ndarray:
    g = np.asarray(loss.derivative(ys, predictions), dtype=float) / ys.shape[0]
    if not np.all(np.isfinite(g)):
        raise NumericError("non-finite entries in the risk gradient")
    return g


def _predictions(dataset: Dataset, f: RkhsFunction) -> np.ndarray:
    if _on_support(dataset, f):
        return f.gram_matrix() @ f.coeffs
    return f.evaluate_many(dataset.xs)


def _on_support(dataset: Dataset, f: RkhsFunction) -> bool:
    return f.support.shape == dataset.xs.shape and np.array_equal(f.support, dataset.xs)


def empirical_risk(loss: LossSpec, dataset: Dataset, f: RkhsFunction) -> float:
    """R_D(f) = (1/n) sum_i L(y_i, f(x_i))."""
    if dataset.n == 0:
        raise InputDomainError("empirical risk of an empty dataset")
    return float(np.mean(loss.value(dataset.ys, _predictions(dataset, f))))


def risk_gradient_coeffs(loss: LossSpec, dataset: Dataset, f: RkhsFunction) -> np.ndarray:
    """Coefficients g of grad R_D(f) = sum_i g_i k(x_i, .) on the training support."""
    if not _on_support(dataset, f):
        raise ContractError("gradient coefficients need f to be supported on the dataset points, in order")
    return _gradient_coeffs(loss, dataset.ys, f.gram_matrix() @ f.coeffs)


def gd_step(f: RkhsFunction, g: np.ndarray, eta: float, cap: Optional[float] = None) -> RkhsFunction:
    """f - eta * sum_i g_i k(x_i, .)"""
    g = np.asarray(g, dtype=float)
    if g.shape != f.coeffs.shape:
        raise ContractError(f"gradient has shape {g.shape}, coefficients {f.coeffs.shape}")
    if not np.all(np.isfinite(g)):
        raise NumericError("non-finite entries in the risk gradient")
    if not (math.isfinite(eta) and eta > 0):
        raise ParameterError(f"step size must be a positive real, got {eta!r}")
    if cap is not None and eta > cap * (1.0 + CAP_SLACK):
        logger.warning("[GD] step size %.6g exceeds the smoothness cap %.6g", eta, cap)
    return f.with_coeffs(f.coeffs - eta * g)


# ---------------------------------------------------------------------------
# Step-size cap
# ---------------------------------------------------------------------------

def smoothness_of_risk(loss: LossSpec, kernel: BaseKernel, xs, bound: str = "global") -> float:
    """M' = M * kappa^2, the smoothness constant of R_D on H."""
    if bound not in BOUNDS:
        raise ParameterError(f"Unknown embedding bound: '{bound}'. Available: {list(BOUNDS)}")
    if bound == "global":
        radius = float(np.max(np.linalg.norm(as_points(xs), axis=1)))
        kappa = sup_embedding_bound(kernel, radius)
    else:
        kappa = data_local_bound(kernel, xs)
    return loss.smoothness_constant() * kappa ** 2


def step_size_cap(loss: LossSpec, kernel: BaseKernel, xs, bound: str = "global") -> float:
    """1/M'; infinite when every training point has k(x, x) = 0."""
    m_prime = smoothness_of_risk(loss, kernel, xs, bound)
    return math.inf if m_prime == 0 else 1.0 / m_prime


def _exact_prefix_sums(etas: Sequence[float]) -> np.ndarray:
    # rounded once from exact rational sums, so S_m is the correctly rounded prefix sum
    sums = [0.0]
    acc = Fraction(0)
    for eta in etas:
        acc += Fraction(eta)
        sums.append(float(acc))
    return np.array(sums, dtype=float)


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------

def run_gd(loss: LossSpec, dataset: Dataset, kernel: BaseKernel, config: GdConfig,
           gram: Optional[np.ndarray] = None) -> GdTrajectory:
    """Run gradient descent from f_0 = 0 for config.max_steps steps."""
    K = gram_matrix(kernel, dataset.xs) if gram is None else np.asarray(gram, dtype=float)
    etas = config.etas()
    cap = step_size_cap(loss, kernel, dataset.xs, config.bound)

    violations = [k for k, eta in enumerate(etas) if eta > cap * (1.0 + CAP_SLACK)]
    if violations:
        first = violations[0]
        msg = (f"step size eta_{first} = {etas[first]:.6g} exceeds 1/M' = {cap:.6g} "
               f"({len(violations)} of {len(etas)} steps above the cap)")
        if config.strict:
            raise StepSizeError(msg)
        logger.warning("[GD] %s; continuing in warn mode", msg)

    record = set(config.snapshot_times())
    ys = dataset.ys
    alpha = np.zeros(dataset.n)
    snapshots = {0: alpha.copy()}
    risks = np.empty(config.max_steps + 1)
    grad_sq = np.empty(config.max_steps + 1)

    logger.info("[GD] n=%d steps=%d kernel=%s loss=%s cap=%.6g",
                dataset.n, config.max_steps, kernel.describe(), loss.kind, cap)
    for k in range(config.max_steps + 1):
        pred = K @ alpha
        if not np.all(np.isfinite(pred)):
            raise NumericError(f"predictions diverged at step {k}")
        risks[k] = float(np.mean(loss.value(ys, pred)))
        g = _gradient_coeffs(loss, ys, pred)
        grad_sq[k] = max(float(g @ K @ g), 0.0)
        if k == config.max_steps:
            break
        alpha = alpha - etas[k] * g
        if k + 1 in record:
            snapshots[k + 1] = alpha.copy()
        logger.debug("[GD] step %d eta=%.6g risk=%.10g", k, etas[k], risks[k])

    logger.info("[GD] final risk %.10g after %d steps", risks[-1], config.max_steps)
    return GdTrajectory(
        config=config,
        dataset=dataset,
        kernel=kernel,
        loss=loss,
        gram=K,
        etas=etas,
        cum_steps=_exact_prefix_sums(etas),
        risks=risks,
        grad_sq_norms=grad_sq,
        snapshots=snapshots,
        step_cap=cap,
        cap_violations=violations,
    )


def interpolate(traj: GdTrajectory, t: float) -> RkhsFunction:
    """
    Continuous-time iterate f_t = f_[t] - (t - [t]) * eta_[t] * grad R_D(f_[t]);
    a fractional step along the gradient at the floor index.
    """
    if not (math.isfinite(t) and 0.0 <= t <= traj.max_steps):
        raise InputDomainError(f"t must lie in [0, {traj.max_steps}], got {t!r}")
    base = int(math.floor(t))
    frac = t - base
    alpha = traj.coefficients(base)
    if frac == 0.0:
        return traj.function(alpha)
    return traj.function(alpha - frac * traj.etas[base] * traj.gradient(alpha))


def cumulative_step_sum(traj: GdTrajectory, m: int) -> float:
    """S_m = sum_{k<m} eta_k."""
    if isinstance(m, bool) or int(m) != m or not 1 <= m <= traj.max_steps:
        raise InputDomainError(f"m must be an integer in [1, {traj.max_steps}], got {m!r}")
    return float(traj.cum_steps[int(m)])
