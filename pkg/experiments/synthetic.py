"""
Seeded synthetic problems with a known Bayes decision function.

Inputs are uniform on [-1, 1]^d. Regression labels are f*(x) plus gaussian noise
truncated at 6 sigma, so labels stay bounded; classification labels are +-1 with
P(y = 1 | x) = sigmoid(s f*(x)), whose logistic Bayes function is s f*.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy.special import expit
from scipy.stats import truncnorm

from kernels import GaussianKernel
from learning import Dataset
from losses import LossSpec
from utils.errors import InputDomainError, ParameterError

logger = logging.getLogger(__name__)

TRUNCATION = 6.0
HARD_SCALE = 25.0
MONTE_CARLO_SIZE = 200_000
SPAN_CENTERS = 3

# stream ids mixed into every seed: training draw, fresh samples, target construction
TRAIN_STREAM, SAMPLE_STREAM, TARGET_STREAM, BAYES_STREAM = 0, 1, 2, 3

Target = Callable[[np.ndarray], np.ndarray]


# ---------------------------------------------------------------------------
# Target catalogue
# ---------------------------------------------------------------------------

def _sine(d: int, seed: int, sigma: float) -> Target:
    return lambda xs: np.sin(np.pi * xs[:, 0])


def _linear(d: int, seed: int, sigma: float) -> Target:
    w = np.full(d, 1.0 / math.sqrt(d))
    return lambda xs: xs @ w


def _zero(d: int, seed: int, sigma: float) -> Target:
    return lambda xs: np.zeros(xs.shape[0])


def _bump(d: int, seed: int, sigma: float) -> Target:
    return lambda xs: np.exp(-4.0 * np.sum(xs ** 2, axis=1))


def _kernel_span(d: int, seed: int, sigma: float) -> Target:
    """sum_j a_j k(c_j, x) for a gaussian kernel of width sigma."""
    rng = np.random.default_rng([seed, TARGET_STREAM])
    centers = rng.uniform(-1.0, 1.0, (SPAN_CENTERS, d))
    coeffs = rng.normal(0.0, 0.5, SPAN_CENTERS)
    kernel = GaussianKernel(sigma)
    return lambda xs: kernel.cross(xs, centers) @ coeffs


REGRESSION_TARGETS: Dict[str, Dict] = {
    "sine": {"desc": "sin(pi x_1)", "build": _sine, "bound": lambda d: 1.0},
    "linear": {"desc": "<x, 1> / sqrt(d)", "build": _linear, "bound": lambda d: math.sqrt(d)},
    "bump": {"desc": "exp(-4 |x|^2)", "build": _bump, "bound": lambda d: 1.0},
    "kernel_span": {"desc": "gaussian kernel expansion over 3 random centres", "build": _kernel_span,
                    "bound": None},
    "zero": {"desc": "f* = 0; labels are pure noise", "build": _zero, "bound": lambda d: 0.0},
}

CLASSIFICATION_PROFILES: Dict[str, Dict] = {
    "symmetric": {"desc": "f* = sin(pi x_1); balanced classes", "target": "sine", "scale": None},
    "linear": {"desc": "f* = <x, 1> / sqrt(d)", "target": "linear", "scale": None},
    "hard": {"desc": "f* = sin(pi x_1) with a steep slope; nearly deterministic labels",
             "target": "sine", "scale": HARD_SCALE},
}


# ---------------------------------------------------------------------------
# Problem
# ---------------------------------------------------------------------------

@dataclass
class SyntheticProblem:
    """
    dataset        : the training sample
    bayes_function : f*_{L,P} as a vectorized callable on (m, d) inputs
    bayes_risk     : R*_{L,P} when known (analytic or a large Monte-Carlo estimate)
    bayes_risk_error : standard error of bayes_risk (0 when analytic)
    domain_bound   : sup |x| over the input domain
    label_bound    : sup |y| over the label distribution
    """

    dataset: Dataset
    bayes_function: Target
    bayes_risk: Optional[float]
    domain_bound: float
    label_bound: float
    kind: str
    name: str
    bayes_risk_error: float = 0.0
    _draw: Callable[[int, np.random.Generator], Tuple[np.ndarray, np.ndarray]] = field(
        default=None, repr=False
    )

    def sample(self, n: int, seed: int) -> Dataset:
        """A fresh sample of size n from the same distribution (independent of the training draw)."""
        if n < 1:
            raise InputDomainError(f"sample size must be >= 1, got {n}")
        xs, ys = self._draw(n, np.random.default_rng([seed, SAMPLE_STREAM]))
        return Dataset(xs, ys)

    def monte_carlo_risk(self, loss: LossSpec, predict: Target, n: int = MONTE_CARLO_SIZE,
                         seed: int = 0) -> Tuple[float, float]:
        """(mean, standard error) of L(y, predict(x)) over a fresh sample."""
        xs, ys = self._draw(n, np.random.default_rng([seed, BAYES_STREAM]))
        values = np.asarray(loss.value(ys, predict(xs)), dtype=float)
        return float(np.mean(values)), float(np.std(values) / math.sqrt(n))


def _check_common(n: int, d: int):
    if isinstance(n, bool) or int(n) != n or n < 2:
        raise InputDomainError(f"n must be an integer >= 2, got {n!r}")
    if int(d) != d or d < 1:
        raise InputDomainError(f"d must be a positive integer, got {d!r}")


def _noise(rng: np.random.Generator, n: int, sigma: float) -> np.ndarray:
    if sigma == 0.0:
        return np.zeros(n)
    return truncnorm.rvs(-TRUNCATION, TRUNCATION, scale=sigma, size=n, random_state=rng)


def truncated_noise_variance(sigma: float) -> float:
    """Second moment of gaussian(0, sigma^2) truncated to +-6 sigma."""
    if sigma == 0.0:
        return 0.0
    return float(truncnorm.var(-TRUNCATION, TRUNCATION, scale=sigma))


def generate_regression(n: int, d: int = 1, target: str = "sine", noise_sigma: float = 0.1,
                        seed: int = 0, sigma: float = 0.5) -> SyntheticProblem:
    """
    y = f*(x) + truncated gaussian noise. The least-squares Bayes risk is the
    truncated noise variance; sigma is the width of the kernel_span target.
    """
    _check_common(n, d)
    if target not in REGRESSION_TARGETS:
        raise ParameterError(f"Unknown target: '{target}'. Available: {list(REGRESSION_TARGETS)}")
    if not (math.isfinite(noise_sigma) and noise_sigma >= 0):
        raise ParameterError(f"noise_sigma must be >= 0, got {noise_sigma!r}")
    entry = REGRESSION_TARGETS[target]
    f_star = entry["build"](d, seed, sigma)

    def draw(m: int, rng: np.random.Generator):
        xs = rng.uniform(-1.0, 1.0, (m, d))
        return xs, f_star(xs) + _noise(rng, m, noise_sigma)

    xs, ys = draw(int(n), np.random.default_rng([seed, TRAIN_STREAM]))
    if entry["bound"] is None:
        grid = np.random.default_rng([seed, TARGET_STREAM, 1]).uniform(-1.0, 1.0, (4096, d))
        f_bound = float(np.max(np.abs(f_star(grid))))
    else:
        f_bound = entry["bound"](d)
    logger.info("[DATA] regression target=%s n=%d d=%d sigma=%.3g seed=%d", target, n, d, noise_sigma, seed)
    return SyntheticProblem(
        dataset=Dataset(xs, ys),
        bayes_function=f_star,
        bayes_risk=truncated_noise_variance(noise_sigma),
        domain_bound=math.sqrt(d),
        label_bound=f_bound + TRUNCATION * noise_sigma,
        kind="regression",
        name=target,
        _draw=draw,
    )


def generate_classification(n: int, d: int = 1, profile: str = "symmetric", seed: int = 0,
                            scale: float = 4.0) -> SyntheticProblem:
    """
    Labels +-1 with P(y = 1 | x) = sigmoid(s f*(x)). The logistic Bayes function
    is s f*; its risk (the expected binary entropy) is a Monte-Carlo estimate.
    """
    _check_common(n, d)
    if profile not in CLASSIFICATION_PROFILES:
        raise ParameterError(f"Unknown profile: '{profile}'. Available: {list(CLASSIFICATION_PROFILES)}")
    if not (math.isfinite(scale) and scale > 0):
        raise ParameterError(f"scale must be positive, got {scale!r}")
    entry = CLASSIFICATION_PROFILES[profile]
    s = entry["scale"] or scale
    f_star = REGRESSION_TARGETS[entry["target"]]["build"](d, seed, 0.5)

    def logit(xs: np.ndarray) -> np.ndarray:
        return s * f_star(xs)

    def draw(m: int, rng: np.random.Generator):
        xs = rng.uniform(-1.0, 1.0, (m, d))
        ys = np.where(rng.uniform(size=m) < expit(logit(xs)), 1.0, -1.0)
        return xs, ys

    xs, ys = draw(int(n), np.random.default_rng([seed, TRAIN_STREAM]))
    mc_x = np.random.default_rng([seed, BAYES_STREAM]).uniform(-1.0, 1.0, (MONTE_CARLO_SIZE, d))
    z = logit(mc_x)
    p = expit(z)
    entropy = p * np.logaddexp(0.0, -z) + (1.0 - p) * np.logaddexp(0.0, z)
    logger.info("[DATA] classification profile=%s n=%d d=%d s=%.3g seed=%d", profile, n, d, s, seed)
    return SyntheticProblem(
        dataset=Dataset(xs, ys),
        bayes_function=logit,
        bayes_risk=float(np.mean(entropy)),
        bayes_risk_error=float(np.std(entropy) / math.sqrt(MONTE_CARLO_SIZE)),
        domain_bound=math.sqrt(d),
        label_bound=1.0,
        kind="classification",
        name=profile,
        _draw=draw,
    )
