import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from utils.errors import ParameterError

from .base import BaseKernel


@dataclass(frozen=True)
class GaussianKernel(BaseKernel):
    """k(x, x') = exp(-||x - x'||^2 / (2 sigma^2))."""

    sigma: float = 1.0
    kind: str = field(default="gaussian", init=False)

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ParameterError(f"gaussian sigma must be positive, got {self.sigma!r}")

    def pairwise(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        sq = np.maximum(cdist(xs, ys, "sqeuclidean"), 0.0)
        return np.exp(-sq / (2.0 * self.sigma ** 2))

    def diagonal(self, xs: np.ndarray) -> np.ndarray:
        return np.ones(xs.shape[0])

    def sup_embedding(self, domain_bound: float) -> float:
        return 1.0

    def describe(self) -> str:
        return f"gaussian(sigma={self.sigma:g})"
