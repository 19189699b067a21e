import math
from dataclasses import dataclass, field

import numpy as np

from utils.errors import ParameterError

from .base import BaseKernel


@dataclass(frozen=True)
class LinearKernel(BaseKernel):
    """k(x, x') = <x, x'>."""

    kind: str = field(default="linear", init=False)

    def pairwise(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        return xs @ ys.T

    def diagonal(self, xs: np.ndarray) -> np.ndarray:
        return np.einsum("ij,ij->i", xs, xs)

    def sup_embedding(self, domain_bound: float) -> float:
        return domain_bound


@dataclass(frozen=True)
class PolynomialKernel(BaseKernel):
    """k(x, x') = (offset + <x, x'>)^degree."""

    degree: int = 2
    offset: float = 1.0
    kind: str = field(default="polynomial", init=False)

    def __post_init__(self):
        if isinstance(self.degree, bool) or int(self.degree) != self.degree or self.degree < 1:
            raise ParameterError(f"polynomial degree must be an integer >= 1, got {self.degree!r}")
        if not (math.isfinite(self.offset) and self.offset >= 0):
            raise ParameterError(f"polynomial offset must be nonnegative, got {self.offset!r}")
        object.__setattr__(self, "degree", int(self.degree))

    def pairwise(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        return (self.offset + xs @ ys.T) ** self.degree

    def diagonal(self, xs: np.ndarray) -> np.ndarray:
        return (self.offset + np.einsum("ij,ij->i", xs, xs)) ** self.degree

    def sup_embedding(self, domain_bound: float) -> float:
        # (offset + <x, x>)^d is increasing in ||x||, so the sup sits on the sphere
        return float((self.offset + domain_bound ** 2) ** (0.5 * self.degree))

    def describe(self) -> str:
        return f"polynomial(degree={self.degree}, offset={self.offset:g})"
