"""
Convex differentiable objectives on R^d for mirror descent.

gradient() is the Euclidean gradient; the mirror step divides it by the space
weights to obtain the gradient with respect to the weighted pairing.
"""

from abc import ABC, abstractmethod
from typing import Optional, Sequence

import numpy as np

from losses import LossSpec
from utils.errors import InputDomainError, ParameterError


class Objective(ABC):
    """Base class for objectives F: R^d -> R."""

    name: str = "objective"

    def __init__(self, dim: int):
        self.dim = int(dim)

    @abstractmethod
    def value(self, x: np.ndarray) -> float:
        pass

    @abstractmethod
    def gradient(self, x: np.ndarray) -> np.ndarray:
        pass

    def minimizer(self) -> Optional[np.ndarray]:
        """A known minimizer, when one is available in closed form."""
        return None

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise InputDomainError(f"{self.name} expects a vector of length {self.dim}, got shape {x.shape}")
        return x


class QuadraticObjective(Objective):
    """F(x) = (x - c)^T A (x - c) + offset, A symmetric PSD."""

    name = "quadratic"

    def __init__(self, matrix, center, offset: float = 0.0):
        A = np.atleast_2d(np.asarray(matrix, dtype=float))
        c = np.atleast_1d(np.asarray(center, dtype=float))
        if A.shape != (c.size, c.size):
            raise InputDomainError(f"matrix shape {A.shape} does not match center length {c.size}")
        if np.min(np.linalg.eigvalsh(0.5 * (A + A.T))) < -1e-12 * max(1.0, float(np.trace(A))):
            raise ParameterError("quadratic objective needs a positive semidefinite matrix")
        super().__init__(c.size)
        self.matrix = 0.5 * (A + A.T)
        self.center = c
        self.offset = float(offset)

    @classmethod
    def diagonal(cls, scales: Sequence[float], center: Sequence[float], offset: float = 0.0) -> "QuadraticObjective":
        """F(x) = sum_i a_i (x_i - c_i)^2 + offset."""
        scales = np.asarray(scales, dtype=float)
        if np.any(scales < 0):
            raise ParameterError("diagonal scales must be nonnegative")
        return cls(np.diag(scales), center, offset)

    def value(self, x) -> float:
        r = self._check(x) - self.center
        return float(r @ self.matrix @ r) + self.offset

    def gradient(self, x) -> np.ndarray:
        return 2.0 * self.matrix @ (self._check(x) - self.center)

    def minimizer(self) -> np.ndarray:
        return self.center.copy()


class LinearObjective(Objective):
    """F(x) = <c, x> + offset (zero curvature)."""

    name = "linear"

    def __init__(self, coefficients, offset: float = 0.0):
        c = np.atleast_1d(np.asarray(coefficients, dtype=float))
        super().__init__(c.size)
        self.coefficients = c
        self.offset = float(offset)

    def value(self, x) -> float:
        return float(self.coefficients @ self._check(x)) + self.offset

    def gradient(self, x) -> np.ndarray:
        self._check(x)
        return self.coefficients.copy()


class EmpiricalLossObjective(Objective):
    """F(x) = (1/N) sum_j L(y_j, <a_j, x>) for a design matrix with rows a_j."""

    def __init__(self, loss: LossSpec, design, labels):
        A = np.atleast_2d(np.asarray(design, dtype=float))
        y = np.atleast_1d(np.asarray(labels, dtype=float))
        if A.shape[0] != y.size or y.size == 0:
            raise InputDomainError(f"design has {A.shape[0]} rows but {y.size} labels")
        super().__init__(A.shape[1])
        self.loss = loss
        self.design = A
        self.labels = y
        self.name = f"empirical_{loss.kind}"

    def value(self, x) -> float:
        return float(np.mean(self.loss.value(self.labels, self.design @ self._check(x))))

    def gradient(self, x) -> np.ndarray:
        deriv = np.asarray(self.loss.derivative(self.labels, self.design @ self._check(x)), dtype=float)
        return self.design.T @ deriv / self.labels.size
