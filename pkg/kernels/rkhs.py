"""
Functions in representer form f = sum_i alpha_i k(x_i, .).
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from utils.errors import ContractError, InputDomainError

from .base import BaseKernel, PointLike, PointsLike, as_point, as_points, gram_matrix


@dataclass(frozen=True, eq=False)
class RkhsFunction:
    """
    support : (n, d) points x_1..x_n
    coeffs  : alpha, length n
    kernel  : the kernel whose sections span f
    gram    : optional precomputed Gram matrix on the support (shared, read-only)
    """

    support: np.ndarray
    coeffs: np.ndarray
    kernel: BaseKernel
    gram: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        support = as_points(self.support)
        coeffs = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        if coeffs.ndim != 1 or coeffs.shape[0] != support.shape[0]:
            raise InputDomainError(
                f"coefficient vector has length {coeffs.size}, support has {support.shape[0]} points"
            )
        if not np.all(np.isfinite(coeffs)):
            raise InputDomainError("coefficients must be finite")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "coeffs", coeffs)
        if self.gram is not None:
            gram = np.asarray(self.gram, dtype=float)
            if gram.shape != (support.shape[0], support.shape[0]):
                raise InputDomainError(
                    f"gram matrix has shape {gram.shape}, expected {(support.shape[0],) * 2}"
                )
            object.__setattr__(self, "gram", gram)

    @classmethod
    def zero(cls, kernel: BaseKernel, support: PointsLike, gram=None) -> "RkhsFunction":
        support = as_points(support)
        return cls(support, np.zeros(support.shape[0]), kernel, gram)

    @classmethod
    def section(cls, kernel: BaseKernel, x0: PointLike) -> "RkhsFunction":
        """k(x0, .)"""
        return cls(as_point(x0)[None, :], np.ones(1), kernel)

    @property
    def dimension(self) -> int:
        return int(self.support.shape[1])

    def gram_matrix(self) -> np.ndarray:
        if self.gram is None:
            object.__setattr__(self, "gram", gram_matrix(self.kernel, self.support))
        return self.gram

    def with_coeffs(self, coeffs) -> "RkhsFunction":
        return RkhsFunction(self.support, coeffs, self.kernel, self.gram)

    def squared_norm(self) -> float:
        value = float(self.coeffs @ self.gram_matrix() @ self.coeffs)
        return max(value, 0.0)

    def norm(self) -> float:
        return float(np.sqrt(self.squared_norm()))

    def inner(self, other: "RkhsFunction") -> float:
        if other.kernel != self.kernel:
            raise ContractError("inner product of functions built on different kernels")
        return float(self.coeffs @ self.kernel.cross(self.support, other.support) @ other.coeffs)

    def evaluate_many(self, xs: PointsLike) -> np.ndarray:
        xs = as_points(xs)
        if xs.shape[1] != self.dimension:
            raise InputDomainError(
                f"dimension mismatch: function lives on R^{self.dimension}, points on R^{xs.shape[1]}"
            )
        return self.kernel.pairwise(xs, self.support) @ self.coeffs

    def __call__(self, x: PointLike) -> float:
        x = as_point(x)
        if x.shape[0] != self.dimension:
            raise InputDomainError(
                f"dimension mismatch: function lives on R^{self.dimension}, x has {x.shape[0]} coordinates"
            )
        return float(self.evaluate_many(x[None, :])[0])

    # ------------------------------------------------------------------
    # Arithmetic on a shared support
    # ------------------------------------------------------------------

    def _check_compatible(self, other: "RkhsFunction"):
        if self.kernel != other.kernel:
            raise ContractError("functions are built on different kernels")
        if self.support.shape != other.support.shape or not np.array_equal(self.support, other.support):
            raise ContractError("functions have different supports")

    def __add__(self, other: "RkhsFunction") -> "RkhsFunction":
        self._check_compatible(other)
        return self.with_coeffs(self.coeffs + other.coeffs)

    def __sub__(self, other: "RkhsFunction") -> "RkhsFunction":
        self._check_compatible(other)
        return self.with_coeffs(self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "RkhsFunction":
        return self.with_coeffs(float(scalar) * self.coeffs)

    __rmul__ = __mul__

    def __neg__(self) -> "RkhsFunction":
        return self.with_coeffs(-self.coeffs)


def rkhs_norm(f: RkhsFunction) -> float:
    """sqrt(alpha^T K alpha)."""
    return f.norm()


def rkhs_eval(f: RkhsFunction, x: PointLike) -> float:
    """sum_i alpha_i k(x_i, x)."""
    return f(x)
