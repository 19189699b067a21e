import logging
from abc import ABC, abstractmethod
from typing import Sequence, Union

import numpy as np

from utils.errors import InputDomainError, ParameterError

logger = logging.getLogger(__name__)

PointLike = Union[float, Sequence[float], np.ndarray]
PointsLike = Union[Sequence[Sequence[float]], Sequence[float], np.ndarray]


def as_point(x: PointLike) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise InputDomainError(f"a point must be a flat vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputDomainError(f"point coordinates must be finite, got {x!r}")
    return arr


def as_points(xs: PointsLike) -> np.ndarray:
    """
    Row-major (n, d) matrix of points. A flat sequence is read as n points in
    dimension 1.
    """
    arr = np.asarray(xs, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise InputDomainError(f"points must form an (n, d) matrix, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise InputDomainError("point list is empty")
    if not np.all(np.isfinite(arr)):
        raise InputDomainError("point coordinates must be finite")
    return arr


class BaseKernel(ABC):
    """Base class for positive semidefinite kernels on R^d."""

    kind: str = "base"

    @abstractmethod
    def pairwise(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Matrix [k(x_i, y_j)] for (n, d) and (m, d) inputs."""

    @abstractmethod
    def diagonal(self, xs: np.ndarray) -> np.ndarray:
        """Vector [k(x_i, x_i)]."""

    @abstractmethod
    def sup_embedding(self, domain_bound: float) -> float:
        """sup of sqrt(k(x, x)) over the ball of radius domain_bound."""

    def describe(self) -> str:
        return self.kind

    def __call__(self, x: PointLike, x_prime: PointLike) -> float:
        return eval_kernel(self, x, x_prime)

    def cross(self, xs: PointsLike, ys: PointsLike) -> np.ndarray:
        xs, ys = as_points(xs), as_points(ys)
        if xs.shape[1] != ys.shape[1]:
            raise InputDomainError(
                f"dimension mismatch: {xs.shape[1]} vs {ys.shape[1]}"
            )
        return self.pairwise(xs, ys)


def eval_kernel(kernel: BaseKernel, x: PointLike, x_prime: PointLike) -> float:
    x, x_prime = as_point(x), as_point(x_prime)
    if x.shape != x_prime.shape:
        raise InputDomainError(
            f"dimension mismatch: x has {x.shape[0]} coordinates, x' has {x_prime.shape[0]}"
        )
    return float(kernel.pairwise(x[None, :], x_prime[None, :])[0, 0])


def gram_matrix(kernel: BaseKernel, xs: PointsLike) -> np.ndarray:
    xs = as_points(xs)
    K = kernel.pairwise(xs, xs)
    # symmetric up to the last bit, diagonal exactly k(x_i, x_i)
    K = 0.5 * (K + K.T)
    np.fill_diagonal(K, kernel.diagonal(xs))
    return K


def sup_embedding_bound(kernel: BaseKernel, domain_bound: float) -> float:
    """kappa >= ||H -> L_inf|| over the ball ||x|| <= domain_bound."""
    if not (np.isfinite(domain_bound) and domain_bound >= 0):
        raise ParameterError(f"domain_bound must be a nonnegative real, got {domain_bound!r}")
    return float(kernel.sup_embedding(float(domain_bound)))


def data_local_bound(kernel: BaseKernel, xs: PointsLike) -> float:
    """sqrt(max_i k(x_i, x_i)); the embedding constant restricted to the data."""
    xs = as_points(xs)
    return float(np.sqrt(np.max(kernel.diagonal(xs))))
