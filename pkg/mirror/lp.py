"""
Weighted finite-dimensional l^p: the mirror map psi(f) = (1/p) sum_i w_i |f_i|^p,
its duality map J = grad psi (w.r.t. the pairing <g, h>_w = sum_i w_i g_i h_i),
the inverse J^-1 and the Bregman divergence of psi.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from utils.errors import ContractError, InputDomainError, ParameterError

P_MIN = 1.2
WEIGHT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class LpSpace:
    p: float
    weights: np.ndarray

    def __post_init__(self):
        if not (math.isfinite(self.p) and self.p >= P_MIN):
            raise ParameterError(f"p must lie in [{P_MIN}, inf), got {self.p!r}")
        w = np.atleast_1d(np.array(self.weights, dtype=float))
        if w.ndim != 1 or w.size == 0:
            raise InputDomainError(f"weights must be a nonempty vector, got shape {w.shape}")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ParameterError("weights must be positive and finite")
        if abs(float(np.sum(w)) - 1.0) > WEIGHT_TOL * w.size:
            raise ParameterError(f"weights must sum to 1, got {float(np.sum(w))!r}")
        w.setflags(write=False)
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, p: float, dim: int) -> "LpSpace":
        return cls(p, np.full(int(dim), 1.0 / int(dim)))

    @property
    def q(self) -> float:
        """Conjugate exponent, 1/p + 1/q = 1."""
        return self.p / (self.p - 1.0)

    @property
    def dim(self) -> int:
        return int(self.weights.shape[0])

    def __eq__(self, other) -> bool:
        return (isinstance(other, LpSpace) and self.p == other.p
                and np.array_equal(self.weights, other.weights))

    def __hash__(self):
        return hash((self.p, self.weights.tobytes()))

    def point(self, values: Sequence[float]) -> "LpPoint":
        return LpPoint(values, self)

    def pairing(self, g, h) -> float:
        """<g, h>_w"""
        return float(np.sum(self.weights * np.asarray(g, dtype=float) * np.asarray(h, dtype=float)))


@dataclass(frozen=True, eq=False)
class LpPoint:
    values: np.ndarray
    space: LpSpace

    def __post_init__(self):
        v = np.atleast_1d(np.array(self.values, dtype=float))
        if v.shape != (self.space.dim,):
            raise InputDomainError(f"point has shape {v.shape}, space has dimension {self.space.dim}")
        if not np.all(np.isfinite(v)):
            raise InputDomainError("point entries must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def _same_space(*points: LpPoint):
    first = points[0].space
    for pt in points[1:]:
        if pt.space != first:
            raise ContractError("points live in different l^p spaces")


def _signed_power(x: np.ndarray, exponent: float) -> np.ndarray:
    # sign(x) |x|^exponent, with 0 -> 0 for every positive exponent
    return np.sign(x) * np.abs(x) ** exponent


def mirror_map_value(f: LpPoint) -> float:
    """psi(f) = (1/p) sum_i w_i |f_i|^p"""
    p = f.space.p
    return float(np.sum(f.space.weights * np.abs(f.values) ** p) / p)


def duality_map(f: LpPoint) -> np.ndarray:
    """J(f) = |f|^(p-2) f entrywise."""
    if f.space.p == 2.0:
        return f.values.copy()
    return _signed_power(f.values, f.space.p - 1.0)


def duality_map_inverse(g, space: LpSpace) -> LpPoint:
    """J^-1(g) = |g|^(q-2) g entrywise, q = p/(p-1)."""
    g = np.asarray(g, dtype=float)
    if space.p == 2.0:
        return LpPoint(g, space)
    return LpPoint(_signed_power(g, space.q - 1.0), space)


def bregman_divergence(u: LpPoint, f: LpPoint) -> float:
    """D(u, f) = psi(u) - psi(f) - <J(f), u - f>_w"""
    _same_space(u, f)
    space = u.space
    if space.p == 2.0:
        return 0.5 * space.pairing(u.values - f.values, u.values - f.values)
    return mirror_map_value(u) - mirror_map_value(f) - space.pairing(duality_map(f), u.values - f.values)


def three_point_identity_check(x: LpPoint, y: LpPoint, z: LpPoint) -> float:
    """|<J(x) - J(y), z - x>_w - (D(z, y) - D(z, x) - D(x, y))|"""
    _same_space(x, y, z)
    lhs = x.space.pairing(duality_map(x) - duality_map(y), z.values - x.values)
    rhs = bregman_divergence(z, y) - bregman_divergence(z, x) - bregman_divergence(x, y)
    return abs(lhs - rhs)


def identity_scale(*points: LpPoint) -> float:
    """Magnitude the three-point residual is measured against: 1 + sum of psi-values."""
    return 1.0 + sum(mirror_map_value(pt) for pt in points)
