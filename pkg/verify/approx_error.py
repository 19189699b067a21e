"""
Brute-force approximation error function on a one-dimensional least-squares problem.

The target f* = sum_j a_j k(c_j, .) is a gaussian kernel expansion over at most
three centres, X is uniform on [-1, 1] and Y = f*(X) + noise, so the excess
population risk of f = sum_j alpha_j k(c_j, .) is (alpha - a)^T G (alpha - a) with
G_jl = E[k(c_j, X) k(c_l, X)], computed by Gauss-Legendre quadrature. On a
coefficient grid that contains a,

    A_p(lambda) ~ min_grid lambda ||f||^p + (alpha - a)^T G (alpha - a),

and A_p(0) = 0 exactly.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from kernels import GaussianKernel, gram_matrix
from utils.errors import InputDomainError, ParameterError

from .result import CheckRecorder, CheckResult

logger = logging.getLogger(__name__)

GRID_POINTS = 41
QUADRATURE_NODES = 64
TRAFO_TOL = 1e-12


@dataclass(frozen=True)
class ApproxErrorProblem:
    centers: Tuple[float, ...] = (-0.5, 0.5)
    coeffs: Tuple[float, ...] = (1.0, -0.5)
    sigma: float = 0.5

    def __post_init__(self):
        if not 1 <= len(self.centers) <= 3 or len(self.centers) != len(self.coeffs):
            raise ParameterError("the target needs between one and three centres, each with a coefficient")

    @property
    def kernel(self) -> GaussianKernel:
        return GaussianKernel(self.sigma)

    def gram(self) -> np.ndarray:
        return gram_matrix(self.kernel, np.asarray(self.centers)[:, None])

    def excess_matrix(self) -> np.ndarray:
        """G_jl = E[k(c_j, X) k(c_l, X)] for X uniform on [-1, 1]."""
        nodes, weights = leggauss(QUADRATURE_NODES)
        sections = self.kernel.cross(nodes[:, None], np.asarray(self.centers)[:, None])
        return 0.5 * (sections * weights[:, None]).T @ sections

    def target_norm(self) -> float:
        a = np.asarray(self.coeffs)
        return float(np.sqrt(max(a @ self.gram() @ a, 0.0)))


class ApproxErrorOracle:
    """Precomputed norms and excess risks over the coefficient grid."""

    def __init__(self, problem: ApproxErrorProblem, grid_points: int = GRID_POINTS):
        if grid_points < 2:
            raise InputDomainError("the coefficient grid needs at least two points per axis")
        self.problem = problem
        a = np.asarray(problem.coeffs, dtype=float)
        bound = 3.0 * max(problem.target_norm(), 1e-12)
        axis = np.linspace(-bound, bound, grid_points)
        self.spacing = float(axis[1] - axis[0])
        axes = [np.union1d(axis, [a_j]) for a_j in a]
        grid = np.array(list(itertools.product(*axes)), dtype=float)

        K = problem.gram()
        G = problem.excess_matrix()
        diff = grid - a
        self.norms = np.sqrt(np.maximum(np.einsum("ij,jk,ik->i", grid, K, grid), 0.0))
        self.excess = np.maximum(np.einsum("ij,jk,ik->i", diff, G, diff), 0.0)
        self.size = grid.shape[0]
        logger.debug("[VERIFY] approximation-error grid with %d points, spacing %.4g", self.size, self.spacing)

    def estimate(self, p: float, lam: float) -> float:
        if lam < 0:
            raise ParameterError(f"lambda must be nonnegative, got {lam!r}")
        if lam == 0:
            return float(np.min(self.excess))
        return float(np.min(lam * self.norms ** p + self.excess))


def brute_force_approx_error(problem: ApproxErrorProblem, p: float, lambdas: Iterable[float],
                             grid_points: int = GRID_POINTS) -> np.ndarray:
    """A_p(lambda) estimates for each lambda; non-decreasing in lambda, 0 at lambda = 0."""
    lambdas = [float(lam) for lam in lambdas]
    if not lambdas:
        raise InputDomainError("lambda list is empty")
    oracle = ApproxErrorOracle(problem, grid_points)
    return np.array([oracle.estimate(p, lam) for lam in lambdas])


def check_reg_trafo(oracle: ApproxErrorOracle, p: float, r: float, lambdas: Sequence[float],
                    gammas: Sequence[float], tol: float = TRAFO_TOL) -> CheckResult:
    """
    A_p(lambda^(p/r) gamma^(1-p/r)) <= 2 gamma whenever gamma > A_r(lambda).
    Pairs failing the precondition are skipped.
    """
    rec = CheckRecorder(f"reg_trafo[p={p:g},r={r:g}]", tol)
    for lam in lambdas:
        a_r = oracle.estimate(r, lam)
        for gamma in gammas:
            inst = f"lambda={lam:.3g}:gamma={gamma:.3g}"
            if not gamma > a_r:
                rec.skip(inst, f"gamma <= A_r(lambda) = {a_r:.6g}")
                continue
            mu = lam ** (p / r) * gamma ** (1.0 - p / r)
            rec.record(inst, oracle.estimate(p, mu), 2.0 * gamma, 1.0 + 2.0 * gamma)
    rec.note("grid_spacing", oracle.spacing)
    return rec.result()


def check_reg_trafo_power(oracle: ApproxErrorOracle, p: float, r: float, lambdas: Sequence[float],
                          beta: float = 1.0, tol: float = TRAFO_TOL) -> CheckResult:
    """
    With A_r(lambda) <= c lambda^beta (c = ||f*||^r for beta = 1), the power form
    A_p(lambda) <= 2 c^(p / (p + beta (r - p))) lambda^(beta r / (p + beta (r - p))).
    """
    c = oracle.problem.target_norm() ** r
    denom = p + beta * (r - p)
    rec = CheckRecorder(f"reg_trafo_power[p={p:g},r={r:g}]", tol)
    for lam in lambdas:
        inst = f"lambda={lam:.3g}"
        pre = oracle.estimate(r, lam)
        if pre > c * lam ** beta * (1.0 + tol):
            rec.skip(inst, f"A_r(lambda) = {pre:.6g} exceeds c lambda^beta")
            continue
        bound = 2.0 * c ** (p / denom) * lam ** (beta * r / denom)
        rec.record(inst, oracle.estimate(p, lam), bound, 1.0 + bound)
    rec.note("exponent", beta * r / denom)
    return rec.result()
