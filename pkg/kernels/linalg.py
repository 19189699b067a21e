"""
Gram-matrix linear algebra: PSD test and Cholesky with escalating jitter.
"""

import logging
from typing import Tuple

import numpy as np
from scipy import linalg

from utils.errors import InputDomainError, NumericError

logger = logging.getLogger(__name__)

PSD_TOLERANCE = 1e-8
JITTER_START = 1e-10
JITTER_MAX_TRIES = 8


def _square(K) -> np.ndarray:
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1] or K.shape[0] == 0:
        raise InputDomainError(f"expected a nonempty square matrix, got shape {K.shape}")
    if not np.all(np.isfinite(K)):
        raise NumericError("matrix has non-finite entries")
    return K


def min_eigenvalue(K) -> float:
    K = _square(K)
    return float(linalg.eigvalsh(0.5 * (K + K.T), subset_by_index=[0, 0])[0])


def is_psd(K, tolerance: float = PSD_TOLERANCE) -> bool:
    """Smallest eigenvalue >= -tolerance * trace."""
    K = _square(K)
    scale = max(float(np.trace(K)), 0.0)
    return min_eigenvalue(K) >= -tolerance * scale


def jitter_cholesky(K, start: float = JITTER_START,
                    max_tries: int = JITTER_MAX_TRIES) -> Tuple[np.ndarray, float]:
    """
    Lower Cholesky factor of K, adding diagonal jitter start*trace, then ten
    times more per retry, when the plain factorization fails.

    Returns (L, jitter) with L @ L.T == K + jitter * I.
    """
    K = _square(K)
    K = 0.5 * (K + K.T)
    try:
        return linalg.cholesky(K, lower=True), 0.0
    except linalg.LinAlgError:
        pass

    n = K.shape[0]
    trace = float(np.trace(K))
    jitter = start * (trace if trace > 0 else 1.0)
    for _ in range(max_tries):
        try:
            L = linalg.cholesky(K + jitter * np.eye(n), lower=True)
            logger.warning("[LINALG] Added jitter %.3e to a %dx%d Gram matrix", jitter, n, n)
            return L, jitter
        except linalg.LinAlgError:
            jitter *= 10.0
    raise NumericError(f"matrix is not positive definite even with jitter {jitter / 10.0:.3e}")


def cholesky_solve(K, b, start: float = JITTER_START) -> np.ndarray:
    """Solve K x = b for symmetric positive (semi)definite K."""
    L, _ = jitter_cholesky(K, start=start)
    return linalg.cho_solve((L, True), np.asarray(b, dtype=float))
