from .base import (
    BaseKernel,
    as_point,
    as_points,
    data_local_bound,
    eval_kernel,
    gram_matrix,
    sup_embedding_bound,
)
from .dot_product import LinearKernel, PolynomialKernel
from .factory import KERNELS, make_kernel
from .linalg import cholesky_solve, is_psd, jitter_cholesky, min_eigenvalue
from .rkhs import RkhsFunction, rkhs_eval, rkhs_norm
from .stationary import GaussianKernel

KernelSpec = BaseKernel

__all__ = [
    "BaseKernel",
    "GaussianKernel",
    "KERNELS",
    "KernelSpec",
    "LinearKernel",
    "PolynomialKernel",
    "RkhsFunction",
    "as_point",
    "as_points",
    "cholesky_solve",
    "data_local_bound",
    "eval_kernel",
    "gram_matrix",
    "is_psd",
    "jitter_cholesky",
    "make_kernel",
    "min_eigenvalue",
    "rkhs_eval",
    "rkhs_norm",
    "sup_embedding_bound",
]
