from typing import Any, Dict

from utils.errors import ParameterError

from .base import BaseKernel
from .dot_product import LinearKernel, PolynomialKernel
from .stationary import GaussianKernel

KERNELS: Dict[str, Dict[str, Any]] = {
    "gaussian":   {"cls": GaussianKernel,   "params": ("sigma",)},
    "linear":     {"cls": LinearKernel,     "params": ()},
    "polynomial": {"cls": PolynomialKernel, "params": ("degree", "offset")},
}


def make_kernel(kind: str, **params) -> BaseKernel:
    """Build a kernel by name, e.g. make_kernel("gaussian", sigma=0.5)."""
    if kind not in KERNELS:
        raise ParameterError(f"Unknown kernel: '{kind}'. Available: {list(KERNELS)}")
    entry = KERNELS[kind]
    unknown = set(params) - set(entry["params"])
    if unknown:
        raise ParameterError(
            f"Unknown parameter(s) {sorted(unknown)} for kernel '{kind}'. Accepted: {list(entry['params'])}"
        )
    return entry["cls"](**params)
