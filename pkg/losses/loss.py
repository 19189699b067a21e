"""
LossSpec and the loss operations used by gradient descent, RERM and the checks.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Sequence, Tuple, Union

import numpy as np

from utils.errors import InputDomainError, ParameterError

from .catalogue import LOSSES

ArrayLike = Union[float, Sequence[float], np.ndarray]


def _finite(name: str, value: ArrayLike) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InputDomainError(f"{name} must be finite, got {value!r}")
    return arr


def _scalar_or_array(arr: np.ndarray):
    return float(arr) if arr.ndim == 0 else arr


@dataclass(frozen=True)
class LossSpec:
    """
    A catalogue loss with its parameters and the clip level M_clip.

    kind        : key into LOSSES
    clip_level  : M_clip, the prediction scale at which clipping happens
    delta       : huber threshold (ignored by other losses)
    tau         : expectile asymmetry (ignored by other losses)
    """

    kind: str
    clip_level: float = 1.0
    delta: float = 1.0
    tau: float = 0.5
    _params: Dict[str, Any] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in LOSSES:
            raise ParameterError(f"Unknown loss: '{self.kind}'. Available: {list(LOSSES)}")
        if not (math.isfinite(self.clip_level) and self.clip_level > 0):
            raise ParameterError(f"clip_level must be a positive real, got {self.clip_level!r}")
        if self.kind == "huber" and not (math.isfinite(self.delta) and self.delta > 0):
            raise ParameterError(f"huber delta must be positive, got {self.delta!r}")
        if self.kind == "expectile" and not 0.0 < self.tau < 1.0:
            raise ParameterError(f"expectile tau must lie in (0, 1), got {self.tau!r}")
        params = dict(LOSSES[self.kind]["params"])
        if "delta" in params:
            params["delta"] = float(self.delta)
        if "tau" in params:
            params["tau"] = float(self.tau)
        object.__setattr__(self, "_params", params)

    # ------------------------------------------------------------------
    # Construction helpers
    # ------------------------------------------------------------------

    @classmethod
    def for_labels(cls, kind: str, ys: ArrayLike, **params) -> "LossSpec":
        """
        Build a loss whose clip level follows the labels: max|y_i| for regression
        losses, 1 for classification with labels in {-1, +1}.
        """
        if kind not in LOSSES:
            raise ParameterError(f"Unknown loss: '{kind}'. Available: {list(LOSSES)}")
        if LOSSES[kind]["labels"] == "binary":
            clip = 1.0
        else:
            ys = _finite("labels", ys)
            clip = float(np.max(np.abs(ys))) if ys.size else 1.0
            if clip <= 0.0:
                clip = 1.0
        return cls(kind=kind, clip_level=clip, **params)

    @property
    def info(self) -> Dict[str, Any]:
        return LOSSES[self.kind]

    @property
    def params(self) -> Dict[str, Any]:
        return dict(self._params)

    @property
    def is_clippable(self) -> bool:
        return bool(self.info["clippable"])

    # ------------------------------------------------------------------
    # Pointwise evaluation
    # ------------------------------------------------------------------

    def value(self, y: ArrayLike, t: ArrayLike):
        y = _finite("y", y)
        t = _finite("t", t)
        return _scalar_or_array(np.asarray(self.info["value"](y, t, self._params), dtype=float))

    def derivative(self, y: ArrayLike, t: ArrayLike):
        y = _finite("y", y)
        t = _finite("t", t)
        return _scalar_or_array(np.asarray(self.info["derivative"](y, t, self._params), dtype=float))

    def curvature(self, y: ArrayLike, t: ArrayLike):
        """d2L/dt2, taking the one-sided value at huber kinks."""
        y = _finite("y", y)
        t = _finite("t", t)
        return _scalar_or_array(np.asarray(self.info["curvature"](y, t, self._params), dtype=float))

    # ------------------------------------------------------------------
    # Constants
    # ------------------------------------------------------------------

    def smoothness_constant(self) -> float:
        return float(self.info["smoothness"](self._params))

    def growth_params(self) -> Tuple[float, float]:
        b, q = self.info["growth"](self._params, self.clip_level)
        return float(b), float(q)

    def local_lipschitz(self, m: float = None) -> float:
        """|L|_{M,1}: sup of |dL/dt| over |y|, |t| <= M (defaults to the clip level)."""
        m = self.clip_level if m is None else m
        if not m > 0:
            raise ParameterError(f"M must be positive, got {m!r}")
        return float(self.info["lipschitz"](self._params, m))


# ---------------------------------------------------------------------------
# Module-level operations
# ---------------------------------------------------------------------------

def loss_value(loss: LossSpec, y: ArrayLike, t: ArrayLike):
    """L(y, t) >= 0."""
    return loss.value(y, t)


def loss_derivative(loss: LossSpec, y: ArrayLike, t: ArrayLike):
    """dL/dt at (y, t)."""
    return loss.derivative(y, t)


def clip_value(t: ArrayLike, m: float):
    """Clip t to [-M, M]."""
    if not (isinstance(m, (int, float, np.floating)) and m > 0):
        raise ParameterError(f"clip level M must be positive, got {m!r}")
    t = _finite("t", t)
    return _scalar_or_array(np.clip(t, -float(m), float(m)))


def smoothness_constant(loss: LossSpec) -> float:
    return loss.smoothness_constant()


def growth_params(loss: LossSpec) -> Tuple[float, float]:
    return loss.growth_params()


def local_lipschitz(loss: LossSpec, m: float = None) -> float:
    return loss.local_lipschitz(m)


def is_clippable(loss: LossSpec) -> bool:
    return loss.is_clippable
