"""
Loss catalogue: convex, differentiable losses L(y, t) and the constants the
theory consumes.

Each entry is a dict with:
  - desc        : human-readable description
  - params      : default values of the loss parameters
  - value       : callable(y, t, params) -> L(y, t)            (numpy broadcasting)
  - derivative  : callable(y, t, params) -> dL/dt
  - curvature   : callable(y, t, params) -> d2L/dt2 (a.e.; used by the Newton RERM solver)
  - smoothness  : callable(params) -> M, Lipschitz constant of dL/dt
  - growth      : callable(params, clip_level) -> (B, q) with L(y,t) <= B(1+|t|^q) for |y| <= clip_level
  - lipschitz   : callable(params, clip_level) -> sup |dL/dt| over |y|, |t| <= clip_level
  - clippable   : whether clipping predictions at the label bound never increases the loss
  - labels      : "real" or "binary" (labels in {-1, +1})
"""

import math
from typing import Any, Dict

import numpy as np
from scipy.special import expit

# ---------------------------------------------------------------------------
# Helper functions
# ---------------------------------------------------------------------------

def _ls_value(y, t, p):          return (y - t) ** 2
def _ls_derivative(y, t, p):     return 2.0 * (t - y)
def _ls_curvature(y, t, p):      return np.full(np.broadcast(y, t).shape, 2.0)


def _logistic_value(y, t, p):
    return np.logaddexp(0.0, -y * t)


def _logistic_derivative(y, t, p):
    return -y * expit(-y * t)


def _logistic_curvature(y, t, p):
    s = expit(y * t)
    return s * (1.0 - s)


def _huber_value(y, t, p):
    delta = p["delta"]
    r = t - y
    a = np.abs(r)
    return np.where(a <= delta, 0.5 * r ** 2, delta * (a - 0.5 * delta))


def _huber_derivative(y, t, p):
    delta = p["delta"]
    return np.clip(t - y, -delta, delta)


def _huber_curvature(y, t, p):
    return np.where(np.abs(t - y) <= p["delta"], 1.0, 0.0)


def _logreg_value(y, t, p):
    # 2 ln cosh(r/2), written with logaddexp so large residuals do not overflow
    r = t - y
    return 2.0 * (np.logaddexp(0.5 * r, -0.5 * r) - math.log(2.0))


def _logreg_derivative(y, t, p):
    return np.tanh(0.5 * (t - y))


def _logreg_curvature(y, t, p):
    return 0.5 * (1.0 - np.tanh(0.5 * (t - y)) ** 2)


def _expectile_weight(y, t, p):
    tau = p["tau"]
    return np.where(y < t, 1.0 - tau, tau)


def _expectile_value(y, t, p):
    return _expectile_weight(y, t, p) * (y - t) ** 2


def _expectile_derivative(y, t, p):
    return 2.0 * _expectile_weight(y, t, p) * (t - y)


def _expectile_curvature(y, t, p):
    return 2.0 * _expectile_weight(y, t, p)


def _expectile_scale(p):
    return max(p["tau"], 1.0 - p["tau"])


# ---------------------------------------------------------------------------
# Loss table
# ---------------------------------------------------------------------------

LOSSES: Dict[str, Dict[str, Any]] = {
    "least_squares": {
        "desc": "Least squares (y - t)^2",
        "params": {},
        "value": _ls_value,
        "derivative": _ls_derivative,
        "curvature": _ls_curvature,
        "smoothness": lambda p: 2.0,
        "growth": lambda p, m: (2.0 * max(1.0, m * m), 2.0),
        "lipschitz": lambda p, m: 4.0 * m,
        "clippable": True,
        "labels": "real",
    },
    "logistic_classification": {
        "desc": "Logistic loss for classification ln(1 + exp(-y t))",
        "params": {},
        "value": _logistic_value,
        "derivative": _logistic_derivative,
        "curvature": _logistic_curvature,
        "smoothness": lambda p: 0.25,
        "growth": lambda p, m: (1.0, 1.0),
        "lipschitz": lambda p, m: float(expit(m)),
        "clippable": False,
        "labels": "binary",
    },
    "huber": {
        "desc": "Huber loss, quadratic for |t - y| <= delta, linear beyond",
        "params": {"delta": 1.0},
        "value": _huber_value,
        "derivative": _huber_derivative,
        "curvature": _huber_curvature,
        "smoothness": lambda p: 1.0,
        "growth": lambda p, m: (2.0 * p["delta"] * max(1.0, m), 1.0),
        "lipschitz": lambda p, m: min(p["delta"], 2.0 * m),
        "clippable": True,
        "labels": "real",
    },
    "logistic_regression": {
        "desc": "Logistic loss for regression 2 ln cosh((t - y)/2)",
        "params": {},
        "value": _logreg_value,
        "derivative": _logreg_derivative,
        "curvature": _logreg_curvature,
        "smoothness": lambda p: 0.5,
        "growth": lambda p, m: (max(1.0, m), 1.0),
        "lipschitz": lambda p, m: math.tanh(m),
        "clippable": True,
        "labels": "real",
    },
    "expectile": {
        "desc": "Asymmetric least squares |tau - 1[y < t]| (y - t)^2",
        "params": {"tau": 0.5},
        "value": _expectile_value,
        "derivative": _expectile_derivative,
        "curvature": _expectile_curvature,
        "smoothness": lambda p: 2.0 * _expectile_scale(p),
        "growth": lambda p, m: (2.0 * _expectile_scale(p) * max(1.0, m * m), 2.0),
        "lipschitz": lambda p, m: 4.0 * _expectile_scale(p) * m,
        "clippable": True,
        "labels": "real",
    },
}

