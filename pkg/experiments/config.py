"""
Experiment configuration: a flat ``key = value`` text format with dotted section
keys, parsed against one schema table and turned into typed settings.

Each CONFIG_KEYS entry is a dict with:
  - desc    : human-readable description
  - type    : value type (int, float, bool, str, choice, int_list, float_list, points)
  - default : value used when the key is absent (already typed)
  - choices : admissible values for type "choice"
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

from learning import CvSettings
from losses import LOSSES
from utils.errors import ConfigError
from verify import VerifySettings

logger = logging.getLogger(__name__)

MODES = ("train", "cv", "verify", "rates")
DATASET_KINDS = ("regression", "classification", "explicit")
TARGETS = ("sine", "linear", "bump", "kernel_span", "zero")
PROFILES = ("symmetric", "linear", "hard")
KERNEL_KINDS = ("gaussian", "linear", "polynomial")
BOUNDS = ("global", "data_local")

# ---------------------------------------------------------------------------
# Schema
# ---------------------------------------------------------------------------

CONFIG_KEYS: Dict[str, Dict[str, Any]] = {
    # --- Run ---
    "mode": {"desc": "What to run", "type": "choice", "choices": MODES, "default": "train"},
    "seed": {"desc": "Seed for every randomized step", "type": "int", "default": 0},
    "out": {"desc": "Output directory", "type": "str", "default": "out"},
    # --- Dataset ---
    "dataset.kind": {"desc": "Synthetic problem family or explicit points", "type": "choice",
                     "choices": DATASET_KINDS, "default": "regression"},
    "dataset.n": {"desc": "Sample size", "type": "int", "default": 200},
    "dataset.d": {"desc": "Input dimension", "type": "int", "default": 1},
    "dataset.target": {"desc": "Regression target function", "type": "choice", "choices": TARGETS,
                       "default": "sine"},
    "dataset.noise_sigma": {"desc": "Gaussian label noise (truncated at 6 sigma)", "type": "float",
                            "default": 0.1},
    "dataset.profile": {"desc": "Classification margin profile", "type": "choice", "choices": PROFILES,
                        "default": "symmetric"},
    "dataset.scale": {"desc": "Slope s in P(y=1|x) = sigmoid(s f*(x))", "type": "float", "default": 4.0},
    "dataset.test_n": {"desc": "Size of a fresh test sample (0: none)", "type": "int", "default": 0},
    "dataset.xs": {"desc": "Explicit inputs, points separated by ';', coordinates by ','",
                   "type": "points", "default": ()},
    "dataset.ys": {"desc": "Explicit labels, comma separated", "type": "float_list", "default": ()},
    # --- Kernel ---
    "kernel.kind": {"desc": "Kernel family", "type": "choice", "choices": KERNEL_KINDS, "default": "gaussian"},
    "kernel.sigma": {"desc": "Gaussian bandwidth", "type": "float", "default": 1.0},
    "kernel.degree": {"desc": "Polynomial degree", "type": "int", "default": 2},
    "kernel.offset": {"desc": "Polynomial offset c in (<x,x'> + c)^d", "type": "float", "default": 1.0},
    # --- Loss ---
    "loss.kind": {"desc": "Loss function", "type": "choice", "choices": tuple(LOSSES), "default": "least_squares"},
    "loss.delta": {"desc": "Huber threshold", "type": "float", "default": 1.0},
    "loss.tau": {"desc": "Expectile asymmetry", "type": "float", "default": 0.5},
    "loss.clip_level": {"desc": "Clip level M (0: derived from the labels)", "type": "float", "default": 0.0},
    # --- Gradient descent ---
    "gd.eta": {"desc": "Constant step size (or eta_0 of a decaying schedule)", "type": "float", "default": 0.5},
    "gd.step_sizes": {"desc": "Explicit step sizes (overrides gd.eta)", "type": "float_list", "default": ()},
    "gd.steps": {"desc": "Number of GD steps in train mode", "type": "int", "default": 100},
    "gd.decay": {"desc": "Polynomial decay exponent theta of eta_k = eta_0 (k+1)^-theta",
                 "type": "float", "default": 0.0},
    "gd.strict": {"desc": "Reject step sizes above 1/M' (false: warn)", "type": "bool", "default": True},
    "gd.bound": {"desc": "Embedding bound for the step cap", "type": "choice", "choices": BOUNDS,
                 "default": "global"},
    "gd.record_times": {"desc": "Snapshot times (empty: every step)", "type": "int_list", "default": ()},
    # --- RERM ---
    "rerm.lambdas": {"desc": "Lambda grid for the RERM path written in train mode", "type": "float_list",
                     "default": ()},
    # --- Cross-validation ---
    "cv.n1": {"desc": "Training split size (0: n // 2)", "type": "int", "default": 0},
    "cv.n2": {"desc": "Validation split size (0: n - n1)", "type": "int", "default": 0},
    "cv.grid": {"desc": "Stopping times (empty: dyadic grid)", "type": "int_list", "default": ()},
    "cv.match_lambdas": {"desc": "Report the risk-matched lambda of every grid time", "type": "bool",
                         "default": True},
    # --- Verification ---
    "verify.gd_instances": {"desc": "Random GD instances", "type": "int", "default": 100},
    "verify.n_min": {"desc": "Smallest GD sample size", "type": "int", "default": 10},
    "verify.n_max": {"desc": "Largest GD sample size", "type": "int", "default": 500},
    "verify.telescoping_comparators": {"desc": "Random comparators per GD instance", "type": "int",
                                       "default": 50},
    "verify.mirror_steps": {"desc": "Mirror descent steps", "type": "int", "default": 200},
    "verify.p_values": {"desc": "Exponents p of the l^p spaces", "type": "float_list",
                        "default": (1.5, 2.0, 3.0, 4.0)},
    "verify.key_samples": {"desc": "Random comparators per mirror step", "type": "int", "default": 100},
    "verify.duality_cases": {"desc": "Random cases per p for the duality algebra", "type": "int",
                             "default": 10_000},
    "verify.rerm_instances": {"desc": "Random RERM instances", "type": "int", "default": 5},
    "verify.perturbations": {"desc": "Perturbations per RERM instance", "type": "int", "default": 1000},
    "verify.loss_samples": {"desc": "Samples per loss certificate", "type": "int", "default": 10_000},
    "verify.approx_grid_points": {"desc": "Coefficient grid points per axis", "type": "int", "default": 41},
    "verify.cv_seeds": {"desc": "Seeds for the end-to-end CV sanity check (0: skip)", "type": "int",
                        "default": 20},
    # --- Rates ---
    "rates.beta": {"desc": "Approximation exponents beta", "type": "float_list", "default": (1.0,)},
    "rates.gamma": {"desc": "Entropy exponents gamma", "type": "float_list", "default": (0.5,)},
    "rates.theta": {"desc": "Variance exponents theta", "type": "float_list", "default": (1.0,)},
    "rates.q": {"desc": "Growth exponents q", "type": "float_list", "default": (2.0,)},
    "rates.empirical": {"desc": "Also fit the empirical rate of CV-selected predictors", "type": "bool",
                        "default": False},
    "rates.n_values": {"desc": "Sample sizes of the empirical rate fit", "type": "int_list",
                       "default": (64, 128, 256, 512, 1024, 2048, 4096)},
    "rates.seeds": {"desc": "Seeds averaged per sample size", "type": "int", "default": 5},
    "rates.test_n": {"desc": "Test sample size of the empirical rate fit", "type": "int", "default": 4000},
}


# ---------------------------------------------------------------------------
# Typed settings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DatasetConfig:
    kind: str = "regression"
    n: int = 200
    d: int = 1
    target: str = "sine"
    noise_sigma: float = 0.1
    profile: str = "symmetric"
    scale: float = 4.0
    test_n: int = 0
    xs: Tuple[Tuple[float, ...], ...] = ()
    ys: Tuple[float, ...] = ()


@dataclass(frozen=True)
class KernelConfig:
    kind: str = "gaussian"
    sigma: float = 1.0
    degree: int = 2
    offset: float = 1.0

    @property
    def params(self) -> Dict[str, Any]:
        if self.kind == "gaussian":
            return {"sigma": self.sigma}
        if self.kind == "polynomial":
            return {"degree": self.degree, "offset": self.offset}
        return {}


@dataclass(frozen=True)
class LossConfig:
    kind: str = "least_squares"
    delta: float = 1.0
    tau: float = 0.5
    clip_level: float = 0.0

    @property
    def params(self) -> Dict[str, Any]:
        if self.kind == "huber":
            return {"delta": self.delta}
        if self.kind == "expectile":
            return {"tau": self.tau}
        return {}


@dataclass(frozen=True)
class GdSettings:
    eta: float = 0.5
    step_sizes: Tuple[float, ...] = ()
    steps: int = 100
    decay: float = 0.0
    strict: bool = True
    bound: str = "global"
    record_times: Tuple[int, ...] = ()
    rerm_lambdas: Tuple[float, ...] = ()


@dataclass(frozen=True)
class RatesSettings:
    beta: Tuple[float, ...] = (1.0,)
    gamma: Tuple[float, ...] = (0.5,)
    theta: Tuple[float, ...] = (1.0,)
    q: Tuple[float, ...] = (2.0,)
    empirical: bool = False
    n_values: Tuple[int, ...] = (64, 128, 256, 512, 1024, 2048, 4096)
    seeds: int = 5
    test_n: int = 4000


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "train"
    seed: int = 0
    out: str = "out"
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    kernel: KernelConfig = field(default_factory=KernelConfig)
    loss: LossConfig = field(default_factory=LossConfig)
    gd: GdSettings = field(default_factory=GdSettings)
    cv: CvSettings = field(default_factory=CvSettings)
    verify: VerifySettings = field(default_factory=VerifySettings)
    rates: RatesSettings = field(default_factory=RatesSettings)
    values: Mapping[str, Any] = field(default_factory=dict, compare=False, repr=False)

    def with_overrides(self, seed: Optional[int] = None, out: Optional[str] = None) -> "ExperimentConfig":
        values = dict(self.values)
        if seed is not None:
            values["seed"] = seed
        if out is not None:
            values["out"] = out
        return build_config(values)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


def _parse_float(key: str, text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a real number, got '{text}'", key=key) from None
    if not math.isfinite(value):
        raise ConfigError(f"{key}: expected a finite real number, got '{text}'", key=key)
    return value


def _parse_int(key: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got '{text}'", key=key) from None


def _split(text: str, sep: str = ","):
    return [part.strip() for part in text.split(sep) if part.strip()]


def parse_value(key: str, text: str) -> Any:
    """Convert the raw text of one entry to the type its schema entry declares."""
    if key not in CONFIG_KEYS:
        raise ConfigError(f"Unknown config key: '{key}'. Available: {sorted(CONFIG_KEYS)}", key=key)
    spec = CONFIG_KEYS[key]
    kind = spec["type"]
    text = text.strip()
    if kind == "int":
        return _parse_int(key, text)
    if kind == "float":
        return _parse_float(key, text)
    if kind == "bool":
        low = text.lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise ConfigError(f"{key}: expected true or false, got '{text}'", key=key)
    if kind == "str":
        if not text:
            raise ConfigError(f"{key}: expected a non-empty string", key=key)
        return text
    if kind == "choice":
        if text not in spec["choices"]:
            raise ConfigError(f"{key}: '{text}' is not one of {list(spec['choices'])}", key=key)
        return text
    if kind == "int_list":
        return tuple(_parse_int(key, part) for part in _split(text))
    if kind == "float_list":
        return tuple(_parse_float(key, part) for part in _split(text))
    if kind == "points":
        points = tuple(tuple(_parse_float(key, c) for c in _split(p)) for p in _split(text, ";"))
        if len({len(p) for p in points}) > 1:
            raise ConfigError(f"{key}: every point needs the same number of coordinates", key=key)
        return points
    raise ConfigError(f"{key}: schema type '{kind}' is not supported", key=key)


def parse_config_text(text: str) -> Dict[str, Any]:
    """Typed values of every entry in a config text; later duplicates are errors."""
    values: Dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got '{raw.strip()}'", key=line)
        key, value = (part.strip() for part in line.split("=", 1))
        if key in values:
            raise ConfigError(f"line {lineno}: '{key}' is set twice", key=key)
        values[key] = parse_value(key, value)
    return values


def _get(values: Mapping[str, Any], key: str) -> Any:
    return values.get(key, CONFIG_KEYS[key]["default"])


def _section(values: Mapping[str, Any], prefix: str) -> Dict[str, Any]:
    start = prefix + "."
    return {key[len(start):]: _get(values, key) for key in CONFIG_KEYS if key.startswith(start)}


def _require(condition: bool, key: str, message: str):
    if not condition:
        raise ConfigError(f"{key}: {message}", key=key)


def build_config(values: Mapping[str, Any]) -> ExperimentConfig:
    """Typed, validated settings from parsed values (absent keys take their defaults)."""
    for key in values:
        if key not in CONFIG_KEYS:
            raise ConfigError(f"Unknown config key: '{key}'. Available: {sorted(CONFIG_KEYS)}", key=key)
    seed = _get(values, "seed")
    _require(seed >= 0, "seed", f"must be nonnegative, got {seed}")

    dataset = DatasetConfig(**_section(values, "dataset"))
    if dataset.kind == "explicit":
        _require(len(dataset.xs) > 0, "dataset.xs", "explicit datasets need at least one point")
        _require(len(dataset.xs) == len(dataset.ys), "dataset.ys",
                 f"{len(dataset.ys)} labels for {len(dataset.xs)} points")
    else:
        _require(dataset.n >= 2, "dataset.n", f"must be >= 2, got {dataset.n}")
        _require(dataset.d >= 1, "dataset.d", f"must be >= 1, got {dataset.d}")
        _require(dataset.noise_sigma >= 0, "dataset.noise_sigma", f"must be >= 0, got {dataset.noise_sigma}")
    _require(dataset.test_n >= 0, "dataset.test_n", f"must be >= 0, got {dataset.test_n}")

    kernel = KernelConfig(**_section(values, "kernel"))
    _require(kernel.sigma > 0, "kernel.sigma", f"must be positive, got {kernel.sigma}")
    _require(kernel.degree >= 1, "kernel.degree", f"must be >= 1, got {kernel.degree}")
    _require(kernel.offset >= 0, "kernel.offset", f"must be >= 0, got {kernel.offset}")

    loss = LossConfig(**_section(values, "loss"))
    _require(loss.delta > 0, "loss.delta", f"must be positive, got {loss.delta}")
    _require(0 < loss.tau < 1, "loss.tau", f"must lie in (0, 1), got {loss.tau}")
    _require(loss.clip_level >= 0, "loss.clip_level", f"must be >= 0, got {loss.clip_level}")
    if dataset.kind != "explicit":
        binary = LOSSES[loss.kind]["labels"] == "binary"
        _require(binary == (dataset.kind == "classification"), "loss.kind",
                 f"'{loss.kind}' does not fit a {dataset.kind} dataset")

    gd_values = _section(values, "gd")
    gd = GdSettings(rerm_lambdas=_get(values, "rerm.lambdas"), **gd_values)
    _require(gd.eta > 0, "gd.eta", f"must be positive, got {gd.eta}")
    _require(gd.steps >= 0, "gd.steps", f"must be >= 0, got {gd.steps}")
    _require(0 <= gd.decay < 1, "gd.decay", f"must lie in [0, 1), got {gd.decay}")
    _require(all(e > 0 for e in gd.step_sizes), "gd.step_sizes", "every step size must be positive")
    _require(all(lam > 0 for lam in gd.rerm_lambdas), "rerm.lambdas", "every lambda must be positive")

    cv_values = _section(values, "cv")
    cv = CvSettings(
        seed=seed,
        n1=cv_values["n1"] or None,
        n2=cv_values["n2"] or None,
        grid=cv_values["grid"] or "dyadic",
        eta=gd.eta,
        decay=gd.decay,
        strict=gd.strict,
        bound=gd.bound,
        match_lambdas=cv_values["match_lambdas"],
    )
    _require(cv_values["n1"] >= 0 and cv_values["n2"] >= 0, "cv.n1", "split sizes must be >= 0")

    verify_values = _section(values, "verify")
    try:
        verify = VerifySettings(seed=seed, **verify_values)
    except ValueError as e:
        raise ConfigError(str(e), key="verify") from e

    rates = RatesSettings(**_section(values, "rates"))
    for key in ("rates.beta", "rates.gamma", "rates.theta", "rates.q"):
        _require(len(_get(values, key)) > 0, key, "needs at least one value")
    _require(all(0 < b <= 1 for b in rates.beta), "rates.beta", "every beta must lie in (0, 1]")
    _require(all(0 < g < 1 for g in rates.gamma), "rates.gamma", "every gamma must lie in (0, 1)")
    _require(all(0 <= t <= 1 for t in rates.theta), "rates.theta", "every theta must lie in [0, 1]")
    _require(all(q >= 1 for q in rates.q), "rates.q", "every q must be >= 1")
    _require(all(n >= 4 for n in rates.n_values), "rates.n_values", "every sample size must be >= 4")
    _require(rates.seeds >= 1, "rates.seeds", f"must be >= 1, got {rates.seeds}")

    return ExperimentConfig(
        mode=_get(values, "mode"),
        seed=seed,
        out=_get(values, "out"),
        dataset=dataset,
        kernel=kernel,
        loss=loss,
        gd=gd,
        cv=cv,
        verify=verify,
        rates=rates,
        values=dict(values),
    )


def load_config(source: Union[str, Path, None] = None, overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
    """
    Read a config file (None: all defaults) and apply already-typed overrides,
    e.g. from command-line options.
    """
    values: Dict[str, Any] = {}
    if source is not None:
        path = Path(source)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read config file '{path}': {e.strerror}", key=str(path)) from e
        values = parse_config_text(text)
        logger.info("[CONFIG] %d key(s) read from %s", len(values), path)
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    return build_config(values)


def describe_keys() -> Dict[str, Dict[str, Any]]:
    """Schema rows for documentation and the CLI: key -> (desc, type, default)."""
    return {key: {"desc": spec["desc"], "type": spec["type"], "default": spec["default"]}
            for key, spec in CONFIG_KEYS.items()}

