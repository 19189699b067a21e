from .config import (
    CONFIG_KEYS,
    DatasetConfig,
    ExperimentConfig,
    GdSettings,
    KernelConfig,
    LossConfig,
    RatesSettings,
    build_config,
    describe_keys,
    load_config,
    parse_config_text,
    parse_value,
)
from .synthetic import (
    CLASSIFICATION_PROFILES,
    REGRESSION_TARGETS,
    SyntheticProblem,
    generate_classification,
    generate_regression,
    truncated_noise_variance,
)

__all__ = [
    "CLASSIFICATION_PROFILES",
    "CONFIG_KEYS",
    "DatasetConfig",
    "ExperimentConfig",
    "GdSettings",
    "KernelConfig",
    "LossConfig",
    "REGRESSION_TARGETS",
    "RatesSettings",
    "SyntheticProblem",
    "build_config",
    "describe_keys",
    "generate_classification",
    "generate_regression",
    "load_config",
    "parse_config_text",
    "parse_value",
    "truncated_noise_variance",
]
