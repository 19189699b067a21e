from .errors import (
    ConfigError,
    ContractError,
    ConvergenceError,
    GridError,
    InputDomainError,
    NumericError,
    ParameterError,
    RangeError,
    SelfRegError,
    StepSizeError,
)
from .export import export_csv, export_json
from .workers import parallel_map

__all__ = [
    "ConfigError",
    "ContractError",
    "ConvergenceError",
    "GridError",
    "InputDomainError",
    "NumericError",
    "ParameterError",
    "RangeError",
    "SelfRegError",
    "StepSizeError",
    "export_csv",
    "export_json",
    "parallel_map",
]
