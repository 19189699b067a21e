from .catalogue import LOSSES
from .loss import (
    LossSpec,
    clip_value,
    growth_params,
    is_clippable,
    local_lipschitz,
    loss_derivative,
    loss_value,
    smoothness_constant,
)

__all__ = [
    "LOSSES",
    "LossSpec",
    "clip_value",
    "growth_params",
    "is_clippable",
    "local_lipschitz",
    "loss_derivative",
    "loss_value",
    "smoothness_constant",
]
