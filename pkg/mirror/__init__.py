from .descent import (
    MirrorTrajectory,
    estimate_relative_smoothness,
    is_relatively_smooth_step,
    level_set_comparator,
    mirror_step,
    run_mirror_descent,
)
from .lp import (
    LpPoint,
    LpSpace,
    bregman_divergence,
    duality_map,
    duality_map_inverse,
    identity_scale,
    mirror_map_value,
    three_point_identity_check,
)
from .objectives import EmpiricalLossObjective, LinearObjective, Objective, QuadraticObjective

__all__ = [
    "EmpiricalLossObjective",
    "LinearObjective",
    "LpPoint",
    "LpSpace",
    "MirrorTrajectory",
    "Objective",
    "QuadraticObjective",
    "bregman_divergence",
    "duality_map",
    "duality_map_inverse",
    "estimate_relative_smoothness",
    "identity_scale",
    "is_relatively_smooth_step",
    "level_set_comparator",
    "mirror_map_value",
    "mirror_step",
    "run_mirror_descent",
    "three_point_identity_check",
]
