from .approx_error import (
    ApproxErrorOracle,
    ApproxErrorProblem,
    brute_force_approx_error,
    check_reg_trafo,
    check_reg_trafo_power,
)
from .certificates import (
    check_clipping_risk,
    check_geometric_grids,
    check_loss_certificates,
    check_rerm_closed_form,
    check_rerm_path_monotonicity,
    check_rerm_perturbation,
    check_rerm_self_regularization,
    check_risk_matching_accuracy,
)
from .gd_checks import (
    check_fejer,
    check_norm_bound,
    check_risk_matching_bound,
    check_risk_monotonicity,
    check_self_regularization_gd,
    check_telescoping,
    random_comparators,
    risk_matched_comparator,
)
from .mirror_checks import (
    check_bregman_contraction,
    check_duality_algebra,
    check_key_recursion,
    check_mirror_loss_monotonicity,
    check_p2_cross_oracle,
)
from .result import CheckRecorder, CheckResult, merge_results
from .suite import VerifySettings, collect, mirror_reference_runs, random_gd_instance, run_suite, suite_tasks

__all__ = [
    "ApproxErrorOracle",
    "ApproxErrorProblem",
    "CheckRecorder",
    "CheckResult",
    "VerifySettings",
    "brute_force_approx_error",
    "check_bregman_contraction",
    "check_clipping_risk",
    "check_duality_algebra",
    "check_fejer",
    "check_geometric_grids",
    "check_key_recursion",
    "check_loss_certificates",
    "check_mirror_loss_monotonicity",
    "check_norm_bound",
    "check_p2_cross_oracle",
    "check_reg_trafo",
    "check_reg_trafo_power",
    "check_rerm_closed_form",
    "check_rerm_path_monotonicity",
    "check_rerm_perturbation",
    "check_rerm_self_regularization",
    "check_risk_matching_bound",
    "check_risk_matching_accuracy",
    "check_risk_monotonicity",
    "check_self_regularization_gd",
    "check_telescoping",
    "collect",
    "merge_results",
    "random_comparators",
    "mirror_reference_runs",
    "random_gd_instance",
    "risk_matched_comparator",
    "run_suite",
    "suite_tasks",
]
