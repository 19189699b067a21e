from .dataset import Dataset
from .early_stopping import (
    CvReport,
    CvResult,
    CvSettings,
    StoppingGrid,
    build_geometric_time_grid,
    comparator_grid,
    cv_pipeline,
    grid_from_step_sizes,
    learning_rate_exponent,
    reference_gd_exponent,
    risk_matching_psi,
    select_stopping_time,
    simple_rate_exponent,
    split_dataset,
)
from .gradient_descent import (
    GdConfig,
    GdTrajectory,
    cumulative_step_sum,
    empirical_risk,
    gd_step,
    interpolate,
    risk_gradient_coeffs,
    run_gd,
    smoothness_of_risk,
    step_size_cap,
)
from .rerm import (
    LeastSquaresPath,
    PathEntry,
    RermSolution,
    match_risk,
    rerm_risk_path,
    solve_rerm,
    solve_rerm_ls,
    solve_rerm_smooth,
)

__all__ = [
    "CvReport",
    "CvResult",
    "CvSettings",
    "Dataset",
    "GdConfig",
    "GdTrajectory",
    "LeastSquaresPath",
    "PathEntry",
    "RermSolution",
    "StoppingGrid",
    "build_geometric_time_grid",
    "comparator_grid",
    "cumulative_step_sum",
    "cv_pipeline",
    "empirical_risk",
    "gd_step",
    "grid_from_step_sizes",
    "interpolate",
    "learning_rate_exponent",
    "match_risk",
    "reference_gd_exponent",
    "rerm_risk_path",
    "risk_gradient_coeffs",
    "risk_matching_psi",
    "run_gd",
    "select_stopping_time",
    "simple_rate_exponent",
    "smoothness_of_risk",
    "solve_rerm",
    "solve_rerm_ls",
    "solve_rerm_smooth",
    "split_dataset",
    "step_size_cap",
]
