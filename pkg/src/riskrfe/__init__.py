"""Risk-based recursive feature elimination for kernel SVM/SVR and ERM.

Backward elimination that ranks features by the smallest increase of the
(regularized) empirical risk when they are removed, with projected kernels,
scheduled stopping thresholds, scree/change-point selection, and a
Monte-Carlo accuracy harness.
"""

from .core import (
    Dataset,
    FeatureMask,
    NonNumericCellError,
    NumericalError,
    RiskRfeError,
    RunConfig,
    SeedStream,
    Task,
    ValidationError,
    derive_seed,
    load_dataset,
    save_dataset,
)
from .kernels import (
    KernelSpec,
    deleted_kernel_equivalent,
    eval_kernel,
    eval_projected_kernel,
    gram_matrix,
    kernel_matrix,
    project_matrix,
    project_point,
)
from .learner import (
    LinearModel,
    LossSpec,
    ObjectiveValue,
    RegularizedModel,
    empirical_risk,
    fit,
    fit_linear_erm,
    loss_value,
    predict,
    predict_labels,
)
from .rfe import (
    CycleRecord,
    Ranking,
    RfeTrace,
    evaluate_candidates,
    rfe_step,
    run_rfe,
    scree_csv_rows,
)
from .simlab import (
    ErrorCategory,
    ErrorTally,
    RunTemplate,
    ScenarioError,
    ScenarioResult,
    SimulationScenario,
    count_errors,
    generate_classification,
    generate_regression,
    load_scenario_file,
    run_scenario,
)
from .solvers import BACKEND as SOLVER_BACKEND
from .stopping import (
    ChangePointFit,
    StoppingRule,
    change_point_selection,
    delta_schedule,
    fit_change_point,
    scree_values,
    should_stop,
)
from .tuning import CvCell, CvConfig, CvResult, CvScore, cross_validate, kfold_split

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "FeatureMask",
    "NonNumericCellError",
    "NumericalError",
    "RiskRfeError",
    "RunConfig",
    "SeedStream",
    "Task",
    "ValidationError",
    "derive_seed",
    "load_dataset",
    "save_dataset",
    "KernelSpec",
    "deleted_kernel_equivalent",
    "eval_kernel",
    "eval_projected_kernel",
    "gram_matrix",
    "kernel_matrix",
    "project_matrix",
    "project_point",
    "LinearModel",
    "LossSpec",
    "ObjectiveValue",
    "RegularizedModel",
    "empirical_risk",
    "fit",
    "fit_linear_erm",
    "loss_value",
    "predict",
    "predict_labels",
    "CycleRecord",
    "Ranking",
    "RfeTrace",
    "evaluate_candidates",
    "rfe_step",
    "run_rfe",
    "scree_csv_rows",
    "ErrorCategory",
    "ErrorTally",
    "RunTemplate",
    "ScenarioError",
    "ScenarioResult",
    "SimulationScenario",
    "count_errors",
    "generate_classification",
    "generate_regression",
    "load_scenario_file",
    "run_scenario",
    "SOLVER_BACKEND",
    "ChangePointFit",
    "StoppingRule",
    "change_point_selection",
    "delta_schedule",
    "fit_change_point",
    "scree_values",
    "should_stop",
    "CvCell",
    "CvConfig",
    "CvResult",
    "CvScore",
    "cross_validate",
    "kfold_split",
    "__version__",
]
