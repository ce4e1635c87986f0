"""omnifuse: combine predictions from multiple high-dimensional sources.

Penalized logistic regression under double cross-validation, five
strategies for combining two prediction sources (convex mixtures,
model-based stacking, recalibration, sequential offsets, naive feature
stacking), and the calibration/discrimination metrics to compare them.
"""

__version__ = "0.1.0"

from .combine import (
    CombinedPrediction,
    mix,
    naive_stack,
    recalibrate_loo,
    search_mixture_weight,
    sequential_offset,
    stack_logistic_loo,
)
from .crossval import (
    DoubleCvResult,
    FoldPlan,
    derive_seed,
    double_cv_predict,
    make_folds,
    select_lambda_inner,
)
from .data import (
    PredictorSource,
    StudyBundle,
    SyntheticConfig,
    align_samples,
    generate_synthetic,
    load_outcome_csv,
    load_source_csv,
    read_machine_report,
    write_outcome_csv,
    write_report,
    write_source_csv,
)
from .glm import (
    ColumnStats,
    DesignMatrix,
    FitResult,
    OffsetVector,
    OutcomeVector,
    PenaltySpec,
    PredictionVector,
    fit_penalized_logistic,
    fit_penalized_path,
    kkt_max_violation,
    lambda_grid,
    logit_clip,
    predict_proba,
    standardize,
)
from .metrics import (
    MetricsRow,
    c_index,
    cvss,
    deviance,
    metrics_row,
    null_probs_cv,
    press,
    q2,
)

__all__ = [
    "__version__",
    "CombinedPrediction",
    "ColumnStats",
    "DesignMatrix",
    "DoubleCvResult",
    "FitResult",
    "FoldPlan",
    "MetricsRow",
    "OffsetVector",
    "OutcomeVector",
    "PenaltySpec",
    "PredictionVector",
    "PredictorSource",
    "StudyBundle",
    "SyntheticConfig",
    "align_samples",
    "c_index",
    "cvss",
    "derive_seed",
    "deviance",
    "double_cv_predict",
    "fit_penalized_logistic",
    "fit_penalized_path",
    "generate_synthetic",
    "kkt_max_violation",
    "lambda_grid",
    "load_outcome_csv",
    "load_source_csv",
    "logit_clip",
    "make_folds",
    "metrics_row",
    "mix",
    "naive_stack",
    "null_probs_cv",
    "predict_proba",
    "press",
    "q2",
    "read_machine_report",
    "recalibrate_loo",
    "search_mixture_weight",
    "select_lambda_inner",
    "sequential_offset",
    "stack_logistic_loo",
    "standardize",
    "write_outcome_csv",
    "write_report",
    "write_source_csv",
]
