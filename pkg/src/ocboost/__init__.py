"""Online coordinate boosting over a fixed, ordered pool of weak hypotheses.

The centerpiece is :class:`OnlineCoordinateBooster`, an online learner whose
per-coordinate weights track what a batch reweighting pass over the whole
stream so far would have produced, to an accuracy controlled by its ``order``.
:class:`OzaBooster` is the classic streaming baseline, ``fit_weights`` and
``incremental_oracle`` are the batch references, and the ``experiments``
module reproduces the drift and digit-stream studies.
"""

from .batch import (
    BatchFit,
    exp_loss,
    fit_weights,
    incremental_oracle,
    preselect_hypotheses,
    training_error,
    weight_matrix,
)
from .core import (
    AlphaTrajectory,
    LabeledExample,
    StrongClassifier,
    WeakHypothesis,
    build_margin_matrix,
    compute_margin,
    margins_from_arrays,
    score,
)
from .errors import (
    ConfigError,
    DataFormatError,
    NumericOverflowError,
    OcboostError,
    SelectionError,
    UnboundedAlphaError,
)
from .experiments import (
    ExperimentConfig,
    run_experiment,
    run_mnist,
    run_oracle_compare,
    run_synthetic,
    surrogate_digits,
)
from .metrics import approx_error, approx_error_series, auc, ova_predict, test_error
from .ocb import OnlineCoordinateBooster, brute_force_q_error, optimal_q
from .oza import OzaBooster, consolidated_reweight
from .synthetic import DriftSpec, DriftStream, gen_drift_stream
from .weak import DecisionStump, PrototypeHypothesis, best_prototype, best_stump

__version__ = "0.1.0"

__all__ = [
    "AlphaTrajectory",
    "BatchFit",
    "ConfigError",
    "DataFormatError",
    "DecisionStump",
    "DriftSpec",
    "DriftStream",
    "ExperimentConfig",
    "LabeledExample",
    "NumericOverflowError",
    "OcboostError",
    "OnlineCoordinateBooster",
    "OzaBooster",
    "PrototypeHypothesis",
    "SelectionError",
    "StrongClassifier",
    "UnboundedAlphaError",
    "WeakHypothesis",
    "approx_error",
    "approx_error_series",
    "auc",
    "best_prototype",
    "best_stump",
    "brute_force_q_error",
    "build_margin_matrix",
    "compute_margin",
    "consolidated_reweight",
    "exp_loss",
    "fit_weights",
    "gen_drift_stream",
    "incremental_oracle",
    "margins_from_arrays",
    "optimal_q",
    "ova_predict",
    "preselect_hypotheses",
    "run_experiment",
    "run_mnist",
    "run_oracle_compare",
    "run_synthetic",
    "score",
    "surrogate_digits",
    "test_error",
    "training_error",
    "weight_matrix",
]
