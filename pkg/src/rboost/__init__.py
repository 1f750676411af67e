"""Multi-class boosted trees: mart, robust logitboost, abc-mart, abc-logitboost."""

from .boost import (
    ALGORITHMS,
    BoostModel,
    BoostState,
    Iteration,
    TrainConfig,
    TreeFitter,
    grads_abc,
    grads_plain,
    hessian_diagnostics,
    iterate_abc,
    iterate_plain,
    predict_model,
    softmax_row,
    total_loss,
    train,
)
from .data import Dataset, DataError, FeatureColumnIndex, build_sorted_index, load_dataset
from .estimator import BoostClassifier
from .evaluation import (
    MetricLog,
    emit_curves,
    misclassification_count,
    pvalue_two_proportion,
    read_curves,
    relative_improvement,
)
from .model_io import ModelFormatError, load_model, save_model
from .tree import (
    RegressionTree,
    SplitCandidate,
    build_tree,
    find_best_split,
    gain_from_sums,
    leaf_value,
    predict_tree,
)

__version__ = "0.1.0"
