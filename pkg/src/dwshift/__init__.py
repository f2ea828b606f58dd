"""Covariate shift adaptation with double-weighted minimax risk classifiers."""

from .core import (
    Dataset,
    FeatureMap,
    LabeledSample,
    Loss,
    MapKind,
    Rule,
    error_rate,
    feature,
    loss,
)
from .kernel import RbfKernel, bandwidth_heuristic
from .mrc import (
    MrcModel,
    UncertaintySpec,
    default_d_grid,
    fit,
    fit_known_marginals,
    fit_reweighted_lr,
    fit_robust,
    load_model,
    mean_vector,
    predict_label,
    predict_labels,
    predict_probs,
    save_model,
    select_confidence_radius,
    select_D,
    smallest_minimax_risk,
    worstcase_log,
    worstcase_zero_one,
)
from .weights import (
    DwKmmConfig,
    MarginalModel,
    WeightPair,
    classifier_ratio_weights,
    dw_kmm,
    exact_double_weights,
    flattening_weights,
    kmm,
    reweighted_weights,
    rkhs_discrepancy,
    robust_weights,
)

__version__ = "0.1.0"
