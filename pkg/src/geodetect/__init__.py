"""Geodesic-distance out-of-distribution detection.

Closed-form Fisher-Rao distances on the softmax simplex and on diagonal
Gaussian manifolds, centroid and feature-statistics fitting, per-sample
confidence scores with baselines, detector calibration and metrics, a
small differentiable classifier for input pre-processing, binary feature
dumps, and an experiment-runner CLI.
"""

from .exceptions import (
    CalibrationError,
    ConfigError,
    DomainError,
    DumpFormatError,
    FitError,
    GeodetectError,
    InsufficientDataError,
    ShapeError,
)
from .geometry import (
    TiedCovariance,
    fr_gauss_1d,
    fr_gauss_diag,
    fr_softmax,
    kl_softmax,
    mahalanobis,
    softmax,
)
from .metrics import (
    DetectorConfig,
    EvalReport,
    TuneGrid,
    aupr,
    auroc,
    calibrate_threshold,
    detect,
    evaluate,
    grid_search,
    tnr_at_tpr,
)
from .nnet import (
    MlpClassifier,
    MlpParams,
    TrainConfig,
    fgsm_generate,
    forward,
    grad_input_fr0,
    preprocess_input,
    train,
)
from .scoring import (
    EnsembleWeights,
    FeatureGaussian,
    FisherRaoLogits,
    LogisticEnsemble,
    ScoreTable,
    ScorerSpec,
    classify_fr,
    fit_alpha,
    score_baseline,
    score_ensemble,
    score_fr0,
    score_fr_layer,
    score_fr_layer_ood,
    score_kl0,
    score_mahalanobis_layer,
)
from .stats import (
    CentroidFitConfig,
    CentroidSet,
    CovarianceDiagnostics,
    FeatureStats,
    OodStats,
    avg_pool_spatial,
    covariance_diagnostics,
    fit_centroids,
    fit_gaussian_stats,
    fit_ood_stats,
    fit_tied_covariance,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
