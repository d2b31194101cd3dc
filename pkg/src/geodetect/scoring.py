"""Per-sample confidence scores and the feature ensemble.

Every scorer returns (score, orientation) semantics: orientation is
"higher_is_in" or "lower_is_in" metadata consumed by the metrics layer,
which normalizes internally. Score functions accept one sample (1-d) or a
batch (2-d) and are pure given the fitted statistics.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from sklearn.base import BaseEstimator

from .exceptions import DomainError, FitError, ShapeError
from .geometry import TiedCovariance, fr_gauss_diag, fr_softmax, kl_softmax, softmax
from .stats import (
    CentroidFitConfig,
    CentroidSet,
    FeatureStats,
    OodStats,
    fit_centroids,
    fit_gaussian_stats,
    fit_ood_stats,
)
from .validation import as_sample_matrix, check_positive_scalar

HIGHER_IS_IN = "higher_is_in"
LOWER_IS_IN = "lower_is_in"
ORIENTATIONS = (HIGHER_IS_IN, LOWER_IS_IN)

SCORER_KINDS = ("fr0", "fr_layer", "fr_layer_ood", "msp", "odin", "energy",
                "mahalanobis_layer")
ENSEMBLE_L2 = 1e-4


@dataclass(frozen=True)
class ScorerSpec:
    """Declarative description of one scorer column.

    distance selects the dissimilarity for centroid-based scoring
    ("fisher_rao" or "kl", the latter for the divergence ablation);
    layer_index is required exactly for the layer-wise kinds.
    """

    kind: str
    temperature: float = 1.0
    aggregation: str = "sum"
    distance: str = "fisher_rao"
    layer_index: int | None = None

    def __post_init__(self):
        if self.kind not in SCORER_KINDS:
            raise DomainError(f"unknown scorer kind {self.kind!r}")
        check_positive_scalar(self.temperature, "temperature")
        if self.aggregation not in ("sum", "min"):
            raise DomainError("aggregation must be 'sum' or 'min'")
        if self.distance not in ("fisher_rao", "kl"):
            raise DomainError("distance must be 'fisher_rao' or 'kl'")
        layerwise = self.kind in ("fr_layer", "fr_layer_ood", "mahalanobis_layer")
        if layerwise and self.layer_index is None:
            raise DomainError(f"{self.kind} requires layer_index")
        if not layerwise and self.layer_index is not None:
            raise DomainError(f"{self.kind} does not take layer_index")

    @property
    def name(self) -> str:
        if self.kind == "fr0":
            stem = "fr0" if self.distance == "fisher_rao" else "kl0"
            return f"{stem}_{self.aggregation}"
        if self.layer_index is not None:
            return f"{self.kind}_{self.layer_index}"
        return self.kind

    @property
    def orientation(self) -> str:
        if self.kind == "fr0":
            return HIGHER_IS_IN if self.aggregation == "sum" else LOWER_IS_IN
        return {
            "fr_layer": LOWER_IS_IN,
            "fr_layer_ood": HIGHER_IS_IN,
            "msp": HIGHER_IS_IN,
            "odin": HIGHER_IS_IN,
            "energy": LOWER_IS_IN,
            "mahalanobis_layer": HIGHER_IS_IN,
        }[self.kind]


def _centroid_distances(logits, centroids: CentroidSet, temperature, distance):
    x, single = as_sample_matrix(logits, "logits")
    if x.shape[1] != centroids.n_classes:
        raise ShapeError(
            f"logits length {x.shape[1]} does not match centroid count {centroids.n_classes}"
        )
    p = softmax(x, temperature)
    q = softmax(centroids.centroids, temperature)
    if distance == "fisher_rao":
        d = fr_softmax(p[:, None, :], q[None, :, :])
    else:
        d = kl_softmax(p[:, None, :], q[None, :, :])
    return d, single


def score_fr0(logits, centroids: CentroidSet, temperature: float = 1.0,
              aggregation: str = "sum"):
    """Geodesic logits score: per-class Fisher-Rao distances between the
    temperature-scaled test softmax and the centroid softmaxes, combined by
    sum (default, higher_is_in) or min (lower_is_in)."""
    return _score_centroid(logits, centroids, temperature, aggregation, "fisher_rao")


def score_kl0(logits, centroids: CentroidSet, temperature: float = 1.0,
              aggregation: str = "sum"):
    """KL-divergence variant of the centroid logits score."""
    return _score_centroid(logits, centroids, temperature, aggregation, "kl")


def _score_centroid(logits, centroids, temperature, aggregation, distance):
    if aggregation not in ("sum", "min"):
        raise DomainError("aggregation must be 'sum' or 'min'")
    d, single = _centroid_distances(logits, centroids, temperature, distance)
    out = d.sum(axis=1) if aggregation == "sum" else d.min(axis=1)
    return float(out[0]) if single else out


def classify_fr(logits, centroids: CentroidSet, temperature: float = 1.0):
    """Nearest-centroid class under the Fisher-Rao distance; ties break to
    the lowest class index."""
    d, single = _centroid_distances(logits, centroids, temperature, "fisher_rao")
    out = np.argmin(d, axis=1)
    return int(out[0]) if single else out


def score_fr_layer(features, stats: FeatureStats, layer: int):
    """Distance to the nearest class-conditional Gaussian of one layer.

    The test sample is modeled as a Gaussian with the learned tied sigma on
    both sides, so only the mean axis varies. Orientation: lower_is_in.
    """
    x, single = as_sample_matrix(features, f"features[{layer}]")
    means = stats.class_means[layer]
    sigma = stats.tied_sigma[layer]
    if x.shape[1] != means.shape[1]:
        raise ShapeError(f"feature length {x.shape[1]} does not match layer width {means.shape[1]}")
    d = fr_gauss_diag(x[:, None, :], sigma[None, None, :], means[None, :, :], sigma[None, None, :])
    out = d.min(axis=1)
    return float(out[0]) if single else out


def score_fr_layer_ood(features, stats: FeatureStats, ood: OodStats, layer: int):
    """Distance to the validation-outlier Gaussian of one layer.

    The test side keeps the training tied sigma; the reference carries the
    outlier mean and sigma. The reference is class-free, so no minimum over
    classes remains. Orientation: higher_is_in.
    """
    x, single = as_sample_matrix(features, f"features[{layer}]")
    sigma = stats.tied_sigma[layer]
    mu_p = ood.mu_prime[layer]
    sigma_p = ood.sigma_prime[layer]
    if x.shape[1] != mu_p.shape[0]:
        raise ShapeError(f"feature length {x.shape[1]} does not match layer width {mu_p.shape[0]}")
    d = fr_gauss_diag(x, sigma[None, :], mu_p[None, :], sigma_p[None, :])
    out = np.atleast_1d(d)
    return float(out[0]) if single else out


def score_baseline(logits, kind: str, temperature: float = 1.0):
    """Reference scores on the logits.

    msp: maximum softmax probability at T=1 (higher_is_in).
    odin: maximum temperature-scaled softmax probability (higher_is_in);
          identical to msp at T=1.
    energy: -T * log sum exp(logit/T), the free energy (lower_is_in).
    """
    check_positive_scalar(temperature, "temperature")
    x, single = as_sample_matrix(logits, "logits")
    if kind == "msp":
        out = softmax(x, 1.0).max(axis=1)
    elif kind == "odin":
        out = softmax(x, temperature).max(axis=1)
    elif kind == "energy":
        z = x / temperature
        m = z.max(axis=1)
        out = -temperature * (m + np.log(np.exp(z - m[:, None]).sum(axis=1)))
    else:
        raise DomainError(f"unknown baseline kind {kind!r}")
    return float(out[0]) if single else out


def score_mahalanobis_layer(features, class_means, cov: TiedCovariance):
    """Largest negative squared Mahalanobis distance over class means
    (higher_is_in): the closest class-conditional Gaussian dominates."""
    x, single = as_sample_matrix(features, "features")
    means = np.asarray(class_means, dtype=np.float64)
    if means.ndim != 2 or x.shape[1] != means.shape[1] or means.shape[1] != cov.dim:
        raise ShapeError("features, class_means and covariance dimensions disagree")
    diff = x[:, None, :] - means[None, :, :]
    quad = np.einsum("ncj,jk,nck->nc", diff, cov.pseudo_inverse, diff)
    out = (-quad).max(axis=1)
    return float(out[0]) if single else out


@dataclass
class ScoreTable:
    """Named score columns over N samples with per-column orientation."""

    names: list = field(default_factory=list)
    columns: dict = field(default_factory=dict)
    orientation: dict = field(default_factory=dict)

    def add(self, name: str, values, orientation: str):
        if orientation not in ORIENTATIONS:
            raise DomainError(f"orientation must be one of {ORIENTATIONS}")
        vals = np.asarray(values, dtype=np.float64).ravel()
        if self.names and vals.shape[0] != self.n_samples:
            raise ShapeError(f"column {name!r} has {vals.shape[0]} rows, expected {self.n_samples}")
        if name in self.columns:
            raise DomainError(f"duplicate column {name!r}")
        self.names.append(name)
        self.columns[name] = vals
        self.orientation[name] = orientation
        return self

    @property
    def n_samples(self) -> int:
        return 0 if not self.names else self.columns[self.names[0]].shape[0]

    def matrix(self) -> np.ndarray:
        return np.column_stack([self.columns[n] for n in self.names])


@dataclass
class EnsembleWeights:
    """Logistic-regression weights: one per score column plus an intercept
    (the last entry of alpha)."""

    alpha: np.ndarray
    fitted_iterations: int = 0

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=np.float64).ravel()
        if not np.all(np.isfinite(a)):
            raise FitError("ensemble weights must be finite")
        self.alpha = a

    @property
    def weights(self) -> np.ndarray:
        return self.alpha[:-1]

    @property
    def intercept(self) -> float:
        return float(self.alpha[-1])


def fit_alpha(table, labels, max_iter: int = 100) -> EnsembleWeights:
    """Fit combination weights by penalized logistic regression.

    Columns are standardized internally (zero-variance columns are left at
    zero); the penalized log-likelihood (L2 1e-4 on the standardized
    weights, intercept free) is maximized with L-BFGS capped at max_iter
    iterations, and the weights are mapped back to the original scale.
    Label 1 marks in-distribution. Deterministic (zero initialization).
    """
    x = table.matrix() if isinstance(table, ScoreTable) else np.asarray(table, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError("score table must be 2-d")
    if not np.all(np.isfinite(x)):
        raise FitError("score columns must be finite")
    y = np.asarray(labels, dtype=np.float64).ravel()
    if y.shape[0] != x.shape[0]:
        raise ShapeError("labels must match the score row count")
    classes = np.unique(y)
    if not np.array_equal(classes, [0.0, 1.0]):
        if classes.size < 2:
            raise FitError("both label values must be present")
        raise FitError("labels must be binary 0/1")

    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    # near-constant columns carry only rounding noise after centering; pin
    # them to zero so they cannot soak up weight on separable data
    constant = scale <= 1e-12 * np.maximum(1.0, np.abs(mean))
    scale = np.where(constant, 1.0, scale)
    z = (x - mean) / scale
    z[:, constant] = 0.0
    n, k = z.shape

    def objective(theta):
        w, b = theta[:k], theta[k]
        logit = z @ w + b
        # mean NLL, computed via logaddexp for stability
        nll = np.mean(np.logaddexp(0.0, logit) - y * logit)
        grad_logit = 1.0 / (1.0 + np.exp(-logit)) - y
        gw = z.T @ grad_logit / n + ENSEMBLE_L2 * w
        gb = grad_logit.mean()
        return nll + 0.5 * ENSEMBLE_L2 * float(w @ w), np.append(gw, gb)

    res = minimize(objective, np.zeros(k + 1), jac=True, method="L-BFGS-B",
                   options={"maxiter": int(max_iter)})
    if not np.all(np.isfinite(res.x)):
        raise FitError("logistic regression produced non-finite weights")
    w_std, b_std = res.x[:k], res.x[k]
    w_std = np.where(constant, 0.0, w_std)
    w = w_std / scale
    intercept = b_std - float(mean @ w)
    return EnsembleWeights(alpha=np.append(w, intercept),
                           fitted_iterations=int(res.nit))


def score_ensemble(rows, weights: EnsembleWeights):
    """Weighted combination of score columns plus intercept (higher_is_in).

    Zeroing the validation-outlier columns' weights recovers the variant
    that uses no prior outlier information.
    """
    x, single = as_sample_matrix(rows, "rows")
    if x.shape[1] != weights.weights.shape[0]:
        raise ShapeError(
            f"row length {x.shape[1]} does not match weight count {weights.weights.shape[0]}"
        )
    out = x @ weights.weights + weights.intercept
    return float(out[0]) if single else out


class FisherRaoLogits(BaseEstimator):
    """Estimator wrapper for the centroid logits score.

    fit(X, y) takes training logits and labels; score_samples(X) returns the
    aggregated centroid distance, predict(X) the nearest-centroid class.
    """

    def __init__(self, temperature=1.0, aggregation="sum", distance="fisher_rao",
                 learning_rate=0.1, epochs=100, batch_size=None, seed=0):
        self.temperature = temperature
        self.aggregation = aggregation
        self.distance = distance
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.seed = seed

    def fit(self, X, y):
        cfg = CentroidFitConfig(learning_rate=self.learning_rate, epochs=self.epochs,
                                batch_size=self.batch_size, seed=self.seed)
        self.centroids_ = fit_centroids(X, y, cfg, fit_distance=self.distance)
        self.orientation_ = HIGHER_IS_IN if self.aggregation == "sum" else LOWER_IS_IN
        return self

    def score_samples(self, X):
        self._check_fitted()
        scorer = score_fr0 if self.distance == "fisher_rao" else score_kl0
        return scorer(X, self.centroids_, self.temperature, self.aggregation)

    def predict(self, X):
        self._check_fitted()
        return classify_fr(X, self.centroids_, self.temperature)

    def _check_fitted(self):
        if not hasattr(self, "centroids_"):
            raise FitError("FisherRaoLogits is not fitted; call fit first")


class FeatureGaussian(BaseEstimator):
    """Estimator wrapper for the layer-wise Gaussian scores.

    fit(X, y) takes a list of layer matrices; transform(X) returns one
    nearest-class distance column per layer (lower_is_in). After fit_ood,
    transform_ood(X) returns the outlier-reference columns (higher_is_in).
    """

    def __init__(self):
        pass

    def fit(self, X, y):
        self.stats_ = fit_gaussian_stats(X, y)
        return self

    def fit_ood(self, X):
        self._check_fitted()
        self.ood_stats_ = fit_ood_stats(X)
        if self.ood_stats_.n_layers != self.stats_.n_layers:
            raise ShapeError("outlier layer count must match the fitted layer count")
        return self

    def transform(self, X):
        self._check_fitted()
        return np.column_stack(
            [score_fr_layer(X[l], self.stats_, l) for l in range(self.stats_.n_layers)]
        )

    def transform_ood(self, X):
        self._check_fitted()
        if not hasattr(self, "ood_stats_"):
            raise FitError("call fit_ood before transform_ood")
        return np.column_stack(
            [score_fr_layer_ood(X[l], self.stats_, self.ood_stats_, l)
             for l in range(self.stats_.n_layers)]
        )

    def _check_fitted(self):
        if not hasattr(self, "stats_"):
            raise FitError("FeatureGaussian is not fitted; call fit first")


class LogisticEnsemble(BaseEstimator):
    """Estimator wrapper for the score-combination regression."""

    def __init__(self, max_iter=100):
        self.max_iter = max_iter

    def fit(self, X, y):
        self.weights_ = fit_alpha(X, y, max_iter=self.max_iter)
        self.orientation_ = HIGHER_IS_IN
        return self

    def decision_function(self, X):
        if not hasattr(self, "weights_"):
            raise FitError("LogisticEnsemble is not fitted; call fit first")
        return score_ensemble(X, self.weights_)

    def predict_proba(self, X):
        z = self.decision_function(X)
        p = 1.0 / (1.0 + np.exp(-z))
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        return (self.decision_function(X) >= 0.0).astype(np.int64)
