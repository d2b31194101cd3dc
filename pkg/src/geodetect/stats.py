"""Offline fitting of detector statistics.

Logits-space class centroids via monitored gradient descent on a geodesic
objective, per-layer Gaussian feature statistics with a tied diagonal
standard deviation, reference statistics from validation outlier data,
spatial average pooling, and covariance conditioning diagnostics.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import FitError, InsufficientDataError, ShapeError
from .geometry import TiedCovariance, softmax
from .validation import as_float_array, as_matrix, check_labels, check_positive_scalar

SIGMA_FLOOR = 1e-6
FIT_DISTANCES = ("fisher_rao", "kl")


@dataclass(frozen=True)
class CentroidFitConfig:
    """Gradient-descent settings for centroid estimation.

    batch_size=None runs full-batch descent (the default); an integer turns
    on mini-batching with seeded shuffling. The step size is fixed at
    learning_rate while the objective decreases; an epoch that increases it
    is reverted and the working step halved, so the recorded loss is
    non-increasing.
    """

    learning_rate: float = 0.1
    epochs: int = 100
    batch_size: int | None = None
    seed: int = 0
    temperature: float = 1.0

    def __post_init__(self):
        check_positive_scalar(self.learning_rate, "learning_rate")
        if int(self.epochs) < 0:
            raise FitError("epochs must be non-negative")
        if self.batch_size is not None and int(self.batch_size) < 1:
            raise FitError("batch_size must be a positive integer or None")
        check_positive_scalar(self.temperature, "temperature")


@dataclass
class CentroidSet:
    """Per-class logits-space centroids.

    fit_distance is "fisher_rao" (centroid minimizes the class-mean squared
    geodesic distance between softmax outputs, i.e. the Frechet mean) or
    "kl" (centroid minimizes the class-mean KL divergence from the samples).
    loss_history holds the minimized objective per epoch, averaged over
    classes; final_loss is its last entry.
    """

    centroids: np.ndarray
    fit_distance: str = "fisher_rao"
    final_loss: float = 0.0
    loss_history: list = field(default_factory=list)

    def __post_init__(self):
        c = as_matrix(self.centroids, "centroids")
        if c.shape[0] != c.shape[1]:
            raise ShapeError(f"centroids must be square (one per class), got {c.shape}")
        if self.fit_distance not in FIT_DISTANCES:
            raise FitError(f"fit_distance must be one of {FIT_DISTANCES}")
        self.centroids = c

    @property
    def n_classes(self) -> int:
        return self.centroids.shape[0]


def _fr_sq_and_grad(probs, mu, temperature):
    """Mean squared FR distance from sample softmaxes to softmax(mu), with
    its gradient in mu. At the arccos clamp boundary the gradient is 0."""
    q = softmax(mu, temperature)
    s = np.clip(np.sqrt(probs * q).sum(axis=1), -1.0, 1.0)
    d = 2.0 * np.arccos(s)
    denom = np.sqrt(np.maximum(1.0 - s * s, 0.0))
    coef = np.zeros_like(s)
    ok = denom > 0.0
    coef[ok] = 2.0 * d[ok] / denom[ok]
    inner = np.sqrt(probs * q) - q[None, :] * s[:, None]
    grad = -(coef[:, None] * inner / temperature).mean(axis=0)
    return float(np.mean(d * d)), grad


def _kl_and_grad(probs, mu, temperature):
    """Mean KL(sample || softmax(mu)) and its gradient in mu."""
    q = softmax(mu, temperature)
    logq = np.log(np.maximum(q, 1e-12))
    logp = np.log(np.maximum(probs, 1e-12))
    kl = np.where(probs > 0.0, probs * (logp - logq), 0.0).sum(axis=1)
    grad = (q[None, :] - probs).mean(axis=0) / temperature
    return float(np.maximum(kl, 0.0).mean()), grad


_OBJECTIVES = {"fisher_rao": _fr_sq_and_grad, "kl": _kl_and_grad}


def fit_centroids(logits, labels, config: CentroidFitConfig | None = None,
                  fit_distance: str = "fisher_rao") -> CentroidSet:
    """Fit one logits-space centroid per class by monitored gradient descent.

    Centroids are initialized to the rows of the identity matrix and updated
    class by class; each class objective is the mean dissimilarity between
    the class-sample softmaxes and the centroid softmax. Deterministic for a
    fixed config (the seed only drives mini-batch shuffling).
    """
    cfg = config or CentroidFitConfig()
    if fit_distance not in FIT_DISTANCES:
        raise FitError(f"fit_distance must be one of {FIT_DISTANCES}")
    x = as_matrix(logits, "logits")
    n_classes = x.shape[1]
    y = check_labels(labels, n_classes)
    if y.shape[0] != x.shape[0]:
        raise ShapeError("logits and labels must have the same number of samples")
    objective = _OBJECTIVES[fit_distance]
    rng = np.random.default_rng(cfg.seed)

    centroids = np.eye(n_classes)
    per_class_probs = []
    for c in range(n_classes):
        rows = x[y == c]
        if rows.shape[0] == 0:
            raise FitError(f"class {c} has no samples")
        per_class_probs.append(softmax(rows, cfg.temperature))

    per_class_hist = np.empty((n_classes, int(cfg.epochs) + 1))
    for c in range(n_classes):
        probs = per_class_probs[c]
        mu = centroids[c].copy()
        best_loss, _ = objective(probs, mu, cfg.temperature)
        best_mu = mu.copy()
        per_class_hist[c, 0] = best_loss
        step = cfg.learning_rate
        for epoch in range(int(cfg.epochs)):
            if cfg.batch_size is None:
                _, grad = objective(probs, mu, cfg.temperature)
                if not np.all(np.isfinite(grad)):
                    raise FitError(f"non-finite gradient while fitting class {c}")
                mu = mu - step * grad
            else:
                order = rng.permutation(probs.shape[0])
                for start in range(0, probs.shape[0], int(cfg.batch_size)):
                    batch = probs[order[start:start + int(cfg.batch_size)]]
                    _, grad = objective(batch, mu, cfg.temperature)
                    if not np.all(np.isfinite(grad)):
                        raise FitError(f"non-finite gradient while fitting class {c}")
                    mu = mu - step * grad
            loss, _ = objective(probs, mu, cfg.temperature)
            if np.isfinite(loss) and loss <= best_loss:
                best_loss, best_mu = loss, mu.copy()
                step = min(step * 1.1, cfg.learning_rate)
            else:
                mu = best_mu.copy()
                step *= 0.5
            per_class_hist[c, epoch + 1] = best_loss
        centroids[c] = best_mu

    history = per_class_hist.mean(axis=0)
    return CentroidSet(
        centroids=centroids,
        fit_distance=fit_distance,
        final_loss=float(history[-1]),
        loss_history=[float(v) for v in history],
    )


@dataclass
class FeatureStats:
    """Per-layer class-conditional means with a tied diagonal sigma."""

    class_means: list  # layer l -> (C, k_l)
    tied_sigma: list   # layer l -> (k_l,), strictly positive

    @property
    def n_layers(self) -> int:
        return len(self.class_means)

    @property
    def n_classes(self) -> int:
        return self.class_means[0].shape[0]


def _check_layers(layers, name):
    if not isinstance(layers, (list, tuple)) or len(layers) == 0:
        raise ShapeError(f"{name}: expected a non-empty list of layer matrices")
    mats = [as_matrix(m, f"{name}[{i}]") for i, m in enumerate(layers)]
    n = mats[0].shape[0]
    for i, m in enumerate(mats):
        if m.shape[0] != n:
            raise ShapeError(f"{name}[{i}]: layer sample counts disagree ({m.shape[0]} vs {n})")
    return mats


def fit_gaussian_stats(layers, labels, n_classes: int | None = None) -> FeatureStats:
    """Class means and tied diagonal sigma per layer.

    The tied sigma pools the within-class squared deviations over all
    classes and divides by the total sample count:
        sigma_j = sqrt( (1/N) sum_y sum_{i: y_i=y} (f_j(x_i) - mu_{y,j})^2 )
    Entries are floored at 1e-6 so degenerate (constant) coordinates stay
    usable in the Gaussian distances.
    """
    mats = _check_layers(layers, "layers")
    if n_classes is None:
        n_classes = int(np.max(np.asarray(labels))) + 1
    y = check_labels(labels, n_classes)
    if y.shape[0] != mats[0].shape[0]:
        raise ShapeError("layers and labels must have the same number of samples")
    class_means, tied_sigma = [], []
    for m in mats:
        means = np.empty((n_classes, m.shape[1]))
        sq_sum = np.zeros(m.shape[1])
        for c in range(n_classes):
            rows = m[y == c]
            if rows.shape[0] == 0:
                raise FitError(f"class {c} has no samples")
            means[c] = rows.mean(axis=0)
            sq_sum += np.square(rows - means[c]).sum(axis=0)
        sigma = np.sqrt(sq_sum / m.shape[0])
        class_means.append(means)
        tied_sigma.append(np.maximum(sigma, SIGMA_FLOOR))
    return FeatureStats(class_means=class_means, tied_sigma=tied_sigma)


@dataclass
class OodStats:
    """Per-layer unconditional mean and sigma of validation outlier data."""

    mu_prime: list     # layer l -> (k_l,)
    sigma_prime: list  # layer l -> (k_l,), strictly positive

    @property
    def n_layers(self) -> int:
        return len(self.mu_prime)


def fit_ood_stats(layers) -> OodStats:
    """Unconditional per-coordinate mean and population standard deviation
    per layer, sigma floored at 1e-6. Requires at least two samples."""
    mats = _check_layers(layers, "ood_features")
    if mats[0].shape[0] < 2:
        raise FitError("need at least 2 out-of-distribution samples")
    mu_prime = [m.mean(axis=0) for m in mats]
    sigma_prime = [np.maximum(m.std(axis=0), SIGMA_FLOOR) for m in mats]
    return OodStats(mu_prime=mu_prime, sigma_prime=sigma_prime)


def avg_pool_spatial(tensor) -> np.ndarray:
    """Reduce an (F, W, H) activation tensor to length F by spatial mean."""
    t = as_float_array(tensor, "tensor", ndim=3)
    if t.shape[1] < 1 or t.shape[2] < 1:
        raise ShapeError(f"spatial dimensions must be non-empty, got shape {t.shape}")
    return t.mean(axis=(1, 2))


@dataclass(frozen=True)
class CovarianceDiagnostics:
    condition_number_full: float
    condition_number_diag: float
    diag_dominant_row_fraction: float


def _cond_inf(matrix) -> float:
    pinv = np.linalg.pinv(matrix, rcond=1e-10)
    norm = np.abs(matrix).sum(axis=1).max()
    norm_inv = np.abs(pinv).sum(axis=1).max()
    return float(norm * norm_inv)


def covariance_diagnostics(features) -> CovarianceDiagnostics:
    """Conditioning report for the empirical covariance of a feature matrix.

    kappa = ||pinv(Sigma)||_inf * ||Sigma||_inf for the full covariance and
    for its diagonal restriction, plus the fraction of rows whose diagonal
    magnitude is at least the sum of the off-diagonal magnitudes.
    """
    m = as_matrix(features, "features")
    if m.shape[0] < 2:
        raise InsufficientDataError("need at least 2 samples for covariance diagnostics")
    centered = m - m.mean(axis=0)
    cov = centered.T @ centered / m.shape[0]
    diag = np.diag(np.diag(cov))
    abs_cov = np.abs(cov)
    off = abs_cov.sum(axis=1) - np.diag(abs_cov)
    dominant = np.diag(abs_cov) >= off
    return CovarianceDiagnostics(
        condition_number_full=_cond_inf(cov),
        condition_number_diag=_cond_inf(diag),
        diag_dominant_row_fraction=float(dominant.mean()),
    )


def fit_tied_covariance(features, labels, n_classes: int | None = None):
    """Class means plus the tied full covariance pooled over classes.

    Sigma = (1/N) sum_y sum_{i: y_i=y} (f_i - mu_y)(f_i - mu_y)^T. Used by
    the Mahalanobis baseline; rank deficiency is handled downstream by the
    pseudo-inverse in TiedCovariance.
    """
    m = as_matrix(features, "features")
    if n_classes is None:
        n_classes = int(np.max(np.asarray(labels))) + 1
    y = check_labels(labels, n_classes)
    if y.shape[0] != m.shape[0]:
        raise ShapeError("features and labels must have the same number of samples")
    means = np.empty((n_classes, m.shape[1]))
    pooled = np.zeros((m.shape[1], m.shape[1]))
    for c in range(n_classes):
        rows = m[y == c]
        if rows.shape[0] == 0:
            raise FitError(f"class {c} has no samples")
        means[c] = rows.mean(axis=0)
        centered = rows - means[c]
        pooled += centered.T @ centered
    return means, TiedCovariance(pooled / m.shape[0])
