"""Minimal differentiable feed-forward classifier.

A small fully-connected network with smooth activations standing in for an
external pre-trained model: it supplies logits, hidden-layer features,
analytic input gradients of the geodesic logits score (for input
pre-processing), and single-step adversarial examples. Everything is plain
numpy with hand-written backpropagation so gradients can be checked against
finite differences.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .exceptions import DomainError, FitError, ShapeError
from .geometry import softmax
from .stats import CentroidSet
from .validation import (
    as_float_array,
    as_sample_matrix,
    check_labels,
    check_nonnegative_scalar,
    check_positive_scalar,
)

ACTIVATIONS = ("tanh", "softplus")


def _act(z, kind):
    if kind == "tanh":
        return np.tanh(z)
    return np.logaddexp(0.0, z)  # softplus


def _act_deriv(z, kind):
    if kind == "tanh":
        t = np.tanh(z)
        return 1.0 - t * t
    return 1.0 / (1.0 + np.exp(-z))  # sigmoid


@dataclass(frozen=True)
class MlpParams:
    """Weights and biases of a fully-connected network.

    layer_sizes is (input_dim, hidden..., n_classes); weights[i] has shape
    (layer_sizes[i], layer_sizes[i+1]). The final layer is linear; hidden
    layers use the configured smooth activation.
    """

    layer_sizes: tuple
    weights: tuple
    biases: tuple
    activation: str = "tanh"

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise ShapeError(f"layer_sizes must list at least input and output dims, got {sizes}")
        if self.activation not in ACTIVATIONS:
            raise DomainError(f"activation must be one of {ACTIVATIONS}")
        ws = tuple(as_float_array(w, f"weights[{i}]", ndim=2) for i, w in enumerate(self.weights))
        bs = tuple(as_float_array(b, f"biases[{i}]", ndim=1) for i, b in enumerate(self.biases))
        if len(ws) != len(sizes) - 1 or len(bs) != len(sizes) - 1:
            raise ShapeError("need one weight matrix and bias per layer transition")
        for i, (w, b) in enumerate(zip(ws, bs)):
            if w.shape != (sizes[i], sizes[i + 1]) or b.shape != (sizes[i + 1],):
                raise ShapeError(
                    f"layer {i}: expected weights {(sizes[i], sizes[i + 1])} and "
                    f"biases ({sizes[i + 1]},), got {w.shape} and {b.shape}"
                )
        object.__setattr__(self, "layer_sizes", sizes)
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "biases", bs)

    @property
    def input_dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_classes(self) -> int:
        return self.layer_sizes[-1]


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 200
    batch_size: int = 32
    seed: int = 0
    l2: float = 0.0

    def __post_init__(self):
        check_positive_scalar(self.learning_rate, "learning_rate")
        if int(self.epochs) < 0:
            raise FitError("epochs must be non-negative")
        if int(self.batch_size) < 1:
            raise FitError("batch_size must be positive")
        check_nonnegative_scalar(self.l2, "l2")


def init_params(layer_sizes, activation: str = "tanh", seed: int = 0) -> MlpParams:
    """Seeded initialization: normal weights scaled by 1/sqrt(fan_in)."""
    rng = np.random.default_rng(seed)
    sizes = tuple(int(s) for s in layer_sizes)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(rng.normal(0.0, 1.0, size=(fan_in, fan_out)) / np.sqrt(fan_in))
        biases.append(np.zeros(fan_out))
    return MlpParams(sizes, tuple(weights), tuple(biases), activation)


def _forward_cached(params: MlpParams, x: np.ndarray):
    """Forward pass keeping pre-activations and activations for backprop."""
    pre, hidden = [], []
    h = x
    n_layers = len(params.weights)
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = h @ w + b
        pre.append(z)
        if i < n_layers - 1:
            h = _act(z, params.activation)
            hidden.append(h)
        else:
            h = z
    return h, pre, hidden


def forward(params: MlpParams, x, return_hidden: bool = False):
    """Logits for one sample (1-d) or a batch (2-d).

    With return_hidden=True also returns the list of post-activation hidden
    layers, which serve as the per-layer features consumed by the feature
    statistics and scorers.
    """
    xm, single = as_sample_matrix(x, "x")
    if xm.shape[1] != params.input_dim:
        raise ShapeError(f"x must have length {params.input_dim}, got {xm.shape[1]}")
    logits, _, hidden = _forward_cached(params, xm)
    if single:
        logits = logits[0]
        hidden = [h[0] for h in hidden]
    return (logits, hidden) if return_hidden else logits


def ce_loss(params: MlpParams, x, y, l2: float = 0.0) -> float:
    """Mean cross-entropy plus (l2/2)*sum of squared weights."""
    xm, _ = as_sample_matrix(x, "x")
    labels = check_labels(y, params.n_classes)
    logits = forward(params, xm)
    z = logits - logits.max(axis=1, keepdims=True)
    log_probs = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    nll = -log_probs[np.arange(xm.shape[0]), labels].mean()
    reg = 0.5 * l2 * sum(float(np.sum(w * w)) for w in params.weights)
    return float(nll + reg)


def ce_param_grads(params: MlpParams, x, y, l2: float = 0.0):
    """Analytic gradients of ce_loss in every weight matrix and bias."""
    xm, _ = as_sample_matrix(x, "x")
    labels = check_labels(y, params.n_classes)
    n = xm.shape[0]
    logits, pre, hidden = _forward_cached(params, xm)
    probs = softmax(logits)
    delta = probs.copy()
    delta[np.arange(n), labels] -= 1.0
    delta /= n
    acts = [xm] + hidden
    grads_w, grads_b = [], []
    for i in range(len(params.weights) - 1, -1, -1):
        grads_w.append(acts[i].T @ delta + l2 * params.weights[i])
        grads_b.append(delta.sum(axis=0))
        if i > 0:
            delta = (delta @ params.weights[i].T) * _act_deriv(pre[i - 1], params.activation)
    return grads_w[::-1], grads_b[::-1]


def _backprop_input(params: MlpParams, pre, dlogits) -> np.ndarray:
    """Propagate a d(score)/d(logits) matrix back to the input."""
    delta = dlogits
    for i in range(len(params.weights) - 1, -1, -1):
        delta = delta @ params.weights[i].T
        if i > 0:
            delta = delta * _act_deriv(pre[i - 1], params.activation)
    return delta


def train(x, y, hidden_sizes=(16,), activation: str = "tanh",
          config: TrainConfig | None = None) -> MlpParams:
    """Mini-batch gradient descent on cross-entropy, deterministic per seed.

    Epochs that increase the full-data loss are reverted and the working
    step halved, so the final loss never exceeds the initial one. With
    epochs=0 the seeded initialization is returned unchanged.
    """
    cfg = config or TrainConfig()
    xm, _ = as_sample_matrix(x, "x")
    labels = np.asarray(y)
    if labels.ndim != 1 or labels.shape[0] != xm.shape[0]:
        raise ShapeError("x and y must have the same number of samples")
    n_classes = int(labels.max()) + 1 if labels.size else 0
    if n_classes < 2 or len(np.unique(labels)) < 2:
        raise FitError("training data must contain at least 2 classes")
    labels = check_labels(labels, n_classes, "y")

    sizes = (xm.shape[1], *tuple(int(h) for h in hidden_sizes), n_classes)
    params = init_params(sizes, activation, cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    best = ce_loss(params, xm, labels, cfg.l2)
    best_params = params
    step = cfg.learning_rate
    for _ in range(int(cfg.epochs)):
        order = rng.permutation(xm.shape[0])
        weights = [w.copy() for w in params.weights]
        biases = [b.copy() for b in params.biases]
        current = MlpParams(sizes, tuple(weights), tuple(biases), activation)
        for start in range(0, xm.shape[0], int(cfg.batch_size)):
            idx = order[start:start + int(cfg.batch_size)]
            gw, gb = ce_param_grads(current, xm[idx], labels[idx], cfg.l2)
            weights = [w - step * g for w, g in zip(weights, gw)]
            biases = [b - step * g for b, g in zip(biases, gb)]
            current = MlpParams(sizes, tuple(weights), tuple(biases), activation)
        loss = ce_loss(current, xm, labels, cfg.l2)
        if np.isfinite(loss) and loss <= best:
            best, best_params = loss, current
            step = min(step * 1.1, cfg.learning_rate)
        else:
            step *= 0.5
        params = best_params
    return best_params


def _fr0_dlogits(logits, centroids: CentroidSet, temperature, aggregation):
    """d(FR0)/d(logits) for a batch; min mode differentiates the argmin term."""
    probs = softmax(logits, temperature)
    cent_probs = softmax(centroids.centroids, temperature)
    s = np.clip(np.sqrt(probs[:, None, :] * cent_probs[None, :, :]).sum(axis=2), -1.0, 1.0)
    denom = np.sqrt(np.maximum(1.0 - s * s, 0.0))
    inv = np.zeros_like(s)
    np.divide(1.0, denom, out=inv, where=denom > 0.0)  # 0 at the clamp boundary
    inner = np.sqrt(probs[:, None, :] * cent_probs[None, :, :]) - probs[:, None, :] * s[:, :, None]
    per_class = -inv[:, :, None] * inner / temperature  # (n, C, C): d d_y / d logit_j
    if aggregation == "sum":
        return per_class.sum(axis=1)
    pick = np.argmin(2.0 * np.arccos(s), axis=1)
    return per_class[np.arange(logits.shape[0]), pick, :]


def grad_input_fr0(params: MlpParams, x, centroids: CentroidSet,
                   temperature: float = 1.0, aggregation: str = "sum") -> np.ndarray:
    """Input gradient of the geodesic logits score, by analytic backprop."""
    if aggregation not in ("sum", "min"):
        raise DomainError(f"aggregation must be 'sum' or 'min', got {aggregation!r}")
    check_positive_scalar(temperature, "temperature")
    xm, single = as_sample_matrix(x, "x")
    if xm.shape[1] != params.input_dim:
        raise ShapeError(f"x must have length {params.input_dim}, got {xm.shape[1]}")
    if centroids.n_classes != params.n_classes:
        raise ShapeError("centroid count must match the network's class count")
    logits, pre, _ = _forward_cached(params, xm)
    dlogits = _fr0_dlogits(logits, centroids, temperature, aggregation)
    grad = _backprop_input(params, pre, dlogits)
    return grad[0] if single else grad


def preprocess_input(x, eps: float, grad) -> np.ndarray:
    """Shift the input by eps along the sign of the score gradient.

    sign(0) is 0, so coordinates with zero gradient are left unchanged.
    """
    eps = check_nonnegative_scalar(eps, "eps")
    xv = as_float_array(x, "x")
    gv = as_float_array(grad, "grad")
    if xv.shape != gv.shape:
        raise ShapeError(f"x and grad shapes differ: {xv.shape} vs {gv.shape}")
    return xv + eps * np.sign(gv)


def fgsm_generate(params: MlpParams, x, y, eps_adv: float) -> np.ndarray:
    """Single-step adversarial example along the cross-entropy gradient sign.

    No clipping is applied; feature-space inputs here are unbounded.
    """
    eps_adv = check_nonnegative_scalar(eps_adv, "eps_adv")
    xm, single = as_sample_matrix(x, "x")
    if xm.shape[1] != params.input_dim:
        raise ShapeError(f"x must have length {params.input_dim}, got {xm.shape[1]}")
    labels = check_labels(np.atleast_1d(y), params.n_classes, "y")
    if labels.shape[0] != xm.shape[0]:
        raise ShapeError("x and y must have the same number of samples")
    logits, pre, _ = _forward_cached(params, xm)
    probs = softmax(logits)
    delta = probs.copy()
    delta[np.arange(xm.shape[0]), labels] -= 1.0  # d(per-sample CE)/d(logits)
    grad = _backprop_input(params, pre, delta)
    adv = xm + eps_adv * np.sign(grad)
    return adv[0] if single else adv


class MlpClassifier(BaseEstimator, ClassifierMixin):
    """sklearn-style front end over the functional network.

    fit/predict/predict_proba/decision_function follow the usual estimator
    contract; hidden_features exposes the per-layer activations used as
    features by the detector pipeline.
    """

    def __init__(self, hidden_sizes=(16,), activation="tanh", learning_rate=0.1,
                 epochs=200, batch_size=32, seed=0, l2=0.0):
        self.hidden_sizes = hidden_sizes
        self.activation = activation
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.seed = seed
        self.l2 = l2

    def fit(self, X, y):
        cfg = TrainConfig(self.learning_rate, self.epochs, self.batch_size,
                          self.seed, self.l2)
        self.params_ = train(X, y, self.hidden_sizes, self.activation, cfg)
        self.classes_ = np.arange(self.params_.n_classes)
        self.n_features_in_ = self.params_.input_dim
        return self

    def decision_function(self, X):
        self._check_fitted()
        return forward(self.params_, X)

    def predict_proba(self, X):
        return softmax(self.decision_function(X))

    def predict(self, X):
        return np.argmax(self.decision_function(X), axis=-1)

    def hidden_features(self, X):
        self._check_fitted()
        _, hidden = forward(self.params_, X, return_hidden=True)
        return hidden

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise FitError("MlpClassifier is not fitted; call fit first")
