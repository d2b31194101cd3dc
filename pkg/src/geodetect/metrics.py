"""Detector calibration and detection metrics.

Scores arrive with an orientation ("higher_is_in" / "lower_is_in") and are
normalized internally so that higher always means in-distribution. The
detector flags a sample as out-of-distribution when its normalized score is
at or below the calibrated threshold (boundary inclusive).
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import CalibrationError, ConfigError, DomainError, ShapeError
from .scoring import HIGHER_IS_IN, ORIENTATIONS
from .validation import as_float_array, check_positive_scalar

MIN_CALIBRATION_SAMPLES = 20

DEFAULT_TEMPERATURES = (1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0)
DEFAULT_EPSILONS = tuple(np.linspace(0.0, 0.002, 21))


def normalize_scores(scores, orientation: str) -> np.ndarray:
    """Map scores to the higher_is_in convention (negate lower_is_in)."""
    if orientation not in ORIENTATIONS:
        raise DomainError(f"orientation must be one of {ORIENTATIONS}")
    arr = as_float_array(scores, "scores")
    return arr if orientation == HIGHER_IS_IN else -arr


def calibrate_threshold(in_scores, orientation: str = HIGHER_IS_IN,
                        target_tpr: float = 0.95) -> float:
    """Largest threshold retaining at least target_tpr of the in-dist scores.

    After normalization, delta is the largest score value with
    fraction(in_scores >= delta) >= target_tpr; duplicates are handled by
    exact counting. The returned delta lives on the normalized scale.
    """
    s = normalize_scores(in_scores, orientation)
    if s.ndim != 1 or s.shape[0] < MIN_CALIBRATION_SAMPLES:
        raise CalibrationError(
            f"need at least {MIN_CALIBRATION_SAMPLES} in-distribution scores, got {s.size}"
        )
    if not 0.0 < target_tpr <= 1.0:
        raise DomainError(f"target_tpr must lie in (0, 1], got {target_tpr}")
    n = s.shape[0]
    # k-th largest value with k = ceil(target_tpr * n) keeps >= target_tpr
    k = int(np.ceil(target_tpr * n - 1e-12))
    return float(np.sort(s)[n - k])


@dataclass(frozen=True)
class DetectorConfig:
    """Calibrated threshold detector settings. delta is on the normalized
    (higher_is_in) scale."""

    delta: float
    temperature: float = 1.0
    eps: float = 0.0
    orientation: str = HIGHER_IS_IN

    def __post_init__(self):
        check_positive_scalar(self.temperature, "temperature")
        if self.eps < 0.0:
            raise DomainError("eps must be non-negative")
        if self.orientation not in ORIENTATIONS:
            raise DomainError(f"orientation must be one of {ORIENTATIONS}")


def detect(score, config: DetectorConfig):
    """1 = out-of-distribution, 0 = in-distribution.

    A sample is flagged out when its normalized score is <= delta; the
    boundary value itself is flagged out.
    """
    s = normalize_scores(score, config.orientation)
    out = (s <= config.delta).astype(np.int64)
    return int(out) if np.ndim(out) == 0 else out


def _check_two_sets(in_scores, out_scores, orientation):
    s_in = normalize_scores(in_scores, orientation)
    s_out = normalize_scores(out_scores, orientation)
    if s_in.size == 0 or s_out.size == 0:
        raise ShapeError("both score sets must be non-empty")
    return s_in.ravel(), s_out.ravel()


def tnr_at_tpr(in_scores, out_scores, orientation: str = HIGHER_IS_IN,
               tpr: float = 0.95) -> float:
    """Fraction of outliers flagged out at the threshold calibrated to keep
    tpr of the in-distribution scores."""
    s_in, s_out = _check_two_sets(in_scores, out_scores, orientation)
    delta = calibrate_threshold(s_in, HIGHER_IS_IN, tpr)
    return float(np.mean(s_out <= delta))


def auroc(in_scores, out_scores, orientation: str = HIGHER_IS_IN) -> float:
    """Area under the ROC curve as the rank statistic
    P(in > out) + 0.5 P(in = out), which equals trapezoidal integration."""
    s_in, s_out = _check_two_sets(in_scores, out_scores, orientation)
    n_in, n_out = s_in.shape[0], s_out.shape[0]
    combined = np.concatenate([s_in, s_out])
    order = np.argsort(combined, kind="mergesort")
    ranks = np.empty(combined.shape[0])
    sorted_vals = combined[order]
    # midranks over tie groups
    i = 0
    base = np.arange(1, combined.shape[0] + 1, dtype=np.float64)
    while i < sorted_vals.shape[0]:
        j = i
        while j + 1 < sorted_vals.shape[0] and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        base[i:j + 1] = 0.5 * (i + j + 2)
        i = j + 1
    ranks[order] = base
    u = ranks[:n_in].sum() - n_in * (n_in + 1) / 2.0
    return float(u / (n_in * n_out))


def aupr(in_scores, out_scores, orientation: str = HIGHER_IS_IN) -> float:
    """Area under precision-recall with in-distribution as the positive
    class, by step-wise summation over the sorted unique score values.

    The curve endpoint convention is precision = 1 at recall = 0 (a zero
    width segment under step summation).
    """
    s_in, s_out = _check_two_sets(in_scores, out_scores, orientation)
    n_in = s_in.shape[0]
    thresholds = np.unique(np.concatenate([s_in, s_out]))[::-1]
    # predicted positive: score >= threshold
    tp = n_in - np.searchsorted(np.sort(s_in), thresholds, side="left")
    fp = s_out.shape[0] - np.searchsorted(np.sort(s_out), thresholds, side="left")
    recall = tp / n_in
    precision = tp / np.maximum(tp + fp, 1)
    prev_recall = np.concatenate([[0.0], recall[:-1]])
    return float(np.sum((recall - prev_recall) * precision))


@dataclass(frozen=True)
class EvalReport:
    tnr_at_tpr95: float
    auroc: float
    aupr: float
    delta: float
    n_in: int
    n_out: int

    def __post_init__(self):
        for name in ("tnr_at_tpr95", "auroc", "aupr"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {v}")
        if not np.isfinite(self.delta):
            raise DomainError("delta must be finite")


def evaluate(in_scores, out_scores, orientation: str = HIGHER_IS_IN,
             tpr: float = 0.95) -> EvalReport:
    """All detection metrics for one (in, out) score pair."""
    s_in, s_out = _check_two_sets(in_scores, out_scores, orientation)
    delta = calibrate_threshold(s_in, HIGHER_IS_IN, tpr)
    return EvalReport(
        tnr_at_tpr95=float(np.mean(s_out <= delta)),
        auroc=auroc(s_in, s_out),
        aupr=aupr(s_in, s_out),
        delta=delta,
        n_in=int(s_in.shape[0]),
        n_out=int(s_out.shape[0]),
    )


@dataclass(frozen=True)
class TuneGrid:
    """Hyperparameter grid: exhaustive search maximizing TNR at TPR-95 on
    validation data. The epsilon default is 21 equally spaced values in
    [0, 0.002]; the temperature default is a fixed log-spaced ladder over
    [1, 1000]."""

    temperatures: tuple = DEFAULT_TEMPERATURES
    epsilons: tuple = DEFAULT_EPSILONS

    def __post_init__(self):
        temps = tuple(float(t) for t in self.temperatures)
        epss = tuple(float(e) for e in self.epsilons)
        if not temps or not epss:
            raise ConfigError("grid lists must be non-empty")
        if any(t <= 0 for t in temps):
            raise ConfigError("temperatures must be positive")
        if any(e < 0 for e in epss):
            raise ConfigError("epsilons must be non-negative")
        object.__setattr__(self, "temperatures", temps)
        object.__setattr__(self, "epsilons", epss)


def grid_search(grid: TuneGrid, score_fn):
    """Exhaustively evaluate score_fn(temperature, eps) -> (in_scores,
    out_scores, orientation) and return the (temperature, eps) maximizing
    TNR at TPR-95. Exact ties prefer smaller eps, then smaller temperature.
    """
    best = None
    for temperature in grid.temperatures:
        for eps in grid.epsilons:
            s_in, s_out, orientation = score_fn(temperature, eps)
            objective = tnr_at_tpr(s_in, s_out, orientation, 0.95)
            key = (objective, -eps, -temperature)
            if best is None or key > best[0]:
                best = (key, (temperature, eps))
    return best[1]
