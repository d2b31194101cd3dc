"""Input validation helpers.

All public entry points funnel array arguments through these, so error
behaviour (finite checks, shape checks, simplex checks) is uniform.
"""

import numpy as np

from .exceptions import DomainError, ShapeError

SIMPLEX_ATOL = 1e-9


def as_float_array(x, name: str, ndim: int | None = None) -> np.ndarray:
    """Convert to a float64 array, requiring finite entries."""
    arr = np.asarray(x, dtype=np.float64)
    if ndim is not None and arr.ndim != ndim:
        raise ShapeError(f"{name}: expected {ndim}-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name}: entries must be finite")
    return arr


def as_vector(x, name: str) -> np.ndarray:
    return as_float_array(x, name, ndim=1)


def as_matrix(x, name: str) -> np.ndarray:
    return as_float_array(x, name, ndim=2)


def as_sample_matrix(x, name: str) -> np.ndarray:
    """Accept one sample (1-d) or a batch (2-d); return (matrix, was_single)."""
    arr = as_float_array(x, name)
    if arr.ndim == 1:
        return arr[None, :], True
    if arr.ndim == 2:
        return arr, False
    raise ShapeError(f"{name}: expected 1-d or 2-d array, got shape {arr.shape}")


def check_positive_scalar(value, name: str) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0.0:
        raise DomainError(f"{name} must be a positive finite number, got {value}")
    return value


def check_nonnegative_scalar(value, name: str) -> float:
    value = float(value)
    if not np.isfinite(value) or value < 0.0:
        raise DomainError(f"{name} must be a non-negative finite number, got {value}")
    return value


def check_prob_vectors(p, name: str) -> np.ndarray:
    """Validate points on the probability simplex along the last axis."""
    arr = as_float_array(p, name)
    if arr.shape[-1] < 2:
        raise ShapeError(f"{name}: need at least 2 categories, got {arr.shape[-1]}")
    if np.any(arr < -SIMPLEX_ATOL) or np.any(arr > 1.0 + SIMPLEX_ATOL):
        raise DomainError(f"{name}: entries must lie in [0, 1]")
    sums = arr.sum(axis=-1)
    if np.any(np.abs(sums - 1.0) > SIMPLEX_ATOL):
        raise DomainError(f"{name}: entries must sum to 1 within {SIMPLEX_ATOL}")
    return np.clip(arr, 0.0, 1.0)


def check_sigma(sigma, name: str) -> np.ndarray:
    arr = np.asarray(sigma, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name}: entries must be finite")
    if np.any(arr <= 0.0):
        raise DomainError(f"{name}: standard deviations must be strictly positive")
    return arr


def check_labels(y, n_classes: int, name: str = "labels") -> np.ndarray:
    arr = np.asarray(y)
    if arr.ndim != 1:
        raise ShapeError(f"{name}: expected 1-d array, got shape {arr.shape}")
    if arr.size == 0:
        raise ShapeError(f"{name}: must not be empty")
    if not np.issubdtype(arr.dtype, np.integer):
        rounded = np.asarray(arr, dtype=np.int64)
        if not np.array_equal(rounded, arr):
            raise DomainError(f"{name}: class indices must be integers")
        arr = rounded
    arr = arr.astype(np.int64)
    if arr.min() < 0 or arr.max() >= n_classes:
        raise DomainError(f"{name}: class indices must lie in [0, {n_classes})")
    return arr
