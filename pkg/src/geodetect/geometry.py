"""Closed-form statistical distances.

Fisher-Rao geodesic distances on the softmax probability simplex and on the
manifolds of univariate / diagonal-covariance Gaussians, plus KL divergence
and Mahalanobis distance. All functions are pure and broadcast over leading
axes, so they are safe to call from parallel workers.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError, ShapeError
from .validation import (
    as_float_array,
    check_positive_scalar,
    check_prob_vectors,
    check_sigma,
)

KL_PROB_FLOOR = 1e-12
PINV_RCOND = 1e-10
_SQRT2 = np.sqrt(2.0)


def softmax(logits, temperature: float = 1.0) -> np.ndarray:
    """Temperature-scaled softmax along the last axis.

    Computed with max subtraction so logits of magnitude up to ~1e4 do not
    overflow. temperature > 1 flattens the distribution, < 1 sharpens it.
    """
    t = check_positive_scalar(temperature, "temperature")
    z = as_float_array(logits, "logits")
    # subtract the max before dividing: the shifted exponent is never
    # positive, so no temperature choice can overflow
    z = (z - z.max(axis=-1, keepdims=True)) / t
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _check_pair(p, q, name_p: str, name_q: str):
    p = check_prob_vectors(p, name_p)
    q = check_prob_vectors(q, name_q)
    if p.shape[-1] != q.shape[-1]:
        raise ShapeError(
            f"{name_p} and {name_q} must have the same number of categories, "
            f"got {p.shape[-1]} and {q.shape[-1]}"
        )
    return p, q


def fr_softmax(p, q) -> np.ndarray | float:
    """Fisher-Rao distance between categorical distributions.

        d(p, q) = 2 arccos( sum_y sqrt(p_y q_y) )

    The simplex maps isometrically onto the positive orthant of a radius-2
    sphere via square roots, so this is an arc length in [0, pi]. The
    Bhattacharyya coefficient is clamped to [-1, 1] before arccos; rounding
    can otherwise push it past 1 at identical inputs and produce NaN.
    """
    p, q = _check_pair(p, q, "p", "q")
    bc = np.clip(np.sqrt(p * q).sum(axis=-1), -1.0, 1.0)
    out = 2.0 * np.arccos(bc)
    return float(out) if out.ndim == 0 else out


def fr_gauss_1d(mu1, sigma1, mu2, sigma2) -> np.ndarray | float:
    """Fisher-Rao distance between univariate Gaussians (sigma = std dev).

    The hyperbolic half-plane closed form is evaluated in a cancellation-free
    arrangement: with a = (mu1/sqrt2, sigma1), b = (mu2/sqrt2, sigma2) and
    b' the reflection of b, the textbook ratio (|a-b'|+|a-b|)/(|a-b'|-|a-b|)
    equals (|a-b'|+|a-b|)^2 / (4 sigma1 sigma2), which avoids the subtractive
    denominator. The ratio is floored at 1 so identical inputs give exactly 0.
    """
    s1 = check_sigma(sigma1, "sigma1")
    s2 = check_sigma(sigma2, "sigma2")
    m1 = as_float_array(mu1, "mu1")
    m2 = as_float_array(mu2, "mu2")
    dm = (m1 - m2) / _SQRT2
    d_plus = np.hypot(dm, s1 + s2)
    d_minus = np.hypot(dm, s1 - s2)
    ratio = np.maximum((d_plus + d_minus) / (2.0 * np.sqrt(s1 * s2)), 1.0)
    out = 2.0 * _SQRT2 * np.log(ratio)
    return float(out) if out.ndim == 0 else out


def fr_gauss_diag(mu1, sigma1, mu2, sigma2) -> np.ndarray | float:
    """Fisher-Rao distance between diagonal-covariance Gaussians.

    Root sum of squares of the per-coordinate univariate distances (the
    diagonal submanifold metric is a product metric). Inputs are (..., k)
    mean/sigma arrays; the last axis is reduced.
    """
    m1 = as_float_array(mu1, "mu1")
    m2 = as_float_array(mu2, "mu2")
    s1 = np.asarray(sigma1, dtype=np.float64)
    s2 = np.asarray(sigma2, dtype=np.float64)
    if m1.shape[-1] != m2.shape[-1]:
        raise ShapeError(
            f"mean vectors must have the same length, got {m1.shape[-1]} and {m2.shape[-1]}"
        )
    try:
        s1b = np.broadcast_to(s1, m1.shape)
        s2b = np.broadcast_to(s2, m2.shape)
    except ValueError as exc:
        raise ShapeError(f"sigma shapes do not match the means: {exc}") from exc
    rho = fr_gauss_1d(m1, s1b, m2, s2b)
    out = np.sqrt(np.sum(np.square(rho), axis=-1))
    return float(out) if np.ndim(out) == 0 else out


def kl_softmax(p, q) -> np.ndarray | float:
    """KL divergence sum_y p_y log(p_y / q_y) between categoricals.

    q is floored at 1e-12 before the log; 0 * log 0 is taken as 0. The
    result is clipped at 0 so flooring noise cannot produce tiny negatives.
    """
    p, q = _check_pair(p, q, "p", "q")
    q_safe = np.maximum(q, KL_PROB_FLOOR)
    terms = np.where(p > 0.0, p * (np.log(np.maximum(p, KL_PROB_FLOOR)) - np.log(q_safe)), 0.0)
    out = np.maximum(terms.sum(axis=-1), 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class TiedCovariance:
    """A covariance matrix shared across classes, with its pseudo-inverse.

    The pseudo-inverse is computed by SVD with singular values below
    1e-10 relative to the largest treated as zero, so rank-deficient
    covariances (duplicated coordinates, few samples) stay usable.
    """

    matrix: np.ndarray
    pseudo_inverse: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        m = as_float_array(self.matrix, "covariance matrix")
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ShapeError(f"covariance matrix must be square, got shape {m.shape}")
        scale = max(1.0, float(np.abs(m).max()))
        if np.abs(m - m.T).max() > 1e-9 * scale:
            raise DomainError("covariance matrix must be symmetric within 1e-9")
        m = 0.5 * (m + m.T)
        object.__setattr__(self, "matrix", m)
        if self.pseudo_inverse is None:
            object.__setattr__(self, "pseudo_inverse", np.linalg.pinv(m, rcond=PINV_RCOND))
        else:
            pinv = as_float_array(self.pseudo_inverse, "pseudo_inverse")
            if pinv.shape != m.shape:
                raise ShapeError("pseudo_inverse shape must match the covariance matrix")
            recon = m @ pinv @ m
            if np.abs(recon - m).max() > 1e-6 * scale:
                raise DomainError("pseudo_inverse fails sigma * pinv * sigma = sigma within 1e-6")
            object.__setattr__(self, "pseudo_inverse", pinv)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def mahalanobis(x, mu, cov: TiedCovariance) -> np.ndarray | float:
    """Mahalanobis distance sqrt((x-mu)^T pinv(Sigma) (x-mu)).

    Coincides with the Fisher-Rao distance on the constant-covariance
    Gaussian submanifold. Broadcasts over leading axes of x and mu.
    """
    if not isinstance(cov, TiedCovariance):
        cov = TiedCovariance(np.asarray(cov, dtype=np.float64))
    xv = as_float_array(x, "x")
    mv = as_float_array(mu, "mu")
    if xv.shape[-1] != cov.dim or mv.shape[-1] != cov.dim:
        raise ShapeError(
            f"x and mu must have length {cov.dim}, got {xv.shape[-1]} and {mv.shape[-1]}"
        )
    diff = xv - mv
    quad = np.einsum("...i,ij,...j->...", diff, cov.pseudo_inverse, diff)
    out = np.sqrt(np.maximum(quad, 0.0))
    return float(out) if np.ndim(out) == 0 else out
