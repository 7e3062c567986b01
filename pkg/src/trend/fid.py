"""Frechet distance between Gaussian fits of two feature sets.

The baseline metric: fit a full mean/covariance Gaussian to each side and
compute ||mu_a - mu_b||^2 + Tr(Ca + Cb - 2*(Ca*Cb)^(1/2)).  The matrix
square root goes through the symmetric product Ca^(1/2) * Cb * Ca^(1/2),
whose trace equals that of (Ca*Cb)^(1/2), so only symmetric
eigendecompositions are needed and the arithmetic stays real.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .feature_io import FeatureMatrix

__all__ = ["CovarianceError", "GaussianStats", "fid", "gaussian_stats"]

# Eigenvalues this far below zero are numerical noise and get clamped;
# anything more negative indicates a data bug, not roundoff.
_PSD_TOLERANCE = 1e-8


class CovarianceError(ValueError):
    """Covariance is too far from positive semidefinite to repair."""


@dataclass(frozen=True)
class GaussianStats:
    """Sample mean and covariance (n-1 denominator) of one feature set."""

    mean: np.ndarray
    cov: np.ndarray
    n: int

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        if mean.ndim != 1 or cov.shape != (mean.size, mean.size):
            raise ValueError(f"inconsistent shapes: mean {mean.shape}, cov {cov.shape}")
        if not np.allclose(cov, cov.T, atol=1e-10, rtol=0.0):
            raise ValueError("covariance is not symmetric within 1e-10")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def d(self) -> int:
        return self.mean.size


def gaussian_stats(features) -> GaussianStats:
    """Sample mean and covariance of a feature matrix (at least 2 rows)."""
    if isinstance(features, FeatureMatrix):
        arr = features.values
    else:
        arr = np.asarray(features)
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("features must be a 2-D matrix")
    n = arr.shape[0]
    if n < 2:
        raise ValueError(f"covariance needs at least 2 samples, got {n}")
    mean = arr.mean(axis=0)
    cov = np.atleast_2d(np.cov(arr, rowvar=False, ddof=1))
    return GaussianStats(mean, cov, n)


def _repaired(eigenvalues: np.ndarray, label: str) -> np.ndarray:
    low = float(eigenvalues.min())
    if low < -_PSD_TOLERANCE:
        raise CovarianceError(
            f"{label} has eigenvalue {low:.3e} below the -{_PSD_TOLERANCE:g} repair threshold"
        )
    return np.clip(eigenvalues, 0.0, None)


def fid(a: GaussianStats, b: GaussianStats, *, ridge: float = 0.0) -> float:
    """Frechet distance between two Gaussian fits.

    ridge adds ridge*I to both covariances before the square root, for
    near-singular small-sample cases; default off, matching common
    practice.
    """
    if a.d != b.d:
        raise ValueError(f"dimension mismatch: {a.d} vs {b.d}")
    ca, cb = a.cov, b.cov
    if ridge:
        bump = ridge * np.eye(a.d)
        ca = ca + bump
        cb = cb + bump
    w_a, vec_a = np.linalg.eigh(ca)
    w_a = _repaired(w_a, "first covariance")
    root_a = (vec_a * np.sqrt(w_a)) @ vec_a.T
    product = root_a @ cb @ root_a
    product = 0.5 * (product + product.T)
    w_m = _repaired(np.linalg.eigvalsh(product), "covariance product")
    trace_sqrt = float(np.sum(np.sqrt(w_m)))
    delta = a.mean - b.mean
    value = float(delta @ delta + np.trace(ca) + np.trace(cb) - 2.0 * trace_sqrt)
    return max(value, 0.0)
