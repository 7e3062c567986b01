"""Per-dimension maximum-likelihood fitting of the density families.

Each feature dimension is fitted independently.  For the truncated kind
the truncation points are fixed at zero and the dimension's maximum
value, exactly-zero values (the truncated-away mass) are omitted before
fitting, and (mu, sigma, beta) maximize the log-likelihood

    n*log(beta) - n*log(sigma) - n*log(G) - sum_j (|x_j - mu|/sigma)**beta

via bounded quasi-Newton ascent started from (sample mean, sample
standard deviation, 2).  The non-truncated generalized normal drops the
truncation, and the normal kind is the closed-form Gaussian MLE.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .feature_io import FeatureMatrix
from .tgn import DistributionKind, TgnParams, _log_density, truncation_normalizer

__all__ = [
    "DimensionFit",
    "FitConfig",
    "FitStatus",
    "FittedModel",
    "ModelFormatError",
    "NonFiniteDataError",
    "fit_dimension",
    "fit_model",
    "load_model",
    "log_likelihood",
    "log_likelihoods",
    "save_model",
]

_PENALTY = 1e300
_DEGENERATE_VARIANCE = 1e-12


class NonFiniteDataError(ValueError):
    """Input contains NaN or infinite values."""


class ModelFormatError(ValueError):
    """Model file does not follow the documented text format."""


class FitStatus(Enum):
    OK = "ok"
    FALLBACK_DEGENERATE = "degenerate"
    MAX_ITERS_REACHED = "maxiters"


@dataclass(frozen=True)
class FitConfig:
    """Knobs for the per-dimension optimizer and its guard rails."""

    kind: DistributionKind = DistributionKind.TRUNCATED_GENERALIZED_NORMAL
    grad_step: float = 1e-6
    conv_tol: float = 1e-6
    max_iters: int = 500
    min_samples: int = 32
    beta_bounds: tuple[float, float] = (0.05, 20.0)
    sigma_floor: float = 1e-8

    def __post_init__(self):
        if not (self.grad_step > 0 and self.conv_tol > 0 and self.sigma_floor > 0):
            raise ValueError("grad_step, conv_tol and sigma_floor must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be a positive integer")
        if self.min_samples < 8:
            raise ValueError("min_samples must be at least 8")
        lo, hi = self.beta_bounds
        if not (lo > 0 and lo < hi):
            raise ValueError(f"invalid beta bounds {self.beta_bounds}")


@dataclass(frozen=True)
class DimensionFit:
    """Fitted density for one dimension plus fit diagnostics."""

    params: TgnParams
    log_likelihood: float
    n_used: int
    n_zero: int
    converged: bool
    status: FitStatus

    @property
    def degenerate(self) -> bool:
        return self.status is FitStatus.FALLBACK_DEGENERATE


@dataclass(frozen=True)
class FittedModel:
    """Product model: one fitted density per feature dimension."""

    dims: tuple[DimensionFit, ...]
    kind: DistributionKind
    source_tag: str = ""

    @property
    def d(self) -> int:
        return len(self.dims)


def log_likelihood(params: TgnParams, values: np.ndarray) -> float:
    """Log-likelihood of values (all within support) under params."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return 0.0
    return float(np.sum(_log_density(params, arr)))


def _objective(used: np.ndarray, a1: float, a2: float):
    n = used.size

    def nll(theta) -> float:
        mu, sigma, beta = float(theta[0]), float(theta[1]), float(theta[2])
        if sigma <= 0.0 or beta <= 0.0:
            return _PENALTY
        try:
            g = truncation_normalizer(mu, sigma, beta, a1, a2)
        except (ValueError, OverflowError):
            return _PENALTY
        with np.errstate(over="ignore", invalid="ignore"):
            tail = float(np.sum((np.abs(used - mu) / sigma) ** beta))
        value = -(n * (math.log(beta) - math.log(sigma) - math.log(g)) - tail)
        return value if math.isfinite(value) else _PENALTY

    return nll


def _degenerate_fit(arr: np.ndarray, used: np.ndarray, n_zero: int, config: FitConfig) -> DimensionFit:
    # Near-constant or too-small dimension: park a narrow spike at the
    # sample mean so downstream code always sees valid parameters.
    params = TgnParams(float(arr.mean()), config.sigma_floor, 2.0)
    return DimensionFit(
        params=params,
        log_likelihood=log_likelihood(params, used),
        n_used=int(used.size),
        n_zero=int(n_zero),
        converged=False,
        status=FitStatus.FALLBACK_DEGENERATE,
    )


def fit_dimension(values, config: FitConfig) -> DimensionFit:
    """Fit one dimension's values under the configured family.

    Deterministic: identical inputs give identical outputs.  Dimensions
    with fewer than min_samples usable values or vanishing variance are
    returned with FALLBACK_DEGENERATE status instead of raising.
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("values must be a nonempty 1-D sequence")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteDataError("values contain NaN or infinite entries")

    if config.kind is DistributionKind.TRUNCATED_GENERALIZED_NORMAL:
        if np.any(arr < 0.0):
            raise ValueError("truncated fitting expects nonnegative values")
        a1, a2 = 0.0, float(arr.max())
        used = arr[arr > 0.0]
    else:
        a1, a2 = float("-inf"), float("inf")
        used = arr
    n_zero = arr.size - used.size

    mean = float(used.mean()) if used.size else 0.0
    var = float(used.var()) if used.size else 0.0
    if used.size < config.min_samples or var < _DEGENERATE_VARIANCE:
        return _degenerate_fit(arr, used, n_zero, config)
    std = math.sqrt(var)

    if config.kind is DistributionKind.NORMAL:
        params = TgnParams(mean, std * math.sqrt(2.0), 2.0)
        return DimensionFit(params, log_likelihood(params, used),
                            used.size, n_zero, True, FitStatus.OK)

    beta_lo, beta_hi = config.beta_bounds
    nll = _objective(used, a1, a2)

    def clipped(mu0: float, sigma0: float, beta0: float) -> np.ndarray:
        return np.array([mu0, max(sigma0, config.sigma_floor),
                         min(max(beta0, beta_lo), beta_hi)])

    # First start is (sample mean, sample std, 2); the extra starts pair a
    # heavier-tailed shape guess with the scale that reproduces the sample
    # std under that shape, which rescues fits of very peaked data where
    # the Gaussian-shaped start sits in the wrong basin.
    x0 = clipped(mean, std, 2.0)
    starts = [x0]
    for beta0 in (1.0, 0.5):
        scale = math.sqrt(math.gamma(1.0 / beta0) / math.gamma(3.0 / beta0))
        starts.append(clipped(mean, std * scale, beta0))
    f0 = nll(x0)

    options = {
        "maxiter": config.max_iters,
        "ftol": 1e-12,
        "gtol": config.conv_tol,
        "finite_diff_rel_step": config.grad_step,
        "maxls": 60,
    }
    bounds = [(None, None), (config.sigma_floor, None), (beta_lo, beta_hi)]
    best_theta, best_f, best_success = x0, f0, False
    for start in starts:
        result = minimize(nll, start, method="L-BFGS-B", jac="3-point",
                          bounds=bounds, options=options)
        f_res = nll(result.x)
        if np.all(np.isfinite(result.x)) and f_res < best_f and f_res < _PENALTY:
            best_theta, best_f, best_success = result.x, f_res, bool(result.success)

    try:
        params = TgnParams(float(best_theta[0]), float(best_theta[1]), float(best_theta[2]), a1, a2)
        f_hat = best_f
        converged = best_success
    except ValueError:
        params = TgnParams(float(x0[0]), float(x0[1]), float(x0[2]), a1, a2)
        f_hat = f0
        converged = False
    status = FitStatus.OK if converged else FitStatus.MAX_ITERS_REACHED
    return DimensionFit(params, -f_hat, used.size, n_zero, converged, status)


def _coerce_matrix(features) -> tuple[np.ndarray, str]:
    if isinstance(features, FeatureMatrix):
        return features.values, features.tag
    arr = np.asarray(features)
    if arr.ndim != 2:
        raise ValueError("features must be a FeatureMatrix or 2-D array")
    return arr, ""


def fit_model(features, config: FitConfig) -> FittedModel:
    """Fit every dimension independently and assemble in index order."""
    arr, tag = _coerce_matrix(features)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteDataError("feature matrix contains NaN or infinite values")
    n, d = arr.shape
    if n < config.min_samples:
        raise ValueError(f"need at least {config.min_samples} rows, got {n}")
    dims = tuple(fit_dimension(arr[:, i].astype(np.float64), config) for i in range(d))
    return FittedModel(dims, config.kind, tag)


def log_likelihoods(model: FittedModel, features) -> tuple[np.ndarray, int]:
    """Per-dimension log-likelihood sums of features under the model.

    Mirrors the fitting conventions: exact zeros are excluded for the
    truncated kind, and values outside a dimension's truncation interval
    are clamped to the nearest bound (counted and returned) instead of
    contributing -inf.
    """
    arr, _ = _coerce_matrix(features)
    if arr.shape[1] != model.d:
        raise ValueError(f"feature dimensionality {arr.shape[1]} != model dimensionality {model.d}")
    truncated = model.kind is DistributionKind.TRUNCATED_GENERALIZED_NORMAL
    per_dim = np.empty(model.d)
    n_clamped = 0
    for i, dim in enumerate(model.dims):
        col = arr[:, i].astype(np.float64)
        if truncated:
            col = col[col != 0.0]
        p = dim.params
        outside = int(np.count_nonzero(col < p.a1) + np.count_nonzero(col > p.a2))
        if outside:
            n_clamped += outside
            col = np.clip(col, p.a1, p.a2)
        per_dim[i] = log_likelihood(p, col)
    return per_dim, n_clamped


# --- model file format ------------------------------------------------

_MODEL_MAGIC = "# tgn-model v1"
_COLUMNS = "index kind mu sigma beta a1 a2 log_likelihood n_used n_zero converged status"


def save_model(model: FittedModel, path) -> None:
    """Write the documented one-record-per-dimension text format."""
    tag = model.source_tag.replace("\r", " ").replace("\n", " ")
    lines = [
        _MODEL_MAGIC,
        f"# kind={model.kind.value}",
        f"# source={tag}",
        f"# dims={model.d}",
        f"# columns: {_COLUMNS}",
    ]
    for i, dim in enumerate(model.dims):
        p = dim.params
        fields = (
            str(i), model.kind.value,
            repr(p.mu), repr(p.sigma), repr(p.beta), repr(p.a1), repr(p.a2),
            repr(dim.log_likelihood), str(dim.n_used), str(dim.n_zero),
            "1" if dim.converged else "0", dim.status.value,
        )
        lines.append("\t".join(fields))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path) -> FittedModel:
    """Inverse of save_model; floats round-trip exactly."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or lines[0] != _MODEL_MAGIC:
        raise ModelFormatError(f"{path}: not a model file (missing {_MODEL_MAGIC!r} header)")
    header: dict[str, str] = {}
    records: list[DimensionFit] = []
    row_kinds: set[str] = set()
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                header[key.strip()] = value
            continue
        parts = line.split("\t")
        if len(parts) != 12:
            raise ModelFormatError(f"{path}:{lineno}: expected 12 fields, got {len(parts)}")
        try:
            index = int(parts[0])
            row_kinds.add(DistributionKind.parse(parts[1]).value)
            mu, sigma, beta, a1, a2, ll = (float(parts[k]) for k in range(2, 8))
            n_used, n_zero = int(parts[8]), int(parts[9])
            converged = parts[10] == "1"
            status = FitStatus(parts[11])
        except ValueError as exc:
            raise ModelFormatError(f"{path}:{lineno}: {exc}") from exc
        if index != len(records):
            raise ModelFormatError(f"{path}:{lineno}: dimension index {index} out of order")
        records.append(DimensionFit(TgnParams(mu, sigma, beta, a1, a2),
                                    ll, n_used, n_zero, converged, status))
    if "kind" not in header or "dims" not in header:
        raise ModelFormatError(f"{path}: missing kind/dims header lines")
    kind = DistributionKind.parse(header["kind"])
    declared = int(header["dims"])
    if declared != len(records):
        raise ModelFormatError(f"{path}: header declares {declared} dims, found {len(records)}")
    if row_kinds - {kind.value}:
        raise ModelFormatError(f"{path}: record kinds {sorted(row_kinds)} disagree with header kind {kind.value!r}")
    return FittedModel(tuple(records), kind, header.get("source", ""))
