"""Data standardization: min-max-over-sqrt(d) predictors, response on [-1, 1].

After fitting on a training set, every training row satisfies
sqrt(sum_j x_ij^2) <= 1 (each feature lands in [0, 1/sqrt(d)]) and every
training response lies in [-1, 1]; these bounds are what the noise
calibration downstream relies on.  Scaling parameters are fit on training
data only; rows transformed later may exceed the nominal bounds (no
clipping), which is deliberate: the privacy calibration concerns the
training set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validate import as_matrix, as_scalar, as_vector, frozen
from .data import Dataset
from .exceptions import ValidationError
from .families import Family


@dataclass(frozen=True)
class ScalingSpec:
    """Per-feature min/max and response bounds needed to invert the transform."""

    alpha: np.ndarray
    beta_max: np.ndarray
    y_lo: float
    y_hi: float
    d: int

    def __post_init__(self):
        alpha = frozen(as_vector(self.alpha, "alpha"))
        beta_max = frozen(as_vector(self.beta_max, "beta_max"))
        if alpha.shape != beta_max.shape:
            raise ValidationError("alpha and beta_max must have the same length")
        if alpha.shape[0] != self.d:
            raise ValidationError(
                f"expected {self.d} per-feature bounds, got {alpha.shape[0]}"
            )
        if np.any(beta_max < alpha):
            raise ValidationError("beta_max must be >= alpha featurewise")
        y_lo = as_scalar(self.y_lo, "y_lo")
        y_hi = as_scalar(self.y_hi, "y_hi")
        if y_hi < y_lo:
            raise ValidationError("y_hi must be >= y_lo")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta_max", beta_max)
        object.__setattr__(self, "y_lo", y_lo)
        object.__setattr__(self, "y_hi", y_hi)


@dataclass(frozen=True)
class StandardizedDataset:
    """Scaled data plus the spec that produced it."""

    X: np.ndarray
    y: np.ndarray
    spec: ScalingSpec
    family: Family

    def __post_init__(self):
        X = frozen(as_matrix(self.X, "X"))
        y = frozen(as_vector(self.y, "y"))
        if X.shape[0] != y.shape[0]:
            raise ValidationError("X and y row counts disagree")
        if X.shape[1] != self.spec.d:
            raise ValidationError(
                f"X has {X.shape[1]} features but spec expects {self.spec.d}"
            )
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]


def transformed_response(data: Dataset) -> np.ndarray:
    """Working response: log of the raw response for log-response families."""
    return np.log(data.y) if data.family.log_response else data.y


def fit_scaling(data: Dataset) -> ScalingSpec:
    """Columnwise min/max of the predictors and range of the working response."""
    yw = transformed_response(data)
    return ScalingSpec(
        alpha=data.X.min(axis=0),
        beta_max=data.X.max(axis=0),
        y_lo=float(yw.min()),
        y_hi=float(yw.max()),
        d=data.d,
    )


def scale_rows(X, spec: ScalingSpec) -> np.ndarray:
    """Apply the predictor transform x -> (x - alpha) / ((beta - alpha) sqrt(d)).

    Constant features (beta == alpha) map to zero: they carry no information
    and zero keeps the per-feature bound that the noise calibration assumes.
    """
    X = as_matrix(X, "X")
    if X.shape[1] != spec.d:
        raise ValidationError(f"X has {X.shape[1]} features, spec expects {spec.d}")
    denom = (spec.beta_max - spec.alpha) * np.sqrt(spec.d)
    safe = np.where(denom > 0, denom, 1.0)
    return np.where(denom > 0, (X - spec.alpha) / safe, 0.0)


def scale_response(y, spec: ScalingSpec, family: Family) -> np.ndarray:
    yw = np.log(y) if family.log_response else np.asarray(y, dtype=float)
    span = spec.y_hi - spec.y_lo
    if span <= 0:
        return np.zeros_like(np.asarray(yw, dtype=float))
    return 2.0 * (yw - spec.y_lo) / span - 1.0


def apply_scaling(data: Dataset, spec: ScalingSpec) -> StandardizedDataset:
    """Transform a dataset with a previously fitted spec (no clipping)."""
    return StandardizedDataset(
        X=scale_rows(data.X, spec),
        y=scale_response(data.y, spec, data.family),
        spec=spec,
        family=data.family,
    )


def unscale_response(y_scaled, spec: ScalingSpec, family: Family):
    """Exact inverse of the response transform; exponentiates for log families."""
    span = spec.y_hi - spec.y_lo
    if span <= 0:
        raise ValidationError("degenerate response range: y_hi equals y_lo")
    arr = np.asarray(y_scaled, dtype=float)
    yw = spec.y_lo + (arr + 1.0) * span / 2.0
    out = np.exp(yw) if family.log_response else yw
    if np.isscalar(y_scaled) or arr.ndim == 0:
        return float(out)
    return out
