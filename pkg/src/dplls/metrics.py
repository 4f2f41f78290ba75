"""Prediction on the original response scale and the relative-error metric."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validate import as_matrix
from .data import ModelParams
from .exceptions import ValidationError
from .families import Family
from .scaling import ScalingSpec, scale_rows, unscale_response

NEAR_ZERO = 1e-8
PREDICT_MODES = ("location", "median")


@dataclass(frozen=True)
class ErrorSummary:
    """Quantile summary of pooled per-sample relative errors."""

    median: float
    q1: float
    q3: float
    iqr: float
    count: int
    excluded_near_zero: int


def predict_response(
    params: ModelParams,
    X,
    spec: ScalingSpec,
    family: Family,
    mode: str = "location",
) -> np.ndarray:
    """Point predictions for raw (unscaled) predictor rows.

    The fitted location beta_0 + x.beta is computed on the standardized
    response scale and mapped back through the scaling spec.  ``median`` mode
    shifts by sigma * ln(ln 2) for the sev family first (the logistic median
    coincides with its location).
    """
    if mode not in PREDICT_MODES:
        raise ValidationError(f"unknown predict mode {mode!r}; expected {PREDICT_MODES}")
    xs = scale_rows(as_matrix(X, "X"), spec)
    if params.d != xs.shape[1]:
        raise ValidationError(
            f"params expect {params.d} features, X has {xs.shape[1]}"
        )
    mu = params.beta[0] + xs @ params.beta[1:]
    if mode == "median" and family.is_sev:
        mu = mu + params.sigma * math.log(math.log(2.0))
    return np.asarray(unscale_response(mu, spec, family))


def predict(
    params: ModelParams,
    x_row,
    spec: ScalingSpec,
    family: Family,
    mode: str = "location",
) -> float:
    """Single-row convenience wrapper around :func:`predict_response`."""
    row = np.asarray(x_row, dtype=float).reshape(1, -1)
    return float(predict_response(params, row, spec, family, mode)[0])


def relative_errors(y_hat, y_true) -> np.ndarray:
    """|y_hat - y_true| / |y_true| with NaN marking near-zero truths.

    Samples with |y_true| below ``NEAR_ZERO`` cannot be scored by a relative
    metric; they come back as NaN and are counted (not scored) by
    :func:`summarize`.
    """
    y_hat = np.asarray(y_hat, dtype=float)
    y_true = np.asarray(y_true, dtype=float)
    out = np.full(np.broadcast(y_hat, y_true).shape, np.nan)
    ok = np.abs(y_true) >= NEAR_ZERO
    out[ok] = np.abs(y_hat - y_true)[ok] / np.abs(y_true)[ok]
    return out


def relative_error(y_hat: float, y_true: float) -> float:
    return float(relative_errors([y_hat], [y_true])[0])


def summarize(errors) -> ErrorSummary:
    """Linear-interpolation quantiles of the pooled error vector."""
    arr = np.asarray(errors, dtype=float).reshape(-1)
    excluded = int(np.count_nonzero(np.isnan(arr)))
    kept = arr[~np.isnan(arr)]
    if kept.size == 0:
        raise ValidationError("no scorable errors to summarize")
    q1, med, q3 = np.quantile(kept, [0.25, 0.5, 0.75])
    return ErrorSummary(
        median=float(med),
        q1=float(q1),
        q3=float(q3),
        iqr=float(q3 - q1),
        count=int(kept.size),
        excluded_near_zero=excluded,
    )
