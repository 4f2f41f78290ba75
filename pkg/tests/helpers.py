"""Shared test construction helpers."""

import numpy as np

from dplls import Family, ScalingSpec, StandardizedDataset


def unit_spec(d):
    """A valid spec for directly constructed standardized data."""
    return ScalingSpec(np.zeros(d), np.ones(d), -1.0, 1.0, d)


def standardized(X, y, family=Family("sev")):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return StandardizedDataset(X, y, unit_spec(X.shape[1]), family)


def random_standardized(rng, n, d, family=Family("sev"), y_zero=False):
    """Rows respecting the standardization bounds: x in [0, 1/sqrt(d)], y in [-1, 1]."""
    x = rng.random((n, d)) / np.sqrt(d)
    y = np.zeros(n) if y_zero else rng.uniform(-1.0, 1.0, n)
    return StandardizedDataset(x, y, unit_spec(d), family)


def params_on_raw_scale(params, spec, family):
    """Invert the standardization to express fitted parameters on raw scale."""
    assert not family.log_response
    a = 2.0 / (spec.y_hi - spec.y_lo)
    center = 0.5 * (spec.y_lo + spec.y_hi)
    denom = (spec.beta_max - spec.alpha) * np.sqrt(spec.d)
    safe = np.where(denom > 0, denom, 1.0)
    slopes = np.where(denom > 0, params.beta[1:] / (a * safe), 0.0)
    intercept = params.beta[0] / a + center - float(slopes @ spec.alpha)
    return np.concatenate([[intercept], slopes]), params.sigma / a
