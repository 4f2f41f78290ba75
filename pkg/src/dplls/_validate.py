"""Array validation helpers used at API boundaries."""

from __future__ import annotations

import numpy as np

from .exceptions import ValidationError


def as_matrix(value, name: str = "X") -> np.ndarray:
    arr = np.array(value, dtype=float)
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be a 2-d array, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValidationError(f"{name} must be non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


def as_vector(value, name: str = "y") -> np.ndarray:
    arr = np.array(value, dtype=float).reshape(-1)
    if arr.shape[0] < 1:
        raise ValidationError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


def as_scalar(value, name: str, *, positive: bool = False) -> float:
    x = float(value)
    if not np.isfinite(x):
        raise ValidationError(f"{name} must be finite, got {value!r}")
    if positive and x <= 0:
        raise ValidationError(f"{name} must be positive, got {value!r}")
    return x


def frozen(arr: np.ndarray) -> np.ndarray:
    """Mark an owned array read-only so shared values stay immutable."""
    arr.setflags(write=False)
    return arr
