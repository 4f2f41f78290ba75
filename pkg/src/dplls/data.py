"""Core value types: datasets, parameter vectors, and fit results.

Every type validates its invariants at construction and freezes its arrays,
so instances are immutable and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validate import as_matrix, as_scalar, as_vector, frozen
from .exceptions import ValidationError
from .families import Family


@dataclass(frozen=True)
class Dataset:
    """Raw predictors and responses prior to standardization.

    ``y`` holds the raw response (for log-response families this is the
    positive time-to-failure; the log transform is applied downstream).
    """

    X: np.ndarray
    y: np.ndarray
    family: Family

    def __post_init__(self):
        X = frozen(as_matrix(self.X, "X"))
        y = frozen(as_vector(self.y, "y"))
        if X.shape[0] != y.shape[0]:
            raise ValidationError(
                f"X has {X.shape[0]} rows but y has {y.shape[0]} entries"
            )
        if self.family.log_response and np.any(y <= 0):
            raise ValidationError(
                "log-response families require strictly positive responses"
            )
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class ModelParams:
    """Regression coefficients (intercept first) and the scale parameter."""

    beta: np.ndarray
    sigma: float

    def __post_init__(self):
        beta = frozen(as_vector(self.beta, "beta"))
        sigma = as_scalar(self.sigma, "sigma", positive=True)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "sigma", sigma)

    @property
    def d(self) -> int:
        return self.beta.shape[0] - 1

    def to_transformed(self) -> "TransformedParams":
        q = 1.0 / self.sigma
        return TransformedParams(self.beta * q, q)


@dataclass(frozen=True)
class TransformedParams:
    """The concavity-inducing reparameterization q = 1/sigma, p_j = beta_j q."""

    p: np.ndarray
    q: float

    def __post_init__(self):
        p = frozen(as_vector(self.p, "p"))
        q = as_scalar(self.q, "q", positive=True)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def d(self) -> int:
        return self.p.shape[0] - 1

    def to_model(self) -> ModelParams:
        sigma = 1.0 / self.q
        return ModelParams(self.p * sigma, sigma)


@dataclass(frozen=True)
class FitDiagnostics:
    """How a fit was obtained, for reporting and reproducibility audits."""

    objective_value: float
    concavity_repaired: bool = False
    q_clamped: bool = False
    noise_seed: int | None = None
    iterations: int | None = None
    grad_norm: float | None = None


@dataclass(frozen=True)
class FitResult:
    """Recovered parameters on both scales plus diagnostics."""

    params: ModelParams
    transformed: TransformedParams
    diagnostics: FitDiagnostics
