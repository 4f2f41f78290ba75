"""Exact transformed log-likelihoods and their analytic derivatives.

Both families are parameterized by the transformed pair (p, q) with
q = 1/sigma and p_j = beta_j * q, under which the log-likelihoods

    sev:      n log q + sum_i z_i - sum_i exp(z_i)
    logistic: n log q + sum_i z_i - 2 sum_i log(1 + exp(z_i))

with z_i = y_i q - sum_j p_j x_ij are concave in (p, q).  The intercept
column x_{i0} = 1 is contributed by these routines and never stored in X,
which keeps it out of the reach of any feature scaling.
"""

from __future__ import annotations

import numpy as np

from .data import TransformedParams
from .exceptions import ValidationError
from .families import Family


def design_with_intercept(data) -> np.ndarray:
    """Standardized design matrix with the implied leading column of ones."""
    return np.column_stack([np.ones(data.n), data.X])


def _residuals(params: TransformedParams, data) -> np.ndarray:
    if params.p.shape[0] != data.d + 1:
        raise ValidationError(
            f"p has {params.p.shape[0]} entries, expected d+1 = {data.d + 1}"
        )
    p = params.p
    return data.y * params.q - (p[0] + data.X @ p[1:])


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def loglik_sev(params: TransformedParams, data) -> float:
    z = _residuals(params, data)
    with np.errstate(over="ignore"):
        total = data.n * np.log(params.q) + z.sum() - np.exp(z).sum()
    return float(total)


def loglik_logistic(params: TransformedParams, data) -> float:
    z = _residuals(params, data)
    # log(1 + e^z) = max(z, 0) + log1p(e^-|z|) stays finite for |z| > 700
    softplus = np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))
    return float(data.n * np.log(params.q) + z.sum() - 2.0 * softplus.sum())


def loglik(family: Family, params: TransformedParams, data) -> float:
    return loglik_sev(params, data) if family.is_sev else loglik_logistic(params, data)


def loglik_grad(family: Family, params: TransformedParams, data) -> np.ndarray:
    """Gradient with respect to (p_0, ..., p_d, q), length d + 2."""
    z = _residuals(params, data)
    xa = design_with_intercept(data)
    if family.is_sev:
        # d/dz of (z - e^z) is 1 - e^z; chain rule brings -x_ij and y_i
        t = np.exp(z) - 1.0
        grad_p = xa.T @ t
        grad_q = data.n / params.q - data.y @ t
    else:
        t = 2.0 * _sigmoid(z) - 1.0
        grad_p = xa.T @ t
        grad_q = data.n / params.q - data.y @ t
    return np.concatenate([grad_p, [grad_q]])


def loglik_hessian(family: Family, params: TransformedParams, data) -> np.ndarray:
    """Hessian with respect to (p_0, ..., p_d, q), shape (d+2, d+2).

    Both Hessians have the form -U' diag(w) U - (n/q^2) e_q e_q' with
    U = [-Xa, y] and positive weights w, hence are negative semidefinite.
    """
    z = _residuals(params, data)
    if family.is_sev:
        w = np.exp(z)
    else:
        s = _sigmoid(z)
        w = 2.0 * s * (1.0 - s)
    xa = design_with_intercept(data)
    u = np.column_stack([-xa, data.y])
    hess = -(u * w[:, None]).T @ u
    hess[-1, -1] -= data.n / params.q**2
    return hess
