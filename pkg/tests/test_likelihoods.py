import math

import numpy as np
import pytest

from dplls import (
    LOGISTIC,
    SEV,
    TransformedParams,
    ValidationError,
    loglik,
    loglik_grad,
    loglik_hessian,
    loglik_logistic,
    loglik_sev,
)
from helpers import random_standardized, standardized


def naive_loglik(family, p, q, X, y):
    # Independent per-term re-summation with the intercept written out.
    n, d = X.shape
    total = n * math.log(q)
    for i in range(n):
        z = y[i] * q - p[0]
        for j in range(d):
            z -= p[j + 1] * X[i, j]
        if family.is_sev:
            total += z - math.exp(z)
        else:
            total += z - 2.0 * math.log(1.0 + math.exp(z))
    return total


def test_sev_expansion_point_single_row():
    data = standardized([[0.0]], [0.0])
    assert loglik_sev(TransformedParams([0.0, 0.0], 1.0), data) == pytest.approx(-1.0, abs=1e-15)


def test_sev_scales_linearly_in_n():
    data = standardized(np.zeros((3, 1)), np.zeros(3))
    assert loglik_sev(TransformedParams([0.0, 0.0], 1.0), data) == pytest.approx(-3.0, abs=1e-15)


def test_logistic_expansion_point():
    data = standardized([[0.0]], [0.0], LOGISTIC)
    value = loglik_logistic(TransformedParams([0.0, 0.0], 1.0), data)
    assert value == pytest.approx(-2.0 * math.log(2.0), rel=1e-15)


def test_logistic_expansion_point_n4():
    data = standardized(np.zeros((4, 1)), np.zeros(4), LOGISTIC)
    value = loglik_logistic(TransformedParams([0.0, 0.0], 1.0), data)
    assert value == pytest.approx(-8.0 * math.log(2.0), rel=1e-15)


@pytest.mark.parametrize("family", [SEV, LOGISTIC])
def test_matches_resummation_oracle(family):
    rng = np.random.default_rng(42)
    for _ in range(25):
        data = random_standardized(rng, 5, 3, family)
        params = TransformedParams(rng.normal(size=4), float(rng.uniform(0.3, 3.0)))
        got = loglik(family, params, data)
        want = naive_loglik(family, params.p, params.q, data.X, data.y)
        assert got == pytest.approx(want, rel=1e-12)


def test_nonpositive_q_rejected():
    with pytest.raises(ValidationError):
        TransformedParams([0.0, 0.0], 0.0)
    with pytest.raises(ValidationError):
        TransformedParams([0.0, 0.0], -1.0)


def test_logistic_stable_for_huge_residuals():
    # y q pushes z to +-800; the naive formula would overflow.
    data = standardized([[0.0]], [1.0], LOGISTIC)
    low = loglik_logistic(TransformedParams([0.0, 0.0], 800.0), data)
    assert np.isfinite(low)
    # For large z: n log q + z - 2 log(1 + e^z) ~ n log q - z.
    assert low == pytest.approx(math.log(800.0) - 800.0, rel=1e-12)


def test_grad_hand_values_at_expansion_point():
    data = standardized([[0.0]], [0.0])
    grad = loglik_grad(SEV, TransformedParams([0.0, 0.0], 1.0), data)
    assert grad[-1] == pytest.approx(1.0, abs=1e-15)  # n/q + sum y (1 - e^z)
    assert grad[0] == pytest.approx(0.0, abs=1e-15)  # -n + sum x0 e^z


def _fd_gradient(family, params, data, h=1e-6):
    base_p, base_q = params.p, params.q
    out = np.empty(base_p.size + 1)
    for k in range(base_p.size):
        e = np.zeros_like(base_p)
        e[k] = h
        hi = loglik(family, TransformedParams(base_p + e, base_q), data)
        lo = loglik(family, TransformedParams(base_p - e, base_q), data)
        out[k] = (hi - lo) / (2 * h)
    hi = loglik(family, TransformedParams(base_p, base_q + h), data)
    lo = loglik(family, TransformedParams(base_p, base_q - h), data)
    out[-1] = (hi - lo) / (2 * h)
    return out


@pytest.mark.parametrize("family", [SEV, LOGISTIC])
def test_grad_matches_central_differences(family):
    rng = np.random.default_rng(7)
    for _ in range(50):
        data = random_standardized(rng, 12, 3, family)
        params = TransformedParams(0.5 * rng.normal(size=4), float(rng.uniform(0.5, 2.0)))
        grad = loglik_grad(family, params, data)
        fd = _fd_gradient(family, params, data)
        scale = max(1.0, float(np.max(np.abs(grad))))
        assert np.max(np.abs(grad - fd)) / scale < 1e-6


@pytest.mark.parametrize("family", [SEV, LOGISTIC])
def test_transformed_loglik_is_concave(family):
    rng = np.random.default_rng(11)
    for _ in range(30):
        data = random_standardized(rng, 10, 3, family)
        params = TransformedParams(rng.normal(size=4), float(rng.uniform(0.3, 3.0)))
        hess = loglik_hessian(family, params, data)
        assert np.linalg.eigvalsh(hess).max() <= 1e-10


def test_hessian_matches_fd_of_gradient():
    rng = np.random.default_rng(3)
    data = random_standardized(rng, 15, 2, LOGISTIC)
    params = TransformedParams(rng.normal(size=3), 1.3)
    hess = loglik_hessian(LOGISTIC, params, data)
    h = 1e-6
    for k in range(3 + 1):
        dp = np.zeros(3)
        if k < 3:
            dp[k] = h
            hi = loglik_grad(LOGISTIC, TransformedParams(params.p + dp, params.q), data)
            lo = loglik_grad(LOGISTIC, TransformedParams(params.p - dp, params.q), data)
        else:
            hi = loglik_grad(LOGISTIC, TransformedParams(params.p, params.q + h), data)
            lo = loglik_grad(LOGISTIC, TransformedParams(params.p, params.q - h), data)
        assert np.allclose((hi - lo) / (2 * h), hess[:, k], atol=1e-5)
