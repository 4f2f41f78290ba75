"""Scikit-learn style estimators wrapping the fitting pipeline.

Both regressors fit the response scaling on the training data, fit on the
standardized scale, and predict on the original response scale, so they
compose with sklearn model selection and pipelines out of the box.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from .data import Dataset
from .families import Family
from .mechanism import PrivacyBudget
from .metrics import predict_response
from .mle import fit_mle
from .scaling import apply_scaling, fit_scaling
from .solver import fit_dp


class _LLSBase(BaseEstimator, RegressorMixin):
    def _prepare(self, X, y):
        family = Family.parse(self.family)
        data = Dataset(X, y, family)
        spec = fit_scaling(data)
        return family, spec, apply_scaling(data, spec)

    def _finish(self, family, spec, result):
        self.family_ = family
        self.scaling_ = spec
        self.result_ = result
        self.sigma_ = result.params.sigma
        self.intercept_ = float(result.params.beta[0])
        self.coef_ = np.array(result.params.beta[1:])
        return self

    def predict(self, X):
        if not hasattr(self, "result_"):
            raise NotFittedError(
                f"this {type(self).__name__} instance is not fitted yet"
            )
        return predict_response(
            self.result_.params, X, self.scaling_, self.family_, self.predict_mode
        )


class LLSRegressor(_LLSBase):
    """Location-scale regression fit by exact maximum likelihood.

    Parameters
    ----------
    family : str, default "sev"
        One of "sev", "logistic", "weibull", "loglogistic".  The log
        variants model the logarithm of a positive response.
    predict_mode : str, default "location"
        "location" predicts the fitted location; "median" predicts the
        conditional distribution median.
    """

    def __init__(self, family="sev", predict_mode="location"):
        self.family = family
        self.predict_mode = predict_mode

    def fit(self, X, y):
        family, spec, std = self._prepare(X, y)
        return self._finish(family, spec, fit_mle(std, family))


class DPLLSRegressor(_LLSBase):
    """Differentially private location-scale regression.

    The training data influence the output only through polynomial weights
    perturbed with Laplace noise of scale sensitivity/epsilon, so releasing
    the fitted parameters satisfies epsilon-differential privacy with respect
    to single-row changes of the training set (the feature/response scaling
    bounds are treated as public).

    Parameters
    ----------
    family : str, default "sev"
    epsilon : float, default 1.0
        Privacy budget; smaller means stronger privacy and more noise.
    seed : int, default 0
        Drives the Laplace draws; fits are deterministic given a seed.
    predict_mode : str, default "location"
    """

    def __init__(self, family="sev", epsilon=1.0, seed=0, predict_mode="location"):
        self.family = family
        self.epsilon = epsilon
        self.seed = seed
        self.predict_mode = predict_mode

    def fit(self, X, y):
        family, spec, std = self._prepare(X, y)
        result = fit_dp(std, family, PrivacyBudget(self.epsilon), self.seed)
        return self._finish(family, spec, result)
