"""Differentially private log-location-scale regression.

Fits sev (Gumbel-minimum) and logistic location-scale regressions, both
exactly by maximum likelihood and privately by perturbing the coefficients
of a second-order polynomial surrogate of the log-likelihood with calibrated
Laplace noise.  Ships sklearn-style estimators, an experiment harness for
synthetic sweeps, a turbofan degradation case study, and a CLI.
"""

__version__ = "0.1.0"

from .data import (
    Dataset,
    FitDiagnostics,
    FitResult,
    ModelParams,
    TransformedParams,
)
from .estimators import DPLLSRegressor, LLSRegressor
from .exceptions import (
    ConvergenceError,
    DegenerateFitError,
    DPLLSError,
    SolverError,
    ValidationError,
)
from .families import LOGISTIC, LOGLOGISTIC, SEV, WEIBULL, Family
from .likelihoods import loglik, loglik_grad, loglik_hessian, loglik_logistic, loglik_sev
from .mechanism import (
    NoiseSpec,
    PrivacyBudget,
    QuadraticObjective,
    TaylorWeights,
    empirical_sensitivity,
    laplace_sample,
    max_privacy_ratio,
    perturb_weights,
    privacy_ratio_bound,
    sensitivity,
    taylor_weights,
    taylor_weights_logistic,
    taylor_weights_sev,
)
from .metrics import (
    ErrorSummary,
    predict,
    predict_response,
    relative_error,
    relative_errors,
    summarize,
)
from .mle import fit_mle
from .scaling import (
    ScalingSpec,
    StandardizedDataset,
    apply_scaling,
    fit_scaling,
    scale_rows,
    unscale_response,
)
from .simulate import (
    ExperimentRecord,
    SimConfig,
    TrialResult,
    generate_synthetic,
    run_trial,
    sweep,
)
from .solver import fit_dp, solve_quadratic

__all__ = [
    "__version__",
    "Dataset",
    "FitDiagnostics",
    "FitResult",
    "ModelParams",
    "TransformedParams",
    "DPLLSRegressor",
    "LLSRegressor",
    "DPLLSError",
    "ValidationError",
    "ConvergenceError",
    "DegenerateFitError",
    "SolverError",
    "Family",
    "SEV",
    "LOGISTIC",
    "WEIBULL",
    "LOGLOGISTIC",
    "loglik",
    "loglik_sev",
    "loglik_logistic",
    "loglik_grad",
    "loglik_hessian",
    "fit_mle",
    "ScalingSpec",
    "StandardizedDataset",
    "fit_scaling",
    "apply_scaling",
    "scale_rows",
    "unscale_response",
    "TaylorWeights",
    "PrivacyBudget",
    "NoiseSpec",
    "QuadraticObjective",
    "taylor_weights",
    "taylor_weights_sev",
    "taylor_weights_logistic",
    "sensitivity",
    "empirical_sensitivity",
    "laplace_sample",
    "perturb_weights",
    "privacy_ratio_bound",
    "max_privacy_ratio",
    "solve_quadratic",
    "fit_dp",
    "ErrorSummary",
    "predict",
    "predict_response",
    "relative_error",
    "relative_errors",
    "summarize",
    "SimConfig",
    "TrialResult",
    "ExperimentRecord",
    "generate_synthetic",
    "run_trial",
    "sweep",
]
