"""Synthetic-data experiments: generation, seeded trials, and factor sweeps.

A trial is fully determined by its integer seed: data generation, the
train/test split, and the privacy noise each draw from independent child
streams of one SeedSequence, so repetitions are reproducible individually
and sweeps are reproducible regardless of thread count.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._rng import as_generator
from .data import Dataset, ModelParams
from .exceptions import (
    ConvergenceError,
    DegenerateFitError,
    SolverError,
    ValidationError,
)
from .families import Family
from .mechanism import PrivacyBudget
from .metrics import ErrorSummary, predict_response, relative_errors, summarize
from .mle import fit_mle
from .scaling import apply_scaling, fit_scaling
from .solver import fit_dp

_FIT_FAILURES = (ConvergenceError, DegenerateFitError, SolverError)

FACTOR_FIELDS = {"dimension": "d", "sample_size": "n", "epsilon": "epsilon"}


@dataclass(frozen=True)
class SimConfig:
    """One experiment cell: family, data size, budget, and seeding."""

    family: Family
    n: int
    d: int
    epsilon: float
    repetitions: int = 1
    train_fraction: float = 0.8
    seed_base: int = 0
    predict_mode: str = "location"

    def __post_init__(self):
        if self.n <= self.d + 2:
            raise ValidationError(f"need n > d + 2 (n={self.n}, d={self.d})")
        if self.repetitions < 1:
            raise ValidationError("repetitions must be >= 1")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValidationError("train_fraction must be in (0, 1)")
        if self.epsilon <= 0:
            raise ValidationError("epsilon must be positive")


@dataclass(frozen=True)
class TrialResult:
    repetition: int
    dp_errors: np.ndarray | None
    nondp_errors: np.ndarray | None
    dp_failure: str | None = None
    nondp_failure: str | None = None


@dataclass(frozen=True)
class ExperimentRecord:
    """One sweep cell: factor value, both arms' summaries, failure counts."""

    factor_name: str
    factor_value: float | int
    dp_summary: ErrorSummary | None
    nondp_summary: ErrorSummary | None
    dp_failures: int
    nondp_failures: int
    raw_errors_path: str | None = None


def generate_synthetic(
    n: int, d: int, family: Family, seed
) -> tuple[Dataset, ModelParams]:
    """Draw predictors and coefficients i.i.d. standard normal, then the
    response location plus standard sev or logistic noise via inverse CDF.

    For log-response families the location-scale response is exponentiated,
    so the returned raw response is positive.
    """
    if n < 1 or d < 1:
        raise ValidationError("n and d must be >= 1")
    rng = as_generator(seed)
    x = rng.standard_normal((n, d))
    beta = rng.standard_normal(d + 1)
    u = rng.random(n)
    tiny = np.finfo(float).tiny
    u = np.clip(u, tiny, 1.0 - 1e-16)
    if family.is_sev:
        eps = np.log(-np.log1p(-u))
    else:
        eps = np.log(u / (1.0 - u))
    y = beta[0] + x @ beta[1:] + eps
    if family.log_response:
        y = np.exp(y)
    return Dataset(x, y, family), ModelParams(beta, 1.0)


def run_trial(config: SimConfig, repetition: int) -> TrialResult:
    """Generate, split 80/20, fit both arms, score on the held-out rows.

    Solver failures are recorded per arm instead of raised, so one bad
    repetition never aborts a sweep.
    """
    seed = config.seed_base + repetition
    data_seq, split_seq, noise_seq = np.random.SeedSequence(seed).spawn(3)
    data, _ = generate_synthetic(config.n, config.d, config.family, data_seq)

    n_train = int(round(config.train_fraction * config.n))
    n_train = min(max(n_train, 1), config.n - 1)
    perm = np.random.default_rng(split_seq).permutation(config.n)
    train_idx, test_idx = perm[:n_train], perm[n_train:]

    train = Dataset(data.X[train_idx], data.y[train_idx], config.family)
    spec = fit_scaling(train)
    std_train = apply_scaling(train, spec)
    x_test, y_test = data.X[test_idx], data.y[test_idx]

    def score(result):
        pred = predict_response(
            result.params, x_test, spec, config.family, config.predict_mode
        )
        return relative_errors(pred, y_test)

    dp_errors = nondp_errors = None
    dp_failure = nondp_failure = None
    try:
        nondp_errors = score(fit_mle(std_train, config.family))
    except _FIT_FAILURES as exc:
        nondp_failure = str(exc)
    try:
        budget = PrivacyBudget(config.epsilon)
        dp_errors = score(fit_dp(std_train, config.family, budget, noise_seq))
    except _FIT_FAILURES as exc:
        dp_failure = str(exc)
    return TrialResult(repetition, dp_errors, nondp_errors, dp_failure, nondp_failure)


def run_repetitions(config: SimConfig, *, threads: int = 1) -> list[TrialResult]:
    reps = range(config.repetitions)
    if threads <= 1:
        return [run_trial(config, r) for r in reps]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda r: run_trial(config, r), reps))


def _pool(trials: list[TrialResult], arm: str) -> tuple[np.ndarray, int]:
    chunks, failures = [], 0
    for trial in trials:
        errors = getattr(trial, f"{arm}_errors")
        if errors is None:
            failures += 1
        else:
            chunks.append(errors)
    pooled = np.concatenate(chunks) if chunks else np.empty(0)
    return pooled, failures


def _summary_or_none(errors: np.ndarray) -> ErrorSummary | None:
    if errors.size == 0 or np.all(np.isnan(errors)):
        return None
    return summarize(errors)


def sweep(
    factor: str,
    config: SimConfig,
    values,
    *,
    out_dir=None,
    threads: int = 1,
) -> list[ExperimentRecord]:
    """Run all repetitions at each factor value, the other factors fixed.

    When ``out_dir`` is given, per-cell raw error CSVs are written there and
    referenced from the returned records.
    """
    if factor not in FACTOR_FIELDS:
        raise ValidationError(
            f"unknown factor {factor!r}; expected one of {sorted(FACTOR_FIELDS)}"
        )
    values = list(values)
    if not values:
        raise ValidationError("values must be non-empty")

    from .reports import write_raw_errors

    cast = float if factor == "epsilon" else int
    records = []
    for value in values:
        cell = dataclasses.replace(config, **{FACTOR_FIELDS[factor]: cast(value)})
        trials = run_repetitions(cell, threads=threads)
        dp_pooled, dp_failures = _pool(trials, "dp")
        nondp_pooled, nondp_failures = _pool(trials, "nondp")
        raw_path = None
        if out_dir is not None:
            raw_path = write_raw_errors(out_dir, factor, cast(value), trials)
        records.append(
            ExperimentRecord(
                factor_name=factor,
                factor_value=cast(value),
                dp_summary=_summary_or_none(dp_pooled),
                nondp_summary=_summary_or_none(nondp_pooled),
                dp_failures=dp_failures,
                nondp_failures=nondp_failures,
                raw_errors_path=raw_path,
            )
        )
    return records
