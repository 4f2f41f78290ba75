"""Turbofan case-study pipeline: ingest, truncate, PCA-fuse, regress.

The CMAPSS text layout is whitespace-delimited with 26 columns per row:
unit id, cycle, three operational settings, then 21 sensor readings.
Training engines run to failure (time-to-failure equals signal length);
test engines stop early and get their total life from the companion truth
file.  Signals are truncated to a fixed horizon, the selected sensors are
flattened per engine (sensor-major, time-minor), and a PCA basis fit on
training engines only supplies the regression features.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._validate import frozen
from .data import Dataset
from .exceptions import (
    ConvergenceError,
    DegenerateFitError,
    SolverError,
    ValidationError,
)
from .families import SEV, Family
from .mechanism import PrivacyBudget
from .metrics import predict_response, relative_errors
from .mle import fit_mle
from .scaling import apply_scaling, fit_scaling
from .simulate import ExperimentRecord, TrialResult, _pool, _summary_or_none
from .solver import fit_dp

N_SENSORS = 21
N_COLUMNS = 26
DEFAULT_SENSORS = (4, 17, 20)
DEFAULT_HORIZON = 150

_FIT_FAILURES = (ConvergenceError, DegenerateFitError, SolverError)


@dataclass(frozen=True)
class EngineSignal:
    """One engine's multi-sensor history and (when known) its total life."""

    engine_id: int
    cycles: int
    sensor_matrix: np.ndarray
    ttf: int | None

    def __post_init__(self):
        mat = np.array(self.sensor_matrix, dtype=float)
        if mat.ndim != 2 or mat.shape != (self.cycles, N_SENSORS):
            raise ValidationError(
                f"engine {self.engine_id}: sensor matrix must be "
                f"({self.cycles}, {N_SENSORS}), got {mat.shape}"
            )
        if not np.all(np.isfinite(mat)):
            raise ValidationError(f"engine {self.engine_id}: non-finite readings")
        if self.cycles < 1:
            raise ValidationError(f"engine {self.engine_id}: needs >= 1 cycle")
        if self.ttf is not None and self.ttf < 1:
            raise ValidationError(f"engine {self.engine_id}: ttf must be positive")
        object.__setattr__(self, "sensor_matrix", frozen(mat))


@dataclass(frozen=True)
class FusedFeatures:
    engine_id: int
    features: np.ndarray
    ttf: int | None


@dataclass(frozen=True)
class PCABasis:
    """Training mean and orthonormal directions, descending variance order."""

    mean: np.ndarray
    components: np.ndarray
    variances: np.ndarray

    @property
    def rank(self) -> int:
        tol = max(self.variances[0], 0.0) * 1e-12
        return int(np.count_nonzero(self.variances > tol))


def _read_cmapss_matrix(path) -> np.ndarray:
    try:
        raw = np.loadtxt(path, dtype=float)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise ValidationError(f"malformed rows in {path}: {exc}") from exc
    if raw.ndim == 1:
        raw = raw.reshape(1, -1)
    if raw.shape[1] != N_COLUMNS:
        raise ValidationError(
            f"{path}: expected {N_COLUMNS} columns "
            f"(unit, cycle, 3 settings, {N_SENSORS} sensors), got {raw.shape[1]}"
        )
    return raw


def _group_engines(raw: np.ndarray, path) -> list[tuple[int, np.ndarray]]:
    units = raw[:, 0].astype(int)
    n_units = units.max()
    engines = []
    for unit in range(1, n_units + 1):
        rows = raw[units == unit]
        if rows.shape[0] == 0:
            raise ValidationError(f"{path}: engine {unit} is missing")
        order = np.argsort(rows[:, 1], kind="stable")
        rows = rows[order]
        cycles = rows[:, 1].astype(int)
        if not np.array_equal(cycles, np.arange(1, rows.shape[0] + 1)):
            raise ValidationError(
                f"{path}: engine {unit} has non-contiguous cycle numbers"
            )
        engines.append((unit, rows[:, 5:]))
    return engines


def ingest_cmapss(train_path, test_path, truth_path) -> tuple[list[EngineSignal], list[EngineSignal]]:
    """Parse the three text files into per-engine signals.

    Training engines get ttf = signal length (run to failure); test engines
    get ttf = observed cycles + remaining life from the truth file.
    """
    train = [
        EngineSignal(unit, mat.shape[0], mat, ttf=mat.shape[0])
        for unit, mat in _group_engines(_read_cmapss_matrix(train_path), train_path)
    ]
    test_groups = _group_engines(_read_cmapss_matrix(test_path), test_path)
    try:
        truth = np.loadtxt(truth_path, dtype=float).reshape(-1)
    except OSError as exc:
        raise ValidationError(f"cannot read {truth_path}: {exc}") from exc
    except ValueError as exc:
        raise ValidationError(f"malformed truth file {truth_path}: {exc}") from exc
    if truth.shape[0] != len(test_groups):
        raise ValidationError(
            f"truth file lists {truth.shape[0]} engines but the test file "
            f"has {len(test_groups)}"
        )
    if np.any(truth < 0) or not np.all(np.isfinite(truth)):
        raise ValidationError(f"{truth_path}: remaining-life values must be >= 0")
    test = [
        EngineSignal(unit, mat.shape[0], mat, ttf=mat.shape[0] + int(round(truth[i])))
        for i, (unit, mat) in enumerate(test_groups)
    ]
    return train, test


def truncate_signals(signals, horizon: int = DEFAULT_HORIZON) -> list[EngineSignal]:
    """Keep engines observed for (and surviving past) the horizon; cut the rest.

    Engines with total life below the horizon are dropped, as are engines
    whose observed history is shorter than the horizon (possible only for
    test engines, whose lives extend past observation).
    """
    if horizon < 1:
        raise ValidationError("horizon must be >= 1")
    kept = []
    for signal in signals:
        if signal.cycles < horizon:
            continue
        if signal.ttf is not None and signal.ttf < horizon:
            continue
        kept.append(
            EngineSignal(
                signal.engine_id,
                horizon,
                signal.sensor_matrix[:horizon],
                signal.ttf,
            )
        )
    return kept


def flatten_signals(signals, sensor_ids=DEFAULT_SENSORS) -> np.ndarray:
    """Stack the selected sensors per engine, sensor-major and time-minor."""
    sensor_ids = tuple(int(s) for s in sensor_ids)
    for sid in sensor_ids:
        if not 1 <= sid <= N_SENSORS:
            raise ValidationError(f"sensor id {sid} outside 1..{N_SENSORS}")
    if not signals:
        raise ValidationError("no signals to flatten")
    lengths = {s.cycles for s in signals}
    if len(lengths) != 1:
        raise ValidationError("signals must share one truncation length")
    return np.stack(
        [
            np.concatenate([s.sensor_matrix[:, sid - 1] for sid in sensor_ids])
            for s in signals
        ]
    )


def fit_pca_basis(signals, sensor_ids=DEFAULT_SENSORS) -> PCABasis:
    """Eigendecomposition of the training covariance of flattened signals.

    Components come in descending variance order with the sign convention
    that each component's largest-magnitude loading is positive, so results
    do not depend on the linear-algebra backend.
    """
    flat = flatten_signals(signals, sensor_ids)
    if flat.shape[0] < 2:
        raise ValidationError("need at least 2 engines to fit a basis")
    mean = flat.mean(axis=0)
    centered = flat - mean
    cov = centered.T @ centered / (flat.shape[0] - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.maximum(eigvals[order], 0.0)
    eigvecs = eigvecs[:, order]
    for j in range(eigvecs.shape[1]):
        pivot = np.argmax(np.abs(eigvecs[:, j]))
        if eigvecs[pivot, j] < 0:
            eigvecs[:, j] = -eigvecs[:, j]
    return PCABasis(mean=mean, components=eigvecs, variances=eigvals)


def pca_scores(basis: PCABasis, signals, sensor_ids=DEFAULT_SENSORS, k: int = 3) -> list[FusedFeatures]:
    if k < 1 or k > basis.rank:
        raise ValidationError(f"k={k} outside 1..rank ({basis.rank})")
    flat = flatten_signals(signals, sensor_ids)
    scores = (flat - basis.mean) @ basis.components[:, :k]
    return [
        FusedFeatures(signal.engine_id, scores[i], signal.ttf)
        for i, signal in enumerate(signals)
    ]


def pca_fuse(train_signals, test_signals, sensor_ids=DEFAULT_SENSORS, k: int = 3):
    """Fit the basis on training engines only; project both sets."""
    basis = fit_pca_basis(train_signals, sensor_ids)
    return (
        pca_scores(basis, train_signals, sensor_ids, k),
        pca_scores(basis, test_signals, sensor_ids, k),
        basis,
    )


# ---------------------------------------------------------------------------
# Case-study experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CaseStudyConfig:
    sweep: str = "dimension"
    k_values: tuple = (3, 4, 5, 6)
    epsilon_values: tuple = (0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 10.0)
    epsilon: float = 5.0
    k: int = 3
    repetitions: int = 500
    seed_base: int = 0
    sensor_ids: tuple = DEFAULT_SENSORS
    family: Family = SEV
    predict_mode: str = "location"

    def __post_init__(self):
        if self.sweep not in ("dimension", "epsilon"):
            raise ValidationError("sweep must be 'dimension' or 'epsilon'")
        if self.repetitions < 1:
            raise ValidationError("repetitions must be >= 1")


def _features_as_dataset(features: list[FusedFeatures], family: Family) -> Dataset:
    ttf = [f.ttf for f in features]
    if any(t is None for t in ttf):
        raise ValidationError("every engine needs a known time-to-failure")
    return Dataset(
        np.stack([f.features for f in features]),
        np.array(ttf, dtype=float),
        family,
    )


def _case_cell(
    train_feats, test_feats, config: CaseStudyConfig, epsilon: float, threads: int
) -> tuple:
    family = config.family
    train = _features_as_dataset(train_feats, family)
    spec = fit_scaling(train)
    std_train = apply_scaling(train, spec)
    x_test = np.stack([f.features for f in test_feats])
    y_test = np.array([f.ttf for f in test_feats], dtype=float)

    def score(result):
        pred = predict_response(result.params, x_test, spec, family, config.predict_mode)
        return relative_errors(pred, y_test)

    nondp_errors = nondp_failure = None
    try:
        nondp_errors = score(fit_mle(std_train, family))
    except _FIT_FAILURES as exc:
        nondp_failure = str(exc)

    budget = PrivacyBudget(epsilon)

    def one_rep(rep: int) -> TrialResult:
        # The deterministic non-private errors ride along on repetition 0
        # only, so raw files carry them once.
        nondp = nondp_errors if rep == 0 else None
        failure = nondp_failure if rep == 0 else None
        try:
            errors = score(fit_dp(std_train, family, budget, config.seed_base + rep))
            return TrialResult(rep, errors, nondp, None, failure)
        except _FIT_FAILURES as exc:
            return TrialResult(rep, None, nondp, str(exc), failure)

    reps = range(config.repetitions)
    if threads <= 1:
        trials = [one_rep(r) for r in reps]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            trials = list(pool.map(one_rep, reps))

    dp_pooled, dp_failures = _pool(trials, "dp")
    nondp_summary = _summary_or_none(nondp_errors) if nondp_errors is not None else None
    return trials, dp_pooled, dp_failures, nondp_summary, (0 if nondp_errors is not None else 1)


def run_case_study(
    train_signals,
    test_signals,
    config: CaseStudyConfig = CaseStudyConfig(),
    *,
    out_dir=None,
    threads: int = 1,
) -> list[ExperimentRecord]:
    """Sweep component count (at fixed epsilon) or epsilon (at fixed k).

    The non-private arm is deterministic and fit once per cell; the private
    arm repeats with seeds seed_base, seed_base + 1, ... and pools the
    per-engine errors across repetitions.
    """
    from .reports import write_raw_errors

    if config.sweep == "dimension":
        cells = [("dimension", int(k), int(k), config.epsilon) for k in config.k_values]
    else:
        cells = [
            ("epsilon", float(eps), config.k, float(eps))
            for eps in config.epsilon_values
        ]
    if not cells:
        raise ValidationError("nothing to sweep")

    k_max = max(k for _, _, k, _ in cells)
    train_all, test_all, _ = pca_fuse(train_signals, test_signals, config.sensor_ids, k_max)

    records = []
    for factor, value, k, epsilon in cells:
        train_k = [dataclasses.replace(f, features=f.features[:k]) for f in train_all]
        test_k = [dataclasses.replace(f, features=f.features[:k]) for f in test_all]
        trials, dp_pooled, dp_failures, nondp_summary, nondp_failures = _case_cell(
            train_k, test_k, config, epsilon, threads
        )
        raw_path = None
        if out_dir is not None:
            raw_path = write_raw_errors(out_dir, factor, value, trials)
        records.append(
            ExperimentRecord(
                factor_name=factor,
                factor_value=value,
                dp_summary=_summary_or_none(dp_pooled),
                nondp_summary=nondp_summary,
                dp_failures=dp_failures,
                nondp_failures=nondp_failures,
                raw_errors_path=raw_path,
            )
        )
    return records
