"""Second-order weight decomposition, noise calibration, and perturbation.

Both transformed log-likelihoods admit a second-order polynomial surrogate
in (p, q) whose coefficients ("weights") are plain data sums:

    sev:      w1 = -5n/2,           wq = 2n, wq2 = -(n + sum y^2)/2,
              wpq_j = sum y x_j,    wp2_j = -1/2 sum x_j^2,
              wph_jh = -1/2 sum x_j x_h              (ordered pairs, h != j)
    logistic: w1 = -n(3/2 + 2 ln 2), wq = 2n, wq2 = -(n/2 + 1/4 sum y^2),
              wpq_j = 1/2 sum y x_j, wp2_j = -1/4 sum x_j^2,
              wph_jh = -1/4 sum x_j x_h

with the intercept column x_0 = 1 included everywhere.  Privacy comes from
adding one independent Laplace draw of scale delta/epsilon to every weight,
where delta bounds the total L1 weight change between datasets differing in
a single row:

    sev:      delta = 4 + 4 sqrt(d) + d
    logistic: delta = 2 + 2 sqrt(d) + d/2

Draw order is fixed (w1, wq, wq2, wpq ascending j, wp2 ascending j, wph
row-major skipping the diagonal) so a seed fully determines a perturbation.
Nothing downstream of ``perturb_weights`` touches the data again.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._rng import as_generator, seed_as_int
from ._validate import as_scalar, as_vector, frozen
from .exceptions import ValidationError
from .families import Family
from .likelihoods import design_with_intercept
from .scaling import ScalingSpec, StandardizedDataset


@dataclass(frozen=True)
class TaylorWeights:
    """Coefficients of the quadratic surrogate in (p, q).

    ``wph`` stores the ordered-pair coefficients as a (d+1) x (d+1) matrix
    with an exactly zero diagonal (the surrogate's pair sums exclude h = j).
    """

    w1: float
    wq: float
    wq2: float
    wpq: np.ndarray
    wp2: np.ndarray
    wph: np.ndarray

    def __post_init__(self):
        wpq = frozen(as_vector(self.wpq, "wpq"))
        wp2 = frozen(as_vector(self.wp2, "wp2"))
        wph = np.array(self.wph, dtype=float)
        k = wpq.shape[0]
        if wp2.shape[0] != k or wph.shape != (k, k):
            raise ValidationError("weight blocks disagree on dimension")
        if not np.all(np.isfinite(wph)):
            raise ValidationError("wph contains non-finite entries")
        if np.any(np.diag(wph) != 0.0):
            raise ValidationError("wph diagonal must be exactly zero")
        object.__setattr__(self, "w1", as_scalar(self.w1, "w1"))
        object.__setattr__(self, "wq", as_scalar(self.wq, "wq"))
        object.__setattr__(self, "wq2", as_scalar(self.wq2, "wq2"))
        object.__setattr__(self, "wpq", wpq)
        object.__setattr__(self, "wp2", wp2)
        object.__setattr__(self, "wph", frozen(wph))

    @property
    def d(self) -> int:
        return self.wpq.shape[0] - 1

    @property
    def n_weights(self) -> int:
        k = self.d + 1
        return 3 + 2 * k + k * (k - 1)

    def flatten(self) -> np.ndarray:
        """All weights in the documented draw order."""
        k = self.d + 1
        off = ~np.eye(k, dtype=bool)
        return np.concatenate(
            [[self.w1, self.wq, self.wq2], self.wpq, self.wp2, self.wph[off]]
        )

    @staticmethod
    def unflatten(flat: np.ndarray, d: int) -> "TaylorWeights":
        k = d + 1
        expected = 3 + 2 * k + k * (k - 1)
        flat = np.asarray(flat, dtype=float)
        if flat.shape != (expected,):
            raise ValidationError(
                f"expected {expected} weights for d={d}, got shape {flat.shape}"
            )
        wph = np.zeros((k, k))
        off = ~np.eye(k, dtype=bool)
        wph[off] = flat[3 + 2 * k :]
        return TaylorWeights(
            w1=flat[0],
            wq=flat[1],
            wq2=flat[2],
            wpq=flat[3 : 3 + k],
            wp2=flat[3 + k : 3 + 2 * k],
            wph=wph,
        )

    def l1_distance(self, other: "TaylorWeights") -> float:
        if other.d != self.d:
            raise ValidationError("weight dimensions disagree")
        return float(np.sum(np.abs(self.flatten() - other.flatten())))


def weight_labels(d: int) -> list[str]:
    """Names of the flattened weights, in draw order, for audit files."""
    labels = ["w1", "wq", "wq2"]
    labels += [f"wpq_{j}" for j in range(d + 1)]
    labels += [f"wp2_{j}" for j in range(d + 1)]
    labels += [f"wph_{j}_{h}" for j in range(d + 1) for h in range(d + 1) if h != j]
    return labels


@dataclass(frozen=True)
class PrivacyBudget:
    epsilon: float

    def __post_init__(self):
        object.__setattr__(
            self, "epsilon", as_scalar(self.epsilon, "epsilon", positive=True)
        )


@dataclass(frozen=True)
class NoiseSpec:
    """Calibrated Laplace scale delta/epsilon plus the seed that drives it."""

    delta: float
    scale: float
    seed: int | None

    def __post_init__(self):
        delta = as_scalar(self.delta, "delta", positive=True)
        scale = as_scalar(self.scale, "scale", positive=True)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "scale", scale)

    @staticmethod
    def calibrate(family: Family, d: int, budget: PrivacyBudget, seed=None) -> "NoiseSpec":
        delta = sensitivity(family, d)
        return NoiseSpec(delta=delta, scale=delta / budget.epsilon, seed=seed_as_int(seed))


# ---------------------------------------------------------------------------
# Weight computation
# ---------------------------------------------------------------------------


def taylor_weights_sev(data: StandardizedDataset) -> TaylorWeights:
    xa = design_with_intercept(data)
    y = data.y
    n = data.n
    gram = xa.T @ xa
    wph = -0.5 * gram
    np.fill_diagonal(wph, 0.0)
    return TaylorWeights(
        w1=-2.5 * n,
        wq=2.0 * n,
        wq2=-0.5 * (n + float(y @ y)),
        wpq=xa.T @ y,
        wp2=-0.5 * np.diag(gram),
        wph=wph,
    )


def taylor_weights_logistic(data: StandardizedDataset) -> TaylorWeights:
    xa = design_with_intercept(data)
    y = data.y
    n = data.n
    gram = xa.T @ xa
    wph = -0.25 * gram
    np.fill_diagonal(wph, 0.0)
    return TaylorWeights(
        w1=-n * (1.5 + 2.0 * math.log(2.0)),
        wq=2.0 * n,
        wq2=-(0.5 * n + 0.25 * float(y @ y)),
        wpq=0.5 * (xa.T @ y),
        wp2=-0.25 * np.diag(gram),
        wph=wph,
    )


def taylor_weights(data: StandardizedDataset, family: Family | None = None) -> TaylorWeights:
    family = data.family if family is None else family
    if family.is_sev:
        return taylor_weights_sev(data)
    return taylor_weights_logistic(data)


# ---------------------------------------------------------------------------
# Sensitivity
# ---------------------------------------------------------------------------


def sensitivity(family: Family, d: int) -> float:
    """Worst-case total L1 weight change over datasets differing in one row."""
    if d < 1:
        raise ValidationError(f"d must be >= 1, got {d}")
    if family.is_sev:
        return 4.0 + 4.0 * math.sqrt(d) + d
    return 2.0 + 2.0 * math.sqrt(d) + 0.5 * d


def _synthetic_spec(d: int) -> ScalingSpec:
    return ScalingSpec(np.zeros(d), np.ones(d), -1.0, 1.0, d)


def _bounded_row(rng: np.random.Generator, d: int, corner: bool) -> tuple[np.ndarray, float]:
    # Rows respect the standardization bounds: features in [0, 1/sqrt(d)],
    # response in [-1, 1].  Corner draws stress the extremal weight changes.
    limit = 1.0 / math.sqrt(d)
    if corner:
        x = limit * rng.integers(0, 2, size=d).astype(float)
        y = float(rng.integers(0, 2) * 2 - 1)
    else:
        x = limit * rng.random(d)
        y = float(rng.uniform(-1.0, 1.0))
    return x, y


def empirical_sensitivity(
    family: Family,
    n: int,
    d: int,
    trials: int,
    seed=0,
    *,
    corner_fraction: float = 0.5,
) -> float:
    """Maximum observed L1 weight change over random neighboring datasets.

    Each trial draws a shared base of n-1 rows plus two candidate final rows,
    builds both datasets in full, and measures the total L1 distance between
    their weight sets.  The result is guaranteed (and asserted in tests) to
    stay below ``sensitivity(family, d)``.
    """
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    if n < 1:
        raise ValidationError("n must be >= 1")
    rng = as_generator(seed)
    spec = _synthetic_spec(d)
    limit = 1.0 / math.sqrt(d)
    worst = 0.0
    for _ in range(trials):
        x_base = limit * rng.random((n - 1, d))
        y_base = rng.uniform(-1.0, 1.0, size=n - 1)
        rows = [
            _bounded_row(rng, d, rng.random() < corner_fraction) for _ in range(2)
        ]
        weights = []
        for x_last, y_last in rows:
            data = StandardizedDataset(
                np.vstack([x_base, x_last]),
                np.append(y_base, y_last),
                spec,
                family,
            )
            weights.append(taylor_weights(data, family))
        worst = max(worst, weights[0].l1_distance(weights[1]))
    return worst


# ---------------------------------------------------------------------------
# Laplace sampling and perturbation
# ---------------------------------------------------------------------------


def _laplace_transform(u: np.ndarray, scale: float) -> np.ndarray:
    # Inverse CDF of the zero-mean Laplace for u in (-1/2, 1/2).
    mag = 1.0 - 2.0 * np.abs(u)
    mag = np.maximum(mag, np.finfo(float).tiny)
    return -scale * np.sign(u) * np.log(mag)


def laplace_sample(scale: float, rng) -> float:
    """One inverse-CDF Laplace draw; deterministic given the generator state."""
    scale = as_scalar(scale, "scale", positive=True)
    rng = as_generator(rng)
    return float(_laplace_transform(rng.random() - 0.5, scale))


def perturb_weights(
    weights: TaylorWeights, family: Family, budget: PrivacyBudget, seed
) -> TaylorWeights:
    """Add one independent Laplace draw of scale delta/epsilon to every weight.

    Every ordered off-diagonal pair (j, h) and (h, j) receives its own draw;
    the diagonal of wph stays exactly zero.  The draw order matches
    ``TaylorWeights.flatten``, so (seed, epsilon, d, family) fully determine
    the output.
    """
    noise_spec = NoiseSpec.calibrate(family, weights.d, budget, seed)
    rng = as_generator(seed)
    u = rng.random(weights.n_weights) - 0.5
    flat = weights.flatten() + _laplace_transform(u, noise_spec.scale)
    return TaylorWeights.unflatten(flat, weights.d)


# ---------------------------------------------------------------------------
# The quadratic surrogate as an objective
# ---------------------------------------------------------------------------


class QuadraticObjective:
    """Value, gradient, and constant Hessian of the weight polynomial.

    In v = (p_0, ..., p_d, q) the polynomial is w1 + g'v + v'Hv/2 with a
    linear term g that is zero except for the wq entry.
    """

    def __init__(self, weights: TaylorWeights):
        self.weights = weights
        self._hess, self._lin = quadratic_parts(weights)

    def value(self, p, q) -> float:
        w = self.weights
        p = np.asarray(p, dtype=float)
        return float(
            w.w1
            + w.wq * q
            + w.wq2 * q * q
            + q * (w.wpq @ p)
            + w.wp2 @ (p * p)
            + p @ w.wph @ p
        )

    def gradient(self, p, q) -> np.ndarray:
        v = np.append(np.asarray(p, dtype=float), q)
        return self._lin + self._hess @ v

    def hessian(self) -> np.ndarray:
        return self._hess.copy()

    def linear_term(self) -> np.ndarray:
        return self._lin.copy()


def quadratic_parts(weights: TaylorWeights) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric Hessian and linear term of the surrogate in v = (p, q)."""
    k = weights.d + 2
    hess = np.zeros((k, k))
    hess[:-1, :-1] = weights.wph + weights.wph.T
    hess[np.diag_indices(k - 1)] = 2.0 * weights.wp2
    hess[:-1, -1] = weights.wpq
    hess[-1, :-1] = weights.wpq
    hess[-1, -1] = 2.0 * weights.wq2
    lin = np.zeros(k)
    lin[-1] = weights.wq
    return hess, lin


# ---------------------------------------------------------------------------
# Executable privacy check
# ---------------------------------------------------------------------------


def privacy_ratio_bound(
    w_d: TaylorWeights,
    w_d2: TaylorWeights,
    observed: TaylorWeights,
    family: Family,
    budget: PrivacyBudget,
) -> float:
    """Log density ratio of one observed output under two neighbor datasets.

    Computed analytically from the Laplace densities: the product over all
    weights collapses to (epsilon/delta) * (||obs - w_d2||_1 - ||obs - w_d||_1),
    which the triangle inequality bounds by epsilon whenever the datasets are
    genuine neighbors.
    """
    if w_d.d != w_d2.d or w_d.d != observed.d:
        raise ValidationError("weight dimensions disagree")
    delta = sensitivity(family, w_d.d)
    obs = observed.flatten()
    gap = np.sum(np.abs(obs - w_d2.flatten())) - np.sum(np.abs(obs - w_d.flatten()))
    return float(budget.epsilon / delta * gap)


def max_privacy_ratio(
    family: Family,
    d: int,
    budget: PrivacyBudget,
    *,
    pairs: int = 1000,
    observed_per_pair: int = 10,
    n: int = 8,
    seed=0,
) -> float:
    """Largest log density ratio over random neighbor pairs and outputs.

    The observed outputs are actual mechanism draws (weights of one dataset
    plus calibrated noise); the bound holds for arbitrary outputs, and the
    mechanism's own outputs are where the ratio matters.
    """
    if pairs < 1 or observed_per_pair < 1:
        raise ValidationError("pairs and observed_per_pair must be >= 1")
    rng = as_generator(seed)
    spec = _synthetic_spec(d)
    limit = 1.0 / math.sqrt(d)
    scale = sensitivity(family, d) / budget.epsilon
    worst = -np.inf
    for _ in range(pairs):
        x_base = limit * rng.random((n - 1, d))
        y_base = rng.uniform(-1.0, 1.0, size=n - 1)
        pair = []
        for _ in range(2):
            x_last, y_last = _bounded_row(rng, d, rng.random() < 0.5)
            data = StandardizedDataset(
                np.vstack([x_base, x_last]), np.append(y_base, y_last), spec, family
            )
            pair.append(taylor_weights(data, family))
        w_a, w_b = pair
        flat_a = w_a.flatten()
        for _ in range(observed_per_pair):
            u = rng.random(flat_a.shape[0]) - 0.5
            observed = TaylorWeights.unflatten(
                flat_a + _laplace_transform(u, scale), d
            )
            worst = max(worst, privacy_ratio_bound(w_a, w_b, observed, family, budget))
    return float(worst)
