"""Maximization of the perturbed quadratic surrogate and parameter recovery.

Noise can destroy concavity of the surrogate, in which case "maximize" is
ill-posed.  The repair replaces every Hessian eigenvalue lambda by
-max(|lambda|, floor) before solving, then returns the unique maximizer of
the repaired quadratic.  Two details matter:

* Flipping signs (rather than clamping near-positive eigenvalues to a tiny
  negative number) keeps the repaired curvature on the scale of the
  eigenvalue that was actually observed; the ``repair="clamp"`` mode exists
  to demonstrate how clamping lets the solution blow up by many orders of
  magnitude along noise directions.
* ``fit_dp`` raises the floor to the noise's own eigenvalue scale,
  noise_scale * sqrt(d + 2).  An observed eigenvalue below that level is
  indistinguishable from pure noise, and dividing by it would amplify a
  direction that carries no signal; flooring shrinks such directions
  instead.  The floor depends only on public quantities (d, the sensitivity
  constant, and epsilon), so the repair remains pure post-processing and
  spends no additional privacy budget.

When the unconstrained maximizer lands at q below ``q_min`` the quadratic is
re-solved over p with q pinned at ``q_min``; a positive scale parameter is a
hard model invariant, so the boundary solve is the minimal intervention and
gets flagged in the diagnostics.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from ._rng import seed_as_int
from .data import FitDiagnostics, FitResult, TransformedParams
from .exceptions import SolverError, ValidationError
from .families import Family
from .mechanism import (
    PrivacyBudget,
    QuadraticObjective,
    TaylorWeights,
    perturb_weights,
    quadratic_parts,
    sensitivity,
    taylor_weights,
)

CONCAVITY_FLOOR = 1e-8
Q_MIN = 1e-6


def solve_quadratic(
    weights: TaylorWeights,
    *,
    concavity_floor: float = CONCAVITY_FLOOR,
    curvature_floor: float | None = None,
    q_min: float = Q_MIN,
    repair: str = "flip",
) -> tuple[TransformedParams, FitDiagnostics]:
    """Stationary maximizer of the (repaired) quadratic surrogate.

    ``concavity_floor`` is the non-concavity detection threshold (the
    diagnostics flag); ``curvature_floor``, when given, is the larger level
    at which eigenvalue magnitudes are flattened so that directions whose
    curvature is indistinguishable from noise are never divided by.  The
    returned diagnostics' ``objective_value`` is the original perturbed
    polynomial (including its constant term) evaluated at the solution.
    """
    if repair not in ("flip", "clamp"):
        raise ValidationError(f"unknown repair policy {repair!r}")
    hess, lin = quadratic_parts(weights)
    if not np.all(np.isfinite(hess)) or not np.all(np.isfinite(lin)):
        raise ValidationError("weights must be finite")
    floor = max(concavity_floor, curvature_floor or 0.0)

    eigvals, eigvecs = np.linalg.eigh(hess)
    repaired = bool(eigvals[-1] > -concavity_floor)
    if repair == "flip":
        eigvals_used = -np.maximum(np.abs(eigvals), floor)
    else:
        eigvals_used = np.minimum(eigvals, -floor)

    # Stationary point of the repaired quadratic: H v = -g in the eigenbasis.
    v = eigvecs @ (-(eigvecs.T @ lin) / eigvals_used)
    if not np.all(np.isfinite(v)):
        raise SolverError("quadratic solve produced non-finite parameters")

    q_clamped = bool(v[-1] < q_min)
    if q_clamped:
        hess_rep = (eigvecs * eigvals_used) @ eigvecs.T
        p = np.linalg.solve(hess_rep[:-1, :-1], -hess_rep[:-1, -1] * q_min)
        if not np.all(np.isfinite(p)):
            raise SolverError("constrained quadratic solve failed")
        params = TransformedParams(p, q_min)
    else:
        params = TransformedParams(v[:-1], float(v[-1]))

    diagnostics = FitDiagnostics(
        objective_value=QuadraticObjective(weights).value(params.p, params.q),
        concavity_repaired=repaired,
        q_clamped=q_clamped,
    )
    return params, diagnostics


def fit_dp(
    data,
    family: Family | None,
    budget: PrivacyBudget,
    seed,
    *,
    concavity_floor: float = CONCAVITY_FLOOR,
    q_min: float = Q_MIN,
) -> FitResult:
    """Private fit: weights -> calibrated Laplace noise -> quadratic solve.

    Deterministic given (data, family, epsilon, seed); the Laplace draws are
    the only data-dependent randomness, and the concavity repair runs
    strictly after them.
    """
    family = data.family if family is None else family
    noiseless = taylor_weights(data, family)
    noisy = perturb_weights(noiseless, family, budget, seed)
    noise_scale = sensitivity(family, data.d) / budget.epsilon
    transformed, diagnostics = solve_quadratic(
        noisy,
        concavity_floor=concavity_floor,
        curvature_floor=noise_scale * np.sqrt(data.d + 2),
        q_min=q_min,
    )
    diagnostics = replace(diagnostics, noise_seed=seed_as_int(seed))
    return FitResult(transformed.to_model(), transformed, diagnostics)
