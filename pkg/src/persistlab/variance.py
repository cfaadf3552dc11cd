"""The limiting variance of the partial-sum process, three ways.

``gamma^2 = Var[g(X_0)] + 2 sum_{k>=1} Cov[g(X_0), g(X_k)]`` is the variance
constant of the functional CLT for the walk (forward and backward alike).
The three routes implemented here check each other:

* ``gamma2_series``   - truncate the covariance sum at a lag where it has
  visibly converged (may fail to converge for periodic chains; reported,
  never silently wrong);
* ``gamma2_exact``    - solve ``(I - P + 1 pi) h = P g`` and assemble
  ``pi.g^2 + 2 pi.(g h)``; algebraically identical to summing the series
  but defined for periodic chains too, and exact to solver precision;
* ``gamma2_spectral`` - the eigendecomposition form
  ``pi.g^2 + 2 sum_{|lambda_j|<1} lambda_j/(1-lambda_j) (pi g . u_j)(v_j . g)``
  for diagonalizable ``P`` (unit-modulus eigenvalues contribute nothing and
  are skipped); refused when the eigenvector basis is ill-conditioned.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .chain import WalkModel, autocovariance_exact
from .errors import ComputationError

CONDITION_LIMIT = 1e8
_CONSECUTIVE = 5  # sub-tolerance lags required before declaring convergence


@dataclass(frozen=True)
class VarianceReport:
    """A limiting-variance value and how it was obtained."""

    gamma2: float
    method: str
    converged: bool = True
    truncation_lag: Optional[int] = None
    tail_bound: Optional[float] = None
    eigenvalues: Optional[np.ndarray] = None
    conditioning: Optional[float] = None
    detail: str = ""


def gamma2_series(model: WalkModel, k_max: int = 100_000, tol: float = 1e-13) -> VarianceReport:
    """Truncated covariance series ``Var + 2 sum_k Cov_k``.

    Stops at the first lag where |Cov| stayed below ``tol`` for 5 consecutive
    lags (tolerating the sign-alternating covariances of negative
    eigenvalues), else runs to ``k_max`` and reports non-convergence.
    """
    if k_max < 1:
        raise ComputationError("NO_CONVERGENCE", f"k_max must be >= 1, got {k_max}")
    pi_g = model.pi * model.g
    mu = float(model.pi @ model.g)
    w = model.g.copy()
    total = float(pi_g @ w) - mu * mu  # lag 0: Var[g]
    small = 0
    last = np.inf
    k_stop = k_max
    converged = False
    for k in range(1, k_max + 1):
        w = model.P @ w
        cov = float(pi_g @ w) - mu * mu
        total += 2.0 * cov
        last = abs(cov)
        small = small + 1 if last < tol else 0
        if small >= _CONSECUTIVE:
            k_stop = k
            converged = True
            break
    return VarianceReport(
        gamma2=total,
        method="series",
        converged=converged,
        truncation_lag=k_stop,
        tail_bound=last,
        detail=f"tol={tol:g};lags={k_stop};converged={converged}",
    )


def gamma2_exact(model: WalkModel) -> VarianceReport:
    """Limiting variance via the fundamental-matrix linear solve.

    With mean-zero ``g``, ``h = sum_{k>=1} P^k g`` (Abel-summed for periodic
    chains) solves ``(I - P + 1 pi) h = P g``, and
    ``gamma^2 = pi.g^2 + 2 pi.(g h)``.
    """
    n = model.n_states
    A = np.eye(n) - model.P + np.outer(np.ones(n), model.pi)
    try:
        h = np.linalg.solve(A, model.P @ model.g)
    except np.linalg.LinAlgError as exc:
        raise ComputationError("SINGULAR_SYSTEM", f"fundamental-matrix solve failed: {exc}") from exc
    gamma2 = float(model.pi @ (model.g**2) + 2.0 * model.pi @ (model.g * h))
    return VarianceReport(gamma2=gamma2, method="exact", detail="fundamental-matrix solve")


def gamma2_spectral(model: WalkModel) -> VarianceReport:
    """Limiting variance from the eigendecomposition of ``P``.

    Valid for diagonalizable ``P``; raises ``DEFECTIVE_MATRIX`` when the
    eigenvector condition number exceeds 1e8 (a numerical Jordan block), in
    which case the caller should use :func:`gamma2_exact`.
    """
    lam, U = np.linalg.eig(model.P)
    cond = float(np.linalg.cond(U))
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise ComputationError(
            "DEFECTIVE_MATRIX", f"eigenvector conditioning {cond:.3g} exceeds {CONDITION_LIMIT:g}"
        )
    V = np.linalg.inv(U)
    pig = model.pi * model.g
    acc = 0.0 + 0.0j
    skipped = 0
    for j in range(model.n_states):
        if abs(lam[j]) >= 1.0 - 1e-9:
            # unit-modulus eigenvalues: lambda = 1 contributes 0 by mean-zero
            # g; others cancel whenever the covariance series converges
            skipped += 1
            continue
        acc += lam[j] / (1.0 - lam[j]) * (pig @ U[:, j]) * (V[j, :] @ model.g)
    gamma2 = float(model.pi @ (model.g**2)) + 2.0 * float(np.real(acc))
    if abs(np.imag(acc)) > 1e-8:
        raise ComputationError(
            "DEFECTIVE_MATRIX", f"spectral sum has imaginary part {np.imag(acc):.3g}"
        )
    order = np.argsort(-np.abs(lam))
    return VarianceReport(
        gamma2=gamma2,
        method="spectral",
        eigenvalues=lam[order],
        conditioning=cond,
        detail=f"cond={cond:.3g};unit_modulus_skipped={skipped}",
    )


def gamma2_all(model: WalkModel, k_max: int = 100_000, tol: float = 1e-13) -> dict:
    """All applicable methods keyed by name (spectral omitted when defective)."""
    out = {"exact": gamma2_exact(model), "series": gamma2_series(model, k_max, tol)}
    try:
        out["spectral"] = gamma2_spectral(model)
    except ComputationError:
        pass
    return out


def autocovariances(model: WalkModel, k_max: int) -> np.ndarray:
    """Exact Cov[g(X_0), g(X_k)] for k = 0..k_max (repeated matvecs)."""
    return np.array([autocovariance_exact(model, k) for k in range(k_max + 1)])
