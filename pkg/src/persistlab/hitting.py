"""First-hitting kernels and asymptotic relations between survival probabilities.

For an integer-valued walk started at level ``j`` in state ``x``,
``kernel.probs[i, y]`` is the probability that the walk's first excursion to
level ``i`` or below lands exactly on ``i`` with the chain in state ``y``
(staying strictly above ``i`` beforehand).  For skip-free-down walks this is
the plain first-visit law of level ``i``; for walks with steps below -1 the
walk may jump past a level, and the mass that lands strictly below ``i`` is
reported separately as ``missed``.  This "land on the level" version is the
kernel for which the survival decomposition

    Q^x(j, t) = sum_{i<=j} sum_{s<=t} sum_y a^x_j(i, s, y) Q^y(0, t - s)

is exact, which is what the asymptotic relations below rest on.

``prop34_check`` evaluates the three relations between survival
probabilities at a finite time: the one-step relation (exact, it is the
survival recursion), the hitting-kernel relation (a ratio tending to 1), and
their composition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .chain import WalkModel
from .errors import ValidationError
from .survival import survival_dp

KERNEL_TAIL_TOL = 1e-6


@dataclass
class HittingKernel:
    """First-hitting distributions from one start (state, level).

    ``probs[i, y]``: first passage to <= i lands exactly on level i in state
    y; ``missed[i]``: it lands strictly below i; ``tail[i]``: it has not
    happened within the horizon (monotone decreasing in the horizon).
    ``probs[j] `` is the point mass at the start state (time 0).
    """

    model: WalkModel
    x: int
    j: int
    horizon: int
    probs: np.ndarray
    missed: np.ndarray
    tail: np.ndarray
    cap: Optional[int] = None

    def flat(self) -> np.ndarray:
        """Level-summed end-state law ``p^x_j(y) = sum_i probs[i, y]``."""
        return self.probs.sum(axis=0)


def hitting_kernel(
    model: WalkModel, x: int, j: int, horizon: int, cap: Optional[int] = None
) -> HittingKernel:
    """Hitting kernel by dynamic programming over (time, level, state).

    Runs one absorption program per target level ``i <= j``.  Without a
    ``cap`` the level range grows with the horizon and the result is exact;
    with a cap, mass that climbs above ``start level + cap`` is left in the
    tail (it could in truth return, so a generous cap is needed only for
    very long horizons).
    """
    g = model.g_int
    if horizon < 1:
        raise ValidationError("BAD_TIME", f"horizon must be >= 1, got {horizon}")
    if j < 0:
        raise ValidationError("BAD_LEVEL", f"start level must be >= 0, got {j}")
    n = model.n_states
    probs = np.zeros((j + 1, n))
    missed = np.zeros(j + 1)
    tail = np.zeros(j + 1)
    probs[j, x] = 1.0  # first visit to the start level happens at time 0
    for i in range(j):
        p_i, m_i, t_i = _absorption_dp(model, x, j - i, horizon, cap)
        probs[i] = p_i
        missed[i] = m_i
        tail[i] = t_i
    return HittingKernel(
        model=model, x=x, j=j, horizon=horizon, probs=probs, missed=missed, tail=tail, cap=cap
    )


def _absorption_dp(model: WalkModel, x: int, start: int, horizon: int, cap: Optional[int]):
    """Absorb at the first step reaching relative level <= 0; start > 0."""
    g = model.g_int
    n = model.n_states
    g_max = int(g.max())
    exact_top = start + horizon * max(g_max, 0)
    R = exact_top if cap is None else min(start + int(cap), exact_top)
    # alive[l-1, y]: mass at relative level l in state y (l = 1..R)
    alive = np.zeros((R, n))
    alive[start - 1, x] = 1.0
    landed = np.zeros(n)
    missed = 0.0
    overflow = 0.0  # mass pushed above the cap; stays "alive" unaccounted
    P = model.P
    B = np.empty_like(alive)
    for _ in range(horizon):
        np.matmul(alive, P, out=B)  # B[l-1, y] = mass arriving in state y from level l
        alive.fill(0.0)
        for y in range(n):
            gy = int(g[y])
            col = B[:, y]
            if gy > 0:
                if gy < R:
                    alive[gy:, y] = col[: R - gy]
                    overflow += float(col[R - gy :].sum())
                else:
                    overflow += float(col.sum())
            elif gy == 0:
                alive[:, y] = col
            else:
                k = -gy
                # relative level l steps to l - k: l == k lands exactly on the
                # target, l < k jumps past it, l > k stays alive
                if k - 1 < R:
                    landed[y] += float(col[k - 1])
                missed += float(col[: min(k - 1, R)].sum())
                if k < R:
                    alive[: R - k, y] = col[k:]
        if not alive.any():
            break
    tailmass = float(alive.sum()) + overflow
    return landed, missed, tailmass


def hitting_kernel_converged(
    model: WalkModel,
    x: int,
    j: int,
    tol: float = KERNEL_TAIL_TOL,
    h0: int = 1024,
    h_max: int = 10**6,
    gamma: Optional[float] = None,
) -> HittingKernel:
    """Double the horizon until every tail is below ``tol`` (or ``h_max``).

    Mean-zero walks hit lower levels with first-passage tails decaying like
    1/sqrt(horizon), so tight tolerances need very long horizons; the final
    kernel reports whatever tail remains.
    """
    h = h0
    while True:
        cap = None
        if gamma is not None:
            cap = int(math.ceil(12.0 * gamma * math.sqrt(h))) + j + 1
        kern = hitting_kernel(model, x, j, h, cap=cap)
        if float(kern.tail.max()) < tol or h >= h_max:
            return kern
        h *= 2


@dataclass(frozen=True)
class Prop34Report:
    """Finite-time residuals of the three survival-probability relations."""

    x: int
    j: int
    t: int
    horizon: int
    relation1_residual: float
    relation2_ratio: float
    relation3_ratio: float
    kernel_tail: float


def prop34_check(
    model: WalkModel,
    x: int,
    j: int,
    t: int,
    horizon: Optional[int] = None,
    cap: Optional[int] = None,
) -> Prop34Report:
    """Evaluate the three survival relations at time ``t``.

    Relation 1 (one-step): ``Q^x(j,t) = sum_y 1{j+g(y)>=0} P(x,y)
    Q^y(j+g(y), t-1)`` holds exactly (it is the survival recursion); the
    residual is reported and should be ~1e-12.  Relation 2 replaces the
    start by the hitting kernel: ``Q^x(j,t) ~ sum_y p^x_j(y) Q^y(0,t)``; the
    ratio of the two sides tends to 1.  Relation 3 composes 1 then 2.
    """
    if j < 0:
        raise ValidationError("BAD_LEVEL", f"prop34_check needs j >= 0, got {j}")
    g = model.g_int
    H = horizon if horizon is not None else t
    levels = {j, 0}
    for y in range(model.n_states):
        if j + int(g[y]) >= 0:
            levels.add(j + int(g[y]))
        if int(g[y]) >= 0:
            levels.add(int(g[y]))
    table = survival_dp(model, sorted(levels), t, cap=cap)

    # relation 1: exact one-step recursion
    rhs1 = 0.0
    for y in range(model.n_states):
        jy = j + int(g[y])
        if jy >= 0:
            rhs1 += model.P[x, y] * table.state_series[jy][t - 1, y]
    res1 = abs(table.state_series[j][t, x] - rhs1)

    # relation 2: hitting-kernel decomposition, ratio -> 1
    kern = hitting_kernel(model, x, j, H, cap=cap)
    p_flat = kern.flat()
    rhs2 = float(p_flat @ table.state_series[0][t])
    lhs2 = float(table.state_series[j][t, x])
    ratio2 = lhs2 / rhs2 if rhs2 > 0 else math.inf

    # relation 3: one step, then hit level 0 from j + g(z)
    rhs3 = 0.0
    for z in range(model.n_states):
        gz = int(g[z])
        if gz < 0 or model.P[x, z] == 0:
            continue
        if gz == 0:
            end = np.zeros(model.n_states)
            end[z] = 1.0
        else:
            end = hitting_kernel(model, z, gz, H, cap=cap).flat()
        rhs3 += model.P[x, z] * float(end @ table.state_series[0][t - 1])
    lhs3 = float(table.state_series[0][t, x])
    ratio3 = lhs3 / rhs3 if rhs3 > 0 else math.inf
    return Prop34Report(
        x=x,
        j=j,
        t=t,
        horizon=H,
        relation1_residual=float(res1),
        relation2_ratio=float(ratio2),
        relation3_ratio=float(ratio3),
        kernel_tail=float(kern.tail.max()),
    )
