"""Survival probabilities, the backward running maximum, and their identities.

``Q^x(j, t)`` is the probability that the walk started at level ``j`` in
chain state ``x`` stays >= 0 for its first ``t`` steps; ``Q*(j, t)`` is its
stationary mixture over ``x``.  For integer-valued increments these are
computed exactly by a backward dynamic program over (level, state); a brute
force path enumeration provides an independent oracle.

The exact duality pinned here (by enumeration, see ``duality_gap``):

    P( M(t) - M(t-1) >= r ) = Q*(-r, t)      for r > 0,

where ``M(t)`` is the running maximum (including the zero at step 0) of the
time-reversed walk.  Integrating over ``r`` ties ``E[M(t)]`` to the
integrated survival probability, which decays like
``gamma / sqrt(2 pi t)`` with ``gamma^2`` the limiting variance.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .chain import WalkModel, sample_stationary_paths
from .errors import ComputationError, ValidationError
from .seeding import as_seedspec

BRUTE_FORCE_LIMIT = 10**7


# ---------------------------------------------------------------------------
# Exact dynamic program
# ---------------------------------------------------------------------------


@dataclass
class SurvivalTable:
    """Exact survival probabilities for a set of start levels.

    ``state_series[j][t, x] = Q^x(j, t)`` and ``marginal[j][t] = Q*(j, t)``
    for each requested start level ``j`` (negative levels allowed) and all
    ``t <= t_max``.  ``final_slice[j, x]`` holds the full nonnegative-level
    slice at ``t_max``.  When a level cap is set, levels above it count as
    certain survival and ``capped`` is True; without a cap the program is
    exact for every requested level.
    """

    model: WalkModel
    t_max: int
    levels: tuple
    state_series: dict
    marginal: dict
    level_bound: int
    cap: Optional[int]
    capped: bool
    final_slice: np.ndarray
    grid: Optional[np.ndarray] = None

    def q(self, j: int, t: int, state: Optional[int] = None) -> float:
        """Q^x(j, t) for a requested level (marginal over x when state is None)."""
        if j not in self.state_series:
            raise ValidationError("LEVEL_NOT_TRACKED", f"level {j} was not requested")
        if state is None:
            return float(self.marginal[j][t])
        return float(self.state_series[j][t, state])


def survival_dp(
    model: WalkModel,
    levels,
    t_max: int,
    cap: Optional[int] = None,
    keep_grid: bool = False,
) -> SurvivalTable:
    """Exact survival table by backward dynamic programming.

    One step of the recursion (also the exact, pre-asymptotic form of the
    first survival-probability relation):

        Q^x(j, t) = sum_y 1{j + g(y) >= 0} P(x, y) Q^y(j + g(y), t - 1)

    Parameters
    ----------
    levels : int or iterable of int
        Start levels whose full time series to record; may be negative.
    cap : int, optional
        Treat levels above ``cap`` as certain survival (with the flag set in
        the result).  Without a cap the level bound is chosen so the result
        is exact.
    """
    g = model.g_int  # raises NON_INTEGER_G
    if t_max < 0:
        raise ValidationError("BAD_TIME", f"t_max must be >= 0, got {t_max}")
    if np.isscalar(levels):
        levels = [int(levels)]
    levels = tuple(sorted({int(j) for j in levels}))
    if not levels:
        raise ValidationError("BAD_LEVEL", "no start levels requested")
    g_max = int(g.max())
    top_req = max(max(levels), 0)
    if cap is not None:
        cap = int(cap)
        if cap < top_req:
            raise ValidationError("CAP_TOO_LOW", f"cap {cap} below requested level {top_req}")
        L = cap
        capped = True
    else:
        L = top_req + t_max * max(g_max, 0)
        capped = False

    n = model.n_states
    pi = model.pi
    PT = np.ascontiguousarray(model.P.T)
    P = model.P
    Q = np.ones((L + 1, n))
    Q_next = np.empty_like(Q)
    S = np.empty_like(Q)

    state_series = {j: np.empty((t_max + 1, n)) for j in levels}
    marginal = {}
    for j in levels:
        state_series[j][0] = 1.0  # empty constraint set survives surely
    grid = None
    if keep_grid:
        if (t_max + 1) * (L + 1) * n > 2 * 10**7:
            raise ComputationError("TOO_LARGE", "grid too large to retain; use keep_grid=False")
        grid = np.empty((t_max + 1, L + 1, n))
        grid[0] = 1.0

    for t in range(1, t_max + 1):
        for y in range(n):
            gy = int(g[y])
            col = S[:, y]
            if gy >= 0:
                hi = L + 1 - gy
                col[:hi] = Q[gy:, y]
                col[hi:] = 1.0  # above the bound: certain survival
            else:
                col[:-gy] = 0.0
                col[-gy:] = Q[: L + 1 + gy, y]
        np.matmul(S, PT, out=Q_next)
        for j in levels:
            if j >= 0:
                state_series[j][t] = Q_next[j]
            else:
                acc = np.zeros(n)
                for y in range(n):
                    jy = j + int(g[y])
                    if jy >= 0:
                        acc += P[:, y] * (Q[jy, y] if jy <= L else 1.0)
                state_series[j][t] = acc
        Q, Q_next = Q_next, Q
        if grid is not None:
            grid[t] = Q
    for j in levels:
        marginal[j] = state_series[j] @ pi
    return SurvivalTable(
        model=model,
        t_max=t_max,
        levels=levels,
        state_series=state_series,
        marginal=marginal,
        level_bound=L,
        cap=cap,
        capped=capped,
        final_slice=Q.copy(),
        grid=grid,
    )


def suggested_cap(gamma: float, t: int, base: int = 0) -> int:
    """Level cap with negligible truncation error: ceil(12 gamma sqrt(t))."""
    return base + int(math.ceil(12.0 * gamma * math.sqrt(max(t, 1))))


def integrated_survival_dp(model: WalkModel, t: int, cap: Optional[int] = None) -> float:
    """Exact integral of Q*(-r, t) over r > 0 for integer-valued models.

    The integrand is constant on (m-1, m], so the integral collapses to
    ``sum_{m=1..g_max} Q*(-m, t)`` (levels below ``-g_max`` cannot survive
    their first step).
    """
    g = model.g_int
    g_max = int(g.max())
    if g_max <= 0:
        return 0.0
    lv = [-m for m in range(1, g_max + 1)]
    table = survival_dp(model, lv, t, cap=cap)
    return float(sum(table.marginal[j][t] for j in lv))


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------


def survival_bruteforce(model: WalkModel, j, t: int, state: Optional[int] = None) -> float:
    """Exact survival probability by full path enumeration.

    Exhausts either all color streams (window models) or all state paths
    (general chains, in exact rational arithmetic when the model carries
    exact entries).  Refuses instances above ``10**7`` paths.
    """
    if t == 0:
        return 1.0
    if model.window is not None and model.window.color_probs_exact is not None:
        return _bruteforce_window(model, j, t, state)
    return _bruteforce_generic(model, j, t, state)


def _bruteforce_window(model: WalkModel, j, t: int, state) -> float:
    win = model.window
    k = win.n_colors
    length = t + win.width
    total = k**length
    if total > BRUTE_FORCE_LIMIT:
        raise ComputationError("TOO_LARGE", f"{k}^{length} = {total} color streams")
    powers = k ** np.arange(length - 1, -1, -1, dtype=np.int64)
    colors = (np.arange(total, dtype=np.int64)[:, None] // powers) % k
    wview = np.lib.stride_tricks.sliding_window_view(colors, win.width, axis=1)
    states = win.encode(wview)
    incs = model.g_int[states[:, 1:]]
    alive = (np.cumsum(incs, axis=1) + j >= 0).all(axis=1)
    if state is not None:
        alive &= states[:, 0] == state
    count = int(np.count_nonzero(alive))
    uniform = all(p == win.color_probs_exact[0] for p in win.color_probs_exact)
    if uniform:
        # conditioning on the start window divides by P(X_0 = state) = k^-width
        prob = Fraction(count, total) if state is None else Fraction(count * k**win.width, total)
    else:
        pe = win.color_probs_exact
        prob = Fraction(0)
        idx = np.flatnonzero(alive)
        for i in idx:
            p = Fraction(1)
            for c in colors[i]:
                p *= pe[int(c)]
            prob += p
        if state is not None:
            start = Fraction(1)
            for c in win.decode(int(state)):
                start *= pe[int(c)]
            prob /= start
    return float(prob)


def _bruteforce_generic(model: WalkModel, j, t: int, state) -> float:
    n = model.n_states
    if n**t > BRUTE_FORCE_LIMIT:
        raise ComputationError("TOO_LARGE", f"{n}^{t} = {n ** t} state paths")
    exact = model.spec.P_exact is not None and model.dist.exact is not None
    if exact:
        P = model.spec.P_exact
        pi = model.dist.exact
        g = model.g_exact if model.g_exact is not None else tuple(model.g)
        jf = Fraction(j) if not isinstance(j, Fraction) else j
        zero = Fraction(0)
    else:
        P = model.P
        pi = model.pi
        g = tuple(model.g)
        jf = float(j)
        zero = 0.0
    starts = range(n) if state is None else [int(state)]
    total = zero

    def walk(x, level, steps_left, prob):
        nonlocal total
        if steps_left == 0:
            total += prob
            return
        row = P[x]
        for y in range(n):
            p = row[y]
            if p == 0:
                continue
            lv = level + g[y]
            if lv >= 0:
                walk(y, lv, steps_left - 1, prob * p)

    for x0 in starts:
        w0 = (pi[x0] if state is None else (Fraction(1) if exact else 1.0))
        if w0 == 0:
            continue
        walk(x0, jf, t, w0)
    return float(total)


# ---------------------------------------------------------------------------
# Monte Carlo estimators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo estimate with its standard error."""

    t: int
    value: float
    stderr: float
    samples: int


@dataclass(frozen=True)
class MaxStats:
    """Estimate of the expected backward running maximum at time t."""

    t: int
    estimate: float
    stderr: float
    samples: int


def _mc_batches(samples: int, t: int):
    batch = max(1, min(samples, 4_000_000 // max(t, 1)))
    n_batches = (samples + batch - 1) // batch
    sizes = [batch] * (n_batches - 1) + [samples - batch * (n_batches - 1)]
    return sizes


def _reduce_batches(fn, sizes, workers: int):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, range(len(sizes)), sizes))
    else:
        parts = [fn(i, b) for i, b in enumerate(sizes)]
    total = sum(p[0] for p in parts)  # fixed stream order
    total_sq = sum(p[1] for p in parts)
    count = sum(p[2] for p in parts)
    mean = total / count
    var = max(total_sq / count - mean * mean, 0.0)
    stderr = math.sqrt(var / count) if count > 1 else 0.0
    return mean, stderr, count


def integrated_survival_mc(
    model: WalkModel, t: int, samples: int, seed, workers: int = 1, stream_offset: int = 0
) -> McEstimate:
    """Monte Carlo estimate of the integral of Q*(-r, t) over r > 0.

    Uses the identity  integral = E[(min_{1<=k<=t} W_k)^+]  with ``W_k`` the
    k-step increment sums along a stationary forward path, which follows by
    integrating ``Q*(-r, t) = P(min_k W_k >= r)`` in ``r``.
    """
    if t < 1:
        raise ValidationError("BAD_TIME", f"t must be >= 1, got {t}")
    spec = as_seedspec(seed)
    sizes = _mc_batches(samples, t)

    def one(i: int, b: int):
        _, incs = sample_stationary_paths(model, t, b, spec, "forward", stream_offset + i)
        v = np.maximum(np.min(np.cumsum(incs, axis=1), axis=1), 0).astype(float)
        return float(v.sum()), float((v * v).sum()), b

    mean, stderr, count = _reduce_batches(one, sizes, workers)
    return McEstimate(t=t, value=mean, stderr=stderr, samples=count)


def backward_max_mc(
    model: WalkModel, t: int, samples: int, seed, workers: int = 1, stream_offset: int = 0
) -> MaxStats:
    """Unbiased estimate of E[max_{0<=k<=t} S_k] for the backward walk."""
    if t < 0:
        raise ValidationError("BAD_TIME", f"t must be >= 0, got {t}")
    if t == 0:
        return MaxStats(t=0, estimate=0.0, stderr=0.0, samples=samples)
    spec = as_seedspec(seed)
    sizes = _mc_batches(samples, t)

    def one(i: int, b: int):
        _, incs = sample_stationary_paths(model, t, b, spec, "backward", stream_offset + i)
        m = np.maximum(np.max(np.cumsum(incs, axis=1), axis=1), 0).astype(float)
        return float(m.sum()), float((m * m).sum()), b

    mean, stderr, count = _reduce_batches(one, sizes, workers)
    return MaxStats(t=t, estimate=mean, stderr=stderr, samples=count)


# ---------------------------------------------------------------------------
# Duality
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DualityGap:
    """Both sides of the running-maximum / survival duality.

    ``lhs = P(M(t) - M(t-1) >= r)`` with the maximum including its k = 0
    term; ``rhs_t = Q*(-r, t)`` and ``rhs_tm1 = Q*(-r, t-1)``.  Enumeration
    shows ``lhs == rhs_t`` (the candidate one index earlier does not match).
    """

    r: float
    t: int
    lhs: float
    rhs_t: float
    rhs_tm1: float
    exact: bool
    lhs_stderr: Optional[float] = None


def duality_gap(
    model: WalkModel,
    r: float,
    t: int,
    mode: str = "auto",
    samples: int = 200_000,
    seed=0,
) -> DualityGap:
    """Evaluate both sides of the duality identity at (r, t).

    The left side is computed exactly by path enumeration when feasible
    (``mode="auto"`` or ``"exact"``), otherwise by Monte Carlo over backward
    paths.  The right sides come from the exact survival program.
    """
    if r <= 0:
        raise ValidationError("BAD_LEVEL", f"duality needs r > 0, got {r}")
    if t < 1:
        raise ValidationError("BAD_TIME", f"t must be >= 1, got {t}")
    level = -int(math.ceil(r))  # integer increments: Q*(-r,.) = Q*(-ceil(r),.)
    table = survival_dp(model, level, t)
    rhs_t = table.q(level, t)
    rhs_tm1 = table.q(level, t - 1)

    feasible = _enumeration_size(model, t) <= BRUTE_FORCE_LIMIT
    if mode == "exact" and not feasible:
        raise ComputationError("TOO_LARGE", f"{_enumeration_size(model, t)} paths to enumerate")
    if mode in ("exact", "auto") and feasible:
        lhs = _duality_lhs_exact(model, r, t)
        return DualityGap(r=r, t=t, lhs=lhs, rhs_t=rhs_t, rhs_tm1=rhs_tm1, exact=True)
    spec = as_seedspec(seed)
    sizes = _mc_batches(samples, t)

    def one(i: int, b: int):
        _, incs = sample_stationary_paths(model, t, b, spec, "backward", i)
        sums = np.cumsum(incs, axis=1)
        m_t = np.maximum(np.max(sums, axis=1), 0)
        m_tm1 = np.maximum(np.max(sums[:, : t - 1], axis=1), 0) if t > 1 else np.zeros(b)
        hits = float(np.count_nonzero(m_t - m_tm1 >= r))
        return hits, hits, b  # indicator: sum of squares equals the sum

    mean, stderr, _ = _reduce_batches(one, sizes, workers=1)
    return DualityGap(
        r=r, t=t, lhs=mean, rhs_t=rhs_t, rhs_tm1=rhs_tm1, exact=False, lhs_stderr=stderr
    )


def _enumeration_size(model: WalkModel, t: int) -> int:
    if model.window is not None and model.window.color_probs_exact is not None:
        return model.window.n_colors ** (t + model.window.width - 1)
    return model.n_states**t


def _duality_lhs_exact(model: WalkModel, r: float, t: int) -> float:
    """P(M(t) - M(t-1) >= r) by enumerating stationary paths.

    The backward walk's partial sums have the law of suffix sums of a
    stationary forward segment, so enumeration runs over forward paths.
    """
    if model.window is not None and model.window.color_probs_exact is not None:
        win = model.window
        k = win.n_colors
        length = t + win.width - 1
        powers = k ** np.arange(length - 1, -1, -1, dtype=np.int64)
        colors = (np.arange(k**length, dtype=np.int64)[:, None] // powers) % k
        wview = np.lib.stride_tricks.sliding_window_view(colors, win.width, axis=1)
        incs = model.g_int[win.encode(wview)]  # g(X_1..X_t) per path
        suffix = np.cumsum(incs[:, ::-1], axis=1)  # suffix[k-1] = backward S_k
        m_t = np.maximum(suffix.max(axis=1), 0)
        m_tm1 = np.maximum(suffix[:, : t - 1].max(axis=1), 0) if t > 1 else np.zeros(len(incs))
        uniform = all(p == win.color_probs_exact[0] for p in win.color_probs_exact)
        hits = m_t - m_tm1 >= r
        if uniform:
            return float(Fraction(int(np.count_nonzero(hits)), k**length))
        pe = win.color_probs_exact
        prob = Fraction(0)
        for i in np.flatnonzero(hits):
            p = Fraction(1)
            for c in colors[i]:
                p *= pe[int(c)]
            prob += p
        return float(prob)

    exact = model.spec.P_exact is not None and model.dist.exact is not None
    P = model.spec.P_exact if exact else model.P
    pi = model.dist.exact if exact else model.pi
    g = model.g_exact if (exact and model.g_exact is not None) else tuple(model.g)
    n = model.n_states
    total = Fraction(0) if exact else 0.0

    def walk(x, depth, prob, path_g):
        nonlocal total
        if depth == t:
            suffix = 0
            m_t = 0
            m_tm1 = 0
            for k_back in range(1, t + 1):
                suffix = suffix + path_g[t - k_back]
                if suffix > m_t:
                    m_t = suffix
                if k_back <= t - 1 and suffix > m_tm1:
                    m_tm1 = suffix
            if m_t - m_tm1 >= r:
                total += prob
            return
        row = P[x]
        for y in range(n):
            p = row[y]
            if p == 0:
                continue
            path_g.append(g[y])
            walk(y, depth + 1, prob * p, path_g)
            path_g.pop()

    for x0 in range(n):
        if pi[x0] == 0:
            continue
        path = [g[x0]]
        walk(x0, 1, pi[x0], path)
    return float(total)


# ---------------------------------------------------------------------------
# sqrt(t) fitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SqrtFit:
    """Fitted decay constant (and exponent) of a t^(-rho) series."""

    constant: float
    exponent: float
    window: tuple
    residual: float
    mode: str


def sqrt_fit(t_values, values, window, mode: str = "fixed-half") -> SqrtFit:
    """Fit ``value ~ C * t^(-rho)`` over a window of the series.

    ``fixed-half`` pins rho = 1/2 and returns the mean and spread of
    ``value * sqrt(t)``; ``free-exponent`` least-squares log(value) against
    log(t).  The residual spread is always reported.
    """
    t_values = np.asarray(t_values, dtype=float)
    values = np.asarray(values, dtype=float)
    lo, hi = window
    mask = (t_values >= lo) & (t_values <= hi)
    if not mask.any():
        raise ValidationError("EMPTY_WINDOW", f"no series points inside [{lo}, {hi}]")
    tw = t_values[mask]
    vw = values[mask]
    if (vw <= 0).any() or (tw <= 0).any():
        raise ValidationError("NONPOSITIVE_VALUE", "fit window contains nonpositive values")
    if mode == "fixed-half":
        scaled = vw * np.sqrt(tw)
        return SqrtFit(
            constant=float(scaled.mean()),
            exponent=0.5,
            window=(lo, hi),
            residual=float(scaled.std()),
            mode=mode,
        )
    if mode == "free-exponent":
        slope, intercept = np.polyfit(np.log(tw), np.log(vw), 1)
        resid = np.log(vw) - (slope * np.log(tw) + intercept)
        return SqrtFit(
            constant=float(np.exp(intercept)),
            exponent=float(-slope),
            window=(lo, hi),
            residual=float(np.sqrt(np.mean(resid**2))),
            mode=mode,
        )
    raise ValidationError("BAD_MODE", f"unknown fit mode {mode!r}")


# ---------------------------------------------------------------------------
# Skip-free identities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SkipfreeReport:
    """Exact checks available to skip-free walks."""

    k: int
    t_max: int
    upward_checked: bool
    upward_max_diff: float
    hitting_checked: bool
    hitting_max_diff: float


def skipfree_checks(model: WalkModel, k: int, t_max: int) -> SkipfreeReport:
    """Verify the integral collapse and the first-passage identity.

    Upward skip-free walks (integer steps, maximum step +1): the integrated
    survival probability collapses to ``Q*(-1, t)`` exactly because the
    integrand is constant on 0 < r <= 1 and zero beyond.

    Walks with i.i.d. integer steps of minimum -1: the classical hitting
    identity  P(first passage to -(k+1) at time t) =
    ((k+1)/t) P(S_t = -(k+1)),  verified by two independent exact programs.
    (The variant with survival probabilities on the left fails verbatim
    already for simple +-1 steps and is not implemented.)
    """
    g = model.g_int
    g_max, g_min = int(g.max()), int(g.min())
    upward = g_max == 1
    hitting = model.iid and g_min == -1
    if not upward and not hitting:
        raise ValidationError(
            "NOT_SKIP_FREE", f"model {model.name!r}: g in [{g_min}, {g_max}] and iid={model.iid}"
        )
    up_diff = 0.0
    if upward:
        # identity holds for t >= 1 (at t = 0 every survival probability is 1)
        table = survival_dp(model, [-1, -2], t_max)
        integral = table.marginal[-1][1:] + table.marginal[-2][1:]
        up_diff = float(np.max(np.abs(integral - table.marginal[-1][1:])))
    hit_diff = 0.0
    if hitting:
        hit_diff = _hitting_identity_max_diff(model, k, t_max)
    return SkipfreeReport(
        k=k,
        t_max=t_max,
        upward_checked=upward,
        upward_max_diff=up_diff,
        hitting_checked=hitting,
        hitting_max_diff=hit_diff,
    )


def _hitting_identity_max_diff(model: WalkModel, k: int, t_max: int) -> float:
    """Compare the two sides of the first-passage identity for t <= t_max."""
    g = model.g_int
    exact = model.g_exact is not None and model.dist.exact is not None
    if exact:
        law: dict = {}
        for x in range(model.n_states):
            law[int(g[x])] = law.get(int(g[x]), Fraction(0)) + model.dist.exact[x]
        zero = Fraction(0)
    else:
        law = {}
        for x in range(model.n_states):
            law[int(g[x])] = law.get(int(g[x]), 0.0) + float(model.pi[x])
        zero = 0.0
    g_max = max(law)
    target = -(k + 1)

    # first-passage program: walk confined to levels > target, absorb on hits
    top = k + t_max * max(g_max, 0)
    alive = {0: Fraction(1) if exact else 1.0}
    # unconstrained program: full level distribution
    free = dict(alive)
    worst = 0.0
    for t in range(1, t_max + 1):
        nxt: dict = {}
        absorbed = zero
        for lv, p in alive.items():
            for step, ps in law.items():
                lv2 = lv + step
                if lv2 == target:
                    absorbed += p * ps
                elif lv2 > target and lv2 <= top:
                    nxt[lv2] = nxt.get(lv2, zero) + p * ps
        alive = nxt
        nxt_free: dict = {}
        for lv, p in free.items():
            for step, ps in law.items():
                lv2 = lv + step
                nxt_free[lv2] = nxt_free.get(lv2, zero) + p * ps
        free = nxt_free
        rhs = Fraction(k + 1, t) * free.get(target, zero) if exact else (
            (k + 1) / t * free.get(target, zero)
        )
        worst = max(worst, abs(float(absorbed - rhs)))
    return worst
