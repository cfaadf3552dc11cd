"""Finite-state stationary Markov chains with a mean-zero increment functional.

The central object is a :class:`WalkModel`: an irreducible row-stochastic
matrix ``P`` on ``n`` states, its stationary law ``pi``, and a real functional
``g`` with ``sum(pi * g) == 0``.  The partial sums ``S_t = S_{t-1} + g(X_t)``
of ``g`` along a stationary path form the random walk whose persistence the
rest of the package studies.

Presets built from exact rationals carry ``Fraction`` copies of ``P``, ``pi``
and ``g`` so that brute-force oracles can run in exact arithmetic.  Chains
that arise as sliding windows over an i.i.d. color (or value) sequence carry
a :class:`WindowInfo`, which samplers and enumerators exploit: a path of the
window chain is just a contiguous block of i.i.d. draws.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import ComputationError, ParseError, ValidationError
from .seeding import as_seedspec

STATIONARY_RESIDUAL_TOL = 1e-10
ROW_SUM_TOL = 1e-12
MEAN_ZERO_TOL = 1e-10


@dataclass(frozen=True)
class WindowInfo:
    """Sliding-window structure of a chain over an i.i.d. base sequence.

    The state at time ``k`` is the tuple of ``width`` consecutive base draws
    starting at position ``k``; transitions shift the window right by one.
    State indices encode windows in base ``n_colors`` with the leftmost
    (oldest) entry as the most significant digit.
    """

    width: int
    n_colors: int
    color_probs: tuple
    color_probs_exact: Optional[tuple] = None

    def encode(self, digits: np.ndarray) -> np.ndarray:
        """Map windows (last axis = ``width`` digits) to state indices."""
        weights = self.n_colors ** np.arange(self.width - 1, -1, -1)
        return np.asarray(digits) @ weights

    def decode(self, state: int) -> tuple:
        """Inverse of :meth:`encode` for a single state index."""
        digits = []
        for p in range(self.width - 1, -1, -1):
            digits.append((state // self.n_colors**p) % self.n_colors)
        return tuple(digits)


@dataclass(frozen=True)
class MarkovSpec:
    """A candidate transition matrix and state labels.

    ``P_exact``, when present, holds the same entries as ``P`` as Fractions;
    exact-arithmetic oracles require it.
    """

    P: np.ndarray
    labels: tuple
    P_exact: Optional[tuple] = None

    @property
    def n_states(self) -> int:
        return self.P.shape[0]

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))


@dataclass(frozen=True)
class StationaryDist:
    """Stationary probability vector, optionally with exact entries."""

    pi: np.ndarray
    exact: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "pi", np.asarray(self.pi, dtype=float))


@dataclass(frozen=True)
class WalkModel:
    """A validated chain plus a mean-zero increment functional.

    Attributes
    ----------
    spec : MarkovSpec
        Transition matrix and labels (validated).
    dist : StationaryDist
        Stationary law of the chain.
    g : ndarray
        Increment value per state; ``sum(pi * g) == 0`` within 1e-10.
    integer_valued : bool
        True when every ``g(x)`` is an exact integer (enables the exact
        survival dynamic programs).
    window : WindowInfo or None
        Sliding-window structure, when the chain has one.
    """

    spec: MarkovSpec
    dist: StationaryDist
    g: np.ndarray
    integer_valued: bool
    g_exact: Optional[tuple] = None
    window: Optional[WindowInfo] = None
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "g", np.asarray(self.g, dtype=float))

    @property
    def n_states(self) -> int:
        return self.spec.n_states

    @property
    def P(self) -> np.ndarray:
        return self.spec.P

    @property
    def pi(self) -> np.ndarray:
        return self.dist.pi

    @property
    def g_max(self) -> float:
        return float(self.g.max())

    @property
    def g_min(self) -> float:
        return float(self.g.min())

    @property
    def g_int(self) -> np.ndarray:
        if not self.integer_valued:
            raise ValidationError("NON_INTEGER_G", f"model {self.name!r} has non-integer increments")
        return np.rint(self.g).astype(np.int64)

    def state_index(self, label: str) -> int:
        try:
            return self.spec.labels.index(str(label))
        except ValueError:
            raise ValidationError(
                "UNKNOWN_STATE", f"no state labeled {label!r} in model {self.name!r}"
            ) from None

    @property
    def iid(self) -> bool:
        """True when increments are i.i.d. (all rows of P identical)."""
        return bool(np.all(self.P == self.P[0]))


def validate(spec: MarkovSpec) -> None:
    """Check row-stochasticity and irreducibility; raise on violation.

    Raises
    ------
    ValidationError
        ``NEGATIVE_ENTRY`` for entries outside [0, 1], ``NOT_STOCHASTIC``
        for a row sum off 1 by more than 1e-12 (the offending row/entry is
        named), ``REDUCIBLE`` when the digraph of positive entries is not
        strongly connected.
    """
    P = spec.P
    n = spec.n_states
    if P.ndim != 2 or P.shape != (n, n) or n < 1:
        raise ValidationError("NOT_STOCHASTIC", f"P must be square, got shape {P.shape}")
    if len(spec.labels) != n:
        raise ValidationError("NOT_STOCHASTIC", f"{len(spec.labels)} labels for {n} states")
    bad = np.argwhere((P < 0) | (P > 1))
    if bad.size:
        i, j = bad[0]
        raise ValidationError(
            "NEGATIVE_ENTRY", f"entry P[{i},{j}] = {P[i, j]} outside [0, 1]"
        )
    sums = P.sum(axis=1)
    off = np.abs(sums - 1.0)
    if off.max() > ROW_SUM_TOL:
        i = int(off.argmax())
        raise ValidationError("NOT_STOCHASTIC", f"row {i} sums to {sums[i]!r}")
    if not _strongly_connected(P > 0):
        raise ValidationError("REDUCIBLE", "positive-entry digraph is not strongly connected")


def _strongly_connected(adj: np.ndarray) -> bool:
    # strongly connected iff node 0 reaches all nodes in adj and in adj.T
    return _reaches_all(adj) and _reaches_all(adj.T)


def _reaches_all(adj: np.ndarray) -> bool:
    n = adj.shape[0]
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    frontier = [0]
    while frontier:
        nxt = adj[frontier].any(axis=0) & ~seen
        seen |= nxt
        frontier = list(np.flatnonzero(nxt))
    return bool(seen.all())


def stationary(spec: MarkovSpec) -> StationaryDist:
    """Stationary distribution by direct linear solve (not simulation).

    Solves ``pi P = pi`` with one equation replaced by the normalization
    ``sum(pi) = 1``; exact up to solver precision and valid for periodic
    chains.  When ``spec.P_exact`` is present the same system is also solved
    in exact rational arithmetic.
    """
    n = spec.n_states
    A = spec.P.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    try:
        pi = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise ComputationError("SINGULAR", f"stationary solve failed: {exc}") from exc
    pi = np.where(np.abs(pi) < 1e-15, 0.0, pi)
    resid = np.max(np.abs(pi @ spec.P - pi))
    if pi.min() < -1e-12 or abs(pi.sum() - 1.0) > 1e-10 or resid > STATIONARY_RESIDUAL_TOL:
        raise ComputationError(
            "SINGULAR",
            f"stationary solve produced invalid pi (min {pi.min():.3e}, residual {resid:.3e})",
        )
    exact = stationary_exact(spec) if spec.P_exact is not None else None
    return StationaryDist(pi=np.abs(pi), exact=exact)


def stationary_power(spec: MarkovSpec, iters: int = 10000) -> np.ndarray:
    """Cesàro-averaged power iteration (after burn-in); diagnostic only.

    The average keeps this meaningful for periodic chains, where the bare
    iterates never settle.
    """
    n = spec.n_states
    pi = np.full(n, 1.0 / n)
    burn = iters // 2
    acc = np.zeros(n)
    for k in range(iters):
        pi = pi @ spec.P
        if k >= burn:
            acc += pi
    acc /= acc.sum()
    return acc


def stationary_exact(spec: MarkovSpec) -> tuple:
    """Exact rational stationary vector (requires ``P_exact``)."""
    if spec.P_exact is None:
        raise ValidationError("NO_EXACT", "spec has no exact transition entries")
    n = spec.n_states
    # rows of the solved system: (P^T - I) with last row replaced by ones
    rows = []
    for i in range(n):
        if i < n - 1:
            row = [spec.P_exact[j][i] - (1 if i == j else 0) for j in range(n)]
            rows.append(row + [Fraction(0)])
        else:
            rows.append([Fraction(1)] * n + [Fraction(1)])
    pi = _solve_fraction(rows)
    return tuple(pi)


def _solve_fraction(aug: list) -> list:
    """Gaussian elimination on an augmented matrix of Fractions."""
    n = len(aug)
    aug = [list(map(Fraction, row)) for row in aug]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise ComputationError("SINGULAR", "exact solve hit a zero pivot column")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [aug[r][n] for r in range(n)]


def make_walk_model(
    spec: MarkovSpec,
    g: Sequence[float],
    name: str = "custom",
    g_exact: Optional[Sequence[Fraction]] = None,
    window: Optional[WindowInfo] = None,
    dist: Optional[StationaryDist] = None,
) -> WalkModel:
    """Validate a spec, attach ``g``, and assert the mean-zero requirement."""
    validate(spec)
    if dist is None:
        dist = stationary(spec)
    g = np.asarray(g, dtype=float)
    if g.shape != (spec.n_states,):
        raise ValidationError("MEAN_NOT_ZERO", f"g has shape {g.shape}, expected ({spec.n_states},)")
    if dist.exact is not None and g_exact is not None:
        mean = sum(p * v for p, v in zip(dist.exact, g_exact))
        if mean != 0:
            raise ValidationError("MEAN_NOT_ZERO", f"sum(pi*g) = {mean} != 0")
    else:
        mean = float(dist.pi @ g)
        if abs(mean) > MEAN_ZERO_TOL:
            raise ValidationError("MEAN_NOT_ZERO", f"sum(pi*g) = {mean:.3e} exceeds {MEAN_ZERO_TOL}")
    integer_valued = bool(np.all(g == np.rint(g)))
    return WalkModel(
        spec=spec,
        dist=dist,
        g=g,
        integer_valued=integer_valued,
        g_exact=tuple(g_exact) if g_exact is not None else None,
        window=window,
        name=name,
    )


def reverse(model: WalkModel) -> MarkovSpec:
    """Time-reversed kernel ``P~(y, x) = pi(x) P(x, y) / pi(y)``.

    The reversed chain has the same stationary law; reversing twice returns
    the original matrix entrywise (to 1e-12).
    """
    pi = model.pi
    if pi.min() <= 0:
        i = int(pi.argmin())
        raise ValidationError("ZERO_MASS_STATE", f"state {model.spec.labels[i]} has pi = {pi[i]}")
    P = model.P
    R = (P * pi[:, None]).T / pi[:, None]
    # rows may be off 1 by a few ulp after the division; renormalize exactly
    R /= R.sum(axis=1, keepdims=True)
    R_exact = None
    if model.spec.P_exact is not None and model.dist.exact is not None:
        pe, Pe = model.dist.exact, model.spec.P_exact
        R_exact = tuple(
            tuple(pe[x] * Pe[x][y] / pe[y] for x in range(model.n_states))
            for y in range(model.n_states)
        )
    return MarkovSpec(P=R, labels=model.spec.labels, P_exact=R_exact)


def _reversed_walk_model(model: WalkModel) -> WalkModel:
    rspec = reverse(model)
    return WalkModel(
        spec=rspec,
        dist=model.dist,
        g=model.g,
        integer_valued=model.integer_valued,
        g_exact=model.g_exact,
        window=None,
        name=model.name + "-reversed",
    )


def autocovariance_exact(model: WalkModel, k: int) -> float:
    """Exact lag-``k`` autocovariance of the increments.

    ``Cov[g(X_0), g(X_k)] = sum_x pi(x) g(x) [P^k g](x) - (pi.g)^2``,
    evaluated with ``k`` repeated matrix-vector products (no
    eigendecomposition).  ``k = 0`` returns the variance of ``g``.
    """
    if k < 0:
        raise ValidationError("BAD_LAG", f"lag must be >= 0, got {k}")
    w = model.g.copy()
    for _ in range(k):
        w = model.P @ w
    mu = float(model.pi @ model.g)
    return float((model.pi * model.g) @ w - mu * mu)


# ---------------------------------------------------------------------------
# Stationary path sampling
# ---------------------------------------------------------------------------


def sample_stationary_paths(
    model: WalkModel,
    t: int,
    n_paths: int,
    seed,
    direction: str = "forward",
    stream: int = 0,
):
    """Sample ``n_paths`` stationary paths of ``t`` steps.

    Returns ``(states, increments)`` with shapes ``(n_paths, t+1)`` and
    ``(n_paths, t)``.  Forward paths start from ``pi`` and step with ``P``;
    backward paths visit ``X_0, X_{-1}, ..., X_{-t}`` (stepping with the
    reversed kernel), so ``increments.cumsum(axis=1)`` gives the backward
    partial sums.  In both directions ``increments[:, k-1] = g(states[:, k])``.
    Deterministic given ``(seed, stream)``.
    """
    if t < 0:
        raise ValidationError("BAD_TIME", f"t must be >= 0, got {t}")
    if direction not in ("forward", "backward"):
        raise ValidationError("BAD_DIRECTION", f"unknown direction {direction!r}")
    rng = as_seedspec(seed).generator(stream)
    if model.window is not None:
        states = _window_states(model.window, t, n_paths, rng, direction)
    else:
        P = model.P if direction == "forward" else _reversed_walk_model(model).P
        states = _generic_states(model.pi, P, t, n_paths, rng)
    if model.integer_valued:
        increments = model.g_int[states[:, 1:]]
    else:
        increments = model.g[states[:, 1:]]
    return states, increments


def sample_stationary_path(model: WalkModel, t: int, seed, direction: str = "forward", stream: int = 0):
    """Single-path convenience wrapper around :func:`sample_stationary_paths`."""
    states, increments = sample_stationary_paths(model, t, 1, seed, direction, stream)
    return states[0], increments[0]


def _window_states(win: WindowInfo, t: int, n_paths: int, rng, direction: str) -> np.ndarray:
    length = t + win.width
    probs = np.asarray(win.color_probs)
    if win.n_colors <= 256 and np.allclose(probs, probs[0]):
        colors = rng.integers(0, win.n_colors, size=(n_paths, length), dtype=np.uint8)
    else:
        cum = np.cumsum(probs)
        cum[-1] = 1.0
        u = rng.random((n_paths, length))
        colors = (u[..., None] < cum).argmax(axis=-1).astype(np.uint8)
    wview = np.lib.stride_tricks.sliding_window_view(colors, win.width, axis=1)
    states = win.encode(wview.astype(np.int64))
    if direction == "backward":
        states = states[:, ::-1]
    return np.ascontiguousarray(states)


def _generic_states(pi: np.ndarray, P: np.ndarray, t: int, n_paths: int, rng) -> np.ndarray:
    n = len(pi)
    cum_pi = np.cumsum(pi)
    cum_pi[-1] = 1.0
    cum_rows = np.cumsum(P, axis=1)
    cum_rows[:, -1] = 1.0
    dtype = np.uint8 if n <= 256 else np.int64
    states = np.empty((n_paths, t + 1), dtype=dtype)
    cur = (rng.random(n_paths)[:, None] < cum_pi).argmax(axis=1)
    states[:, 0] = cur
    for k in range(1, t + 1):
        u = rng.random(n_paths)
        cur = (u[:, None] < cum_rows[cur]).argmax(axis=1)
        states[:, k] = cur
    return states


# ---------------------------------------------------------------------------
# Chain-spec text format
# ---------------------------------------------------------------------------
#
#   # comment lines and blank lines are ignored
#   states <n>
#   P
#   <n rows of n probabilities>
#   g
#   <n values>
#
# Numbers are decimal strings (optionally a/b rationals) parsed exactly.


def parse_chain_text(text: str, name: str = "file") -> WalkModel:
    """Parse the chain-spec format into a validated WalkModel."""
    rows: list = []
    g_vals: list = []
    n = None
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if tokens[0] == "states":
            if len(tokens) != 2:
                raise ParseError("expected 'states <n>'", lineno)
            try:
                n = int(tokens[1])
            except ValueError:
                raise ParseError(f"bad state count {tokens[1]!r}", lineno) from None
            if n < 1:
                raise ParseError(f"state count must be positive, got {n}", lineno)
            section = None
        elif tokens[0] == "P":
            if n is None:
                raise ParseError("'P' before 'states'", lineno)
            section = "P"
        elif tokens[0] == "g":
            if n is None:
                raise ParseError("'g' before 'states'", lineno)
            section = "g"
        elif section == "P":
            if len(tokens) != n:
                raise ParseError(f"expected {n} probabilities, got {len(tokens)}", lineno)
            rows.append(([_parse_number(tok, lineno) for tok in tokens], lineno))
        elif section == "g":
            g_vals.extend((_parse_number(tok, lineno), lineno) for tok in tokens)
        else:
            raise ParseError(f"unexpected content {line!r}", lineno)
    if n is None:
        raise ParseError("missing 'states' declaration", 0)
    if len(rows) != n:
        raise ParseError(f"expected {n} P rows, found {len(rows)}", 0)
    if len(g_vals) != n:
        raise ParseError(f"expected {n} g values, found {len(g_vals)}", 0)

    P_exact = tuple(tuple(row) for row, _ in rows)
    P = np.array([[float(v) for v in row] for row, _ in rows])
    spec = MarkovSpec(P=P, labels=tuple(str(i) for i in range(n)), P_exact=P_exact)
    g_exact = tuple(v for v, _ in g_vals)
    g = np.array([float(v) for v in g_exact])
    return make_walk_model(spec, g, name=name, g_exact=g_exact)


def load_chain_file(path) -> WalkModel:
    """Read and parse a chain-spec file (UTF-8)."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_chain_text(fh.read(), name=str(path))


def _parse_number(token: str, lineno: int) -> Fraction:
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad number {token!r}", lineno) from None
