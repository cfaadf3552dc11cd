"""Built-in walk models.

Every preset is constructed from exact rationals, so the mean-zero check is
exact and brute-force oracles can run in exact arithmetic.

========================  =====================================================
name                      model
========================  =====================================================
``srw``                   i.i.d. +-1 steps (persistent chain with alpha = 1/2)
``persistent(alpha)``     2-state sign chain: keep the sign with prob alpha
``example32``             3 states {-1, 0, +1} with a fixed non-reversible P
``iid(values; probs)``    i.i.d. steps from an arbitrary finite law
``cca``                   i.i.d. uniform steps on {-1, 0, +1}
``ghm-pair``              9-state sliding window of color pairs, front field
``fca-quad``              81-state sliding window of color quadruples, whose
                          increment is the one-step FCA differential of the
                          middle pair
``triple-ex35``           27-state sliding window of color triples with the
                          two extreme triples remapped to steps -2 / +2
========================  =====================================================

The window presets move a width-w window one site right per step over an
i.i.d. uniform color sequence: ``P((a_1..a_w), (a_2..a_w, b)) = 1/3`` with the
uniform stationary law.
"""

from __future__ import annotations

import itertools
import re
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .automata import differential_colors, step_colors
from .chain import (
    MarkovSpec,
    StationaryDist,
    WalkModel,
    WindowInfo,
    make_walk_model,
    stationary_exact,
)
from .errors import ValidationError

PRESET_NAMES = (
    "srw",
    "persistent",
    "example32",
    "iid",
    "cca",
    "ghm-pair",
    "fca-quad",
    "triple-ex35",
)

# mod-3 color difference -> walk step, fixed once for presets and automata
MOD3_STEP = (0, 1, -1)


def _to_fraction(x) -> Fraction:
    """Exact rational from user input; floats go through their decimal repr."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(str(x))


def build_preset(name: str, alpha=None, values=None, probs=None) -> WalkModel:
    """Construct a named preset model.

    Raises ``ValidationError(UNKNOWN_PRESET)`` for unknown names and
    ``MEAN_NOT_ZERO`` if a constructed functional fails the exact mean-zero
    check (asserted, never assumed).
    """
    if name == "srw":
        # i.i.d. +-1 steps; same chain as persistent(1/2) but carries the
        # window structure so samplers can draw the steps directly
        return _iid(
            [Fraction(-1), Fraction(1)],
            [Fraction(1, 2), Fraction(1, 2)],
            "srw",
            labels=("-1", "+1"),
        )
    if name == "persistent":
        if alpha is None:
            raise ValidationError("UNKNOWN_PRESET", "persistent needs an alpha parameter")
        return _persistent(_to_fraction(alpha), f"persistent({alpha})")
    if name == "example32":
        return _example32()
    if name == "iid":
        if values is None or probs is None:
            raise ValidationError("UNKNOWN_PRESET", "iid needs values and probs")
        return _iid([_to_fraction(v) for v in values], [_to_fraction(p) for p in probs], "iid")
    if name == "cca":
        return _iid([Fraction(-1), Fraction(0), Fraction(1)], [Fraction(1, 3)] * 3, "cca")
    if name == "ghm-pair":
        return _window_preset(2, _ghm_pair_g, "ghm-pair")
    if name == "fca-quad":
        return _window_preset(4, None, "fca-quad")
    if name == "triple-ex35":
        return _window_preset(3, _triple_g, "triple-ex35")
    raise ValidationError("UNKNOWN_PRESET", f"unknown preset {name!r}")


_PRESET_CALL = re.compile(r"^([a-z0-9-]+)\((.*)\)$")


def preset_from_string(text: str) -> WalkModel:
    """Parse CLI preset syntax: ``srw``, ``persistent(0.75)``, ``iid(v,..;p,..)``."""
    text = text.strip()
    m = _PRESET_CALL.match(text)
    if not m:
        return build_preset(text)
    name, args = m.group(1), m.group(2)
    if name == "persistent":
        return build_preset("persistent", alpha=args)
    if name == "iid":
        parts = args.split(";")
        if len(parts) != 2:
            raise ValidationError("UNKNOWN_PRESET", "iid syntax: iid(v1,v2,..;p1,p2,..)")
        values = [v.strip() for v in parts[0].split(",")]
        probs = [p.strip() for p in parts[1].split(",")]
        return build_preset("iid", values=values, probs=probs)
    raise ValidationError("UNKNOWN_PRESET", f"unknown preset {text!r}")


def _persistent(alpha: Fraction, name: str) -> WalkModel:
    beta = 1 - alpha
    Pe = ((alpha, beta), (beta, alpha))
    spec = MarkovSpec(
        P=np.array([[float(alpha), float(beta)], [float(beta), float(alpha)]]),
        labels=("-1", "+1"),
        P_exact=Pe,
    )
    dist = StationaryDist(pi=np.array([0.5, 0.5]), exact=(Fraction(1, 2), Fraction(1, 2)))
    _assert_stationary_exact(spec, dist)
    return make_walk_model(
        spec, [-1.0, 1.0], name=name, g_exact=(Fraction(-1), Fraction(1)), dist=dist
    )


def _example32() -> WalkModel:
    rows = (
        (Fraction(2, 3), Fraction(0), Fraction(1, 3)),
        (Fraction(1, 6), Fraction(1, 2), Fraction(1, 3)),
        (Fraction(1, 4), Fraction(1, 4), Fraction(1, 2)),
    )
    spec = MarkovSpec(
        P=np.array([[float(v) for v in row] for row in rows]),
        labels=("-1", "0", "+1"),
        P_exact=rows,
    )
    exact = tuple(stationary_exact(spec))
    dist = StationaryDist(pi=np.array([float(p) for p in exact]), exact=exact)
    return make_walk_model(
        spec,
        [-1.0, 0.0, 1.0],
        name="example32",
        g_exact=(Fraction(-1), Fraction(0), Fraction(1)),
        dist=dist,
    )


def _iid(values: list, probs: list, name: str, labels=None) -> WalkModel:
    k = len(values)
    if len(probs) != k or k < 1:
        raise ValidationError("UNKNOWN_PRESET", "iid needs matching values and probs")
    if any(p < 0 for p in probs) or sum(probs) != 1:
        raise ValidationError("NOT_STOCHASTIC", f"iid probs sum to {sum(probs)}, expected 1")
    Pe = tuple(tuple(probs) for _ in range(k))
    spec = MarkovSpec(
        P=np.tile(np.array([float(p) for p in probs]), (k, 1)),
        labels=labels if labels is not None else tuple(str(v) for v in values),
        P_exact=Pe,
    )
    dist = StationaryDist(pi=np.array([float(p) for p in probs]), exact=tuple(probs))
    _assert_stationary_exact(spec, dist)
    window = WindowInfo(
        width=1,
        n_colors=k,
        color_probs=tuple(float(p) for p in probs),
        color_probs_exact=tuple(probs),
    )
    return make_walk_model(
        spec,
        [float(v) for v in values],
        name=name,
        g_exact=tuple(values),
        window=window,
        dist=dist,
    )


def _ghm_pair_g(window: tuple) -> int:
    a, b = window
    if (a, b) == (0, 1):
        return -1
    if (a, b) == (1, 0):
        return 1
    return 0


def _triple_g(window: tuple) -> int:
    if window == (1, 2, 0):
        return -2
    if window == (0, 2, 1):
        return 2
    return MOD3_STEP[(window[2] - window[1]) % 3]


def _fca_quad_g_table() -> np.ndarray:
    """One FCA step on every 4-site path; mod-3 differential of the middle pair."""
    quads = np.array(list(itertools.product(range(3), repeat=4)), dtype=np.uint8)
    stepped = step_colors(quads, "fca", "segment")
    return differential_colors(stepped, "fca", "segment")[:, 1].astype(np.int64)


def _window_preset(width: int, g_fn, name: str) -> WalkModel:
    n = 3**width
    windows = list(itertools.product(range(3), repeat=width))
    P = np.zeros((n, n))
    Pe = [[Fraction(0)] * n for _ in range(n)]
    third = Fraction(1, 3)
    for s, w in enumerate(windows):
        base = (s % 3 ** (width - 1)) * 3
        for b in range(3):
            P[s, base + b] = 1.0 / 3.0
            Pe[s][base + b] = third
    spec = MarkovSpec(
        P=P,
        labels=tuple("".join(map(str, w)) for w in windows),
        P_exact=tuple(tuple(row) for row in Pe),
    )
    uniform = Fraction(1, n)
    dist = StationaryDist(pi=np.full(n, 1.0 / n), exact=(uniform,) * n)
    _assert_stationary_exact(spec, dist)
    if g_fn is None:
        g = _fca_quad_g_table()
    else:
        g = np.array([g_fn(w) for w in windows], dtype=np.int64)
    window = WindowInfo(
        width=width, n_colors=3, color_probs=(1 / 3,) * 3, color_probs_exact=(third,) * 3
    )
    return make_walk_model(
        spec,
        g.astype(float),
        name=name,
        g_exact=tuple(Fraction(int(v)) for v in g),
        window=window,
        dist=dist,
    )


def _assert_stationary_exact(spec: MarkovSpec, dist: StationaryDist) -> None:
    """Exact pi P = pi and sum(pi) = 1 for a claimed stationary vector."""
    pe = dist.exact
    n = spec.n_states
    if sum(pe) != 1:
        raise ValidationError("NOT_STOCHASTIC", f"claimed pi sums to {sum(pe)}")
    for j in range(n):
        col = sum(pe[i] * spec.P_exact[i][j] for i in range(n))
        if col != pe[j]:
            raise ValidationError("NOT_STOCHASTIC", f"claimed pi fails pi P = pi at state {j}")
