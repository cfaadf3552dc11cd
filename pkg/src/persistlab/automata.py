"""Three-color excitable media on 1D lattices: CCA, GHM, and FCA.

All three rules update every site synchronously from its one or two nearest
neighbors:

* ``cca``  - a site is eaten by a neighbor of the next color up (mod 3);
* ``ghm``  - rested sites (0) wait for an excited neighbor (1); colors 1, 2
  advance unconditionally;
* ``fca``  - sites advance unless they are post-blink (2) with a blinking
  neighbor (1), in which case they hold.

Each rule induces an annihilating particle system on edges via its color
differential; the density of occupied edges is the clustering observable
measured here.  For CCA and FCA the differential is the mod-3 color
difference (so occupied edges are exactly disagreeing neighbor pairs); for
GHM it is supported on 01/10 pairs only, and the measured density counts
those pairs, not raw disagreements.

Conventions pinned by exhaustive small-case checks (see the verification
suite): the mod-3 difference maps 0 -> 0, 1 -> +1, 2 -> -1; the CCA/GHM
survival event compares ``dX_t(0,1) = -1`` with all prefix sums of the
initial differential staying <= -1; the FCA event compares
``dX_{3t+1}(0,1) = +1`` with prefix sums of the time-1 differential
staying >= +1.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ComputationError, ValidationError
from .seeding import as_seedspec

RULES = ("cca", "ghm", "fca")

_INC = np.array([1, 2, 0], dtype=np.uint8)  # color + 1 mod 3
_MOD3_PM = np.array([0, 1, -1], dtype=np.int8)  # mod-3 difference -> {-1, 0, +1}
_SENTINEL = np.uint8(3)  # "no neighbor": never equal to a color


def _check_rule(rule: str) -> None:
    if rule not in RULES:
        raise ValidationError("UNKNOWN_RULE", f"rule must be one of {RULES}, got {rule!r}")


@dataclass(frozen=True)
class RingConfig:
    """A 3-coloring of a ring or segment, with its rule and current time."""

    colors: np.ndarray
    rule: str
    topology: str = "ring"
    time: int = 0

    def __post_init__(self):
        _check_rule(self.rule)
        if self.topology not in ("ring", "segment"):
            raise ValidationError("UNKNOWN_TOPOLOGY", f"bad topology {self.topology!r}")
        colors = np.asarray(self.colors, dtype=np.uint8)
        if colors.ndim != 1:
            raise ValidationError("BAD_COLORS", "colors must be one-dimensional")
        if self.topology == "ring" and colors.size < 3:
            raise ValidationError("RING_TOO_SMALL", f"rings need >= 3 sites, got {colors.size}")
        if colors.size and colors.max() > 2:
            raise ValidationError("BAD_COLORS", "colors must lie in {0, 1, 2}")
        object.__setattr__(self, "colors", colors)

    @property
    def n(self) -> int:
        return self.colors.size


def _neighbor_views(c: np.ndarray, topology: str):
    """Left/right neighbor arrays aligned with ``c`` (sentinel at segment ends)."""
    if topology == "ring":
        left = np.roll(c, 1, axis=-1)
        right = np.roll(c, -1, axis=-1)
    else:
        left = np.empty_like(c)
        left[..., 1:] = c[..., :-1]
        left[..., 0] = _SENTINEL
        right = np.empty_like(c)
        right[..., :-1] = c[..., 1:]
        right[..., -1] = _SENTINEL
    return left, right


def step_colors(c: np.ndarray, rule: str, topology: str = "ring") -> np.ndarray:
    """One synchronous update of a color array (sites on the last axis)."""
    _check_rule(rule)
    left, right = _neighbor_views(c, topology)
    nxt = _INC[c]
    if rule == "cca":
        excited = (left == nxt) | (right == nxt)
        return np.where(excited, nxt, c)
    if rule == "ghm":
        rested = (c == 0) & (left != 1) & (right != 1)
        out = nxt
        out[rested] = 0
        return out
    waiting = (c == 2) & ((left == 1) | (right == 1))
    return np.where(waiting, c, nxt)


def step(config: RingConfig) -> RingConfig:
    """Advance a configuration by one synchronous step."""
    return RingConfig(
        colors=step_colors(config.colors, config.rule, config.topology),
        rule=config.rule,
        topology=config.topology,
        time=config.time + 1,
    )


def differential_colors(c: np.ndarray, rule: str, topology: str = "ring") -> np.ndarray:
    """Per-edge differential field in {-1, 0, +1} (edges on the last axis).

    Rings have one edge per site (``(x, x+1 mod n)``); segments have
    ``n - 1`` edges.
    """
    _check_rule(rule)
    if topology == "ring":
        lo, hi = c, np.roll(c, -1, axis=-1)
    else:
        lo, hi = c[..., :-1], c[..., 1:]
    if rule == "ghm":
        d = np.zeros(lo.shape, dtype=np.int8)
        d[(lo == 0) & (hi == 1)] = 1
        d[(lo == 1) & (hi == 0)] = -1
        return d
    return _MOD3_PM[(hi.astype(np.int16) - lo.astype(np.int16)) % 3]


def differential(config: RingConfig) -> np.ndarray:
    """Differential field of a configuration."""
    return differential_colors(config.colors, config.rule, config.topology)


def random_init(n: int, seed, rule: str = "cca", topology: str = "ring", stream: int = 0) -> RingConfig:
    """Uniform product-measure coloring; deterministic per (seed, stream)."""
    if n < 3 and topology == "ring":
        raise ValidationError("RING_TOO_SMALL", f"rings need >= 3 sites, got {n}")
    rng = as_seedspec(seed).generator(stream)
    colors = rng.integers(0, 3, size=n, dtype=np.uint8)
    return RingConfig(colors=colors, rule=rule, topology=topology, time=0)


# ---------------------------------------------------------------------------
# Density measurement
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DensitySeries:
    """Replica-averaged edge-particle density per time step.

    ``density[t]`` is the mean over replicas of (occupied edges) / n at wall
    clock time ``t``; occupied means a nonzero rule differential.  For CCA
    and FCA this equals the neighbor-disagreement density; for GHM it counts
    excitation-front pairs (01/10) only.
    """

    rule: str
    n: int
    replicas: int
    t: np.ndarray
    density: np.ndarray
    stderr: np.ndarray
    particles: np.ndarray


def _density_replica(rule: str, n: int, t_max: int, seedspec, stream: int) -> np.ndarray:
    rng = seedspec.generator(stream)
    buf = np.empty(n + 2, dtype=np.uint8)
    new = np.empty(n + 2, dtype=np.uint8)
    buf[1 : n + 1] = rng.integers(0, 3, size=n, dtype=np.uint8)
    counts = np.empty(t_max + 1, dtype=np.int64)
    for t in range(t_max + 1):
        buf[0] = buf[n]
        buf[n + 1] = buf[1]
        me = buf[1 : n + 1]
        right = buf[2 : n + 2]
        if rule == "ghm":
            counts[t] = np.count_nonzero((me == 0) & (right == 1)) + np.count_nonzero(
                (me == 1) & (right == 0)
            )
        else:
            counts[t] = np.count_nonzero(me != right)
        if t == t_max:
            break
        left = buf[0:n]
        nxt = new[1 : n + 1]
        if rule == "cca":
            cp1 = _INC[me]
            excited = left == cp1
            excited |= right == cp1
            nxt[:] = me
            np.copyto(nxt, cp1, where=excited)
        elif rule == "ghm":
            nxt[:] = _INC[me]
            rested = me == 0
            rested &= left != 1
            rested &= right != 1
            nxt[rested] = 0
        else:
            waiting = me == 2
            waiting &= (left == 1) | (right == 1)
            nxt[:] = _INC[me]
            np.copyto(nxt, 2, where=waiting)
        buf, new = new, buf
    return counts


def density_curve(
    rule: str,
    n: int,
    t_max: int,
    replicas: int,
    seed,
    workers: int = 1,
    stream_offset: int = 0,
) -> DensitySeries:
    """Particle density per step, averaged over independent ring replicas.

    Requires ``n >= 2 * t_max + 8`` so measured statistics never see their
    own light cone wrap.  Replica ``i`` draws from stream
    ``stream_offset + i``; results are byte-identical for any ``workers``.
    """
    _check_rule(rule)
    if n < 2 * t_max + 8:
        raise ValidationError(
            "RING_TOO_SMALL", f"need n >= 2*t_max + 8 = {2 * t_max + 8}, got {n}"
        )
    if replicas < 1:
        raise ValidationError("BAD_REPLICAS", "need at least one replica")
    spec = as_seedspec(seed)

    def run(i: int) -> np.ndarray:
        return _density_replica(rule, n, t_max, spec, stream_offset + i)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(run, range(replicas)))
    else:
        counts = [run(i) for i in range(replicas)]
    counts = np.stack(counts)  # (replicas, t_max + 1), fixed replica order
    dens = counts / float(n)
    mean = dens.mean(axis=0)
    if replicas > 1:
        stderr = dens.std(axis=0, ddof=1) / np.sqrt(replicas)
    else:
        stderr = np.zeros_like(mean)
    return DensitySeries(
        rule=rule,
        n=n,
        replicas=replicas,
        t=np.arange(t_max + 1),
        density=mean,
        stderr=stderr,
        particles=counts.mean(axis=0),
    )


def proposition_time(rule: str, t: int) -> int:
    """Wall-clock time at which the survival identity reads off scaled time t."""
    _check_rule(rule)
    return 3 * t + 1 if rule == "fca" else t


# ---------------------------------------------------------------------------
# Structural checks
# ---------------------------------------------------------------------------

_FORBIDDEN_TRIPLES = ((1, 2, 0), (0, 2, 1))


def no_flip_check(config: RingConfig, t_max: int, max_report: int = 100) -> list:
    """Scan an FCA trajectory for forbidden (1,2,0)/(0,2,1) triples at t >= 1.

    Returns a list of ``(t, x)`` violations (expected empty).
    """
    if config.rule != "fca":
        raise ValidationError("UNKNOWN_RULE", "no_flip_check applies to the fca rule only")
    violations = []
    cur = config
    for _ in range(t_max):
        cur = step(cur)
        for t_pos in _forbidden_positions(cur.colors, cur.topology):
            if len(violations) < max_report:
                violations.append((cur.time, int(t_pos)))
    return violations


def _forbidden_positions(c: np.ndarray, topology: str) -> np.ndarray:
    if topology == "ring":
        a, b = np.roll(c, 1), c
        d = np.roll(c, -1)
    else:
        a, b, d = c[:-2], c[1:-1], c[2:]
    hit = np.zeros(b.shape, dtype=bool)
    for pat in _FORBIDDEN_TRIPLES:
        hit |= (a == pat[0]) & (b == pat[1]) & (d == pat[2])
    return np.flatnonzero(hit)


@dataclass
class ParticleLawReport:
    """Outcome of checking FCA particle dynamics against its three laws."""

    steps: int
    counts: np.ndarray
    moves_checked: int = 0
    annihilated_pairs: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def particle_law_check(config: RingConfig, t_max: int, max_report: int = 100) -> ParticleLawReport:
    """Track FCA edge particles from t = 1 and verify their motion laws.

    Per step, from the particle picture alone, predicts: a particle is
    stationary unless its tail site has color 1; a moving particle advances
    one edge; two opposing particles that would share an edge or cross
    annihilate.  The prediction must reproduce the differential field of the
    actual trajectory, every particle must move exactly once per 3 steps
    between annihilations, and disappearances must come in opposing pairs.
    """
    if config.rule != "fca":
        raise ValidationError("UNKNOWN_RULE", "particle_law_check applies to the fca rule only")
    if config.topology != "ring":
        raise ValidationError("UNKNOWN_TOPOLOGY", "particle tracking needs a ring (no exits)")
    cur = config
    while cur.time < 1:
        cur = step(cur)
    n = cur.n

    def particle_map(cfg):
        d = differential(cfg)
        return {int(e): int(d[e]) for e in np.flatnonzero(d)}

    report = ParticleLawReport(steps=0, counts=np.array([], dtype=np.int64))
    counts = []
    particles = particle_map(cur)
    ids = {edge: (cur.time, edge) for edge in particles}  # edge -> (birth time, birth edge)
    last_move: dict = {}  # particle id -> time of its last jump

    def note(v):
        if len(report.violations) < max_report:
            report.violations.append(v)

    for _ in range(t_max):
        counts.append(len(particles))
        colors = cur.colors
        t_now = cur.time
        # predict each particle's next edge: move one edge iff its tail blinks
        plans = []  # (src_edge, sign, target_edge, moves)
        for edge, sign in sorted(particles.items()):
            tail = edge if sign > 0 else (edge + 1) % n
            moves = colors[tail] == 1
            target = (edge + sign) % n if moves else edge
            plans.append((edge, sign, target, moves))
        # annihilate same-target pairs and crossing pairs
        by_target: dict = {}
        for plan in plans:
            by_target.setdefault(plan[2], []).append(plan)
        dead = set()
        for target, group in by_target.items():
            if len(group) >= 2:
                if len(group) > 2 or group[0][1] == group[1][1]:
                    note(("bad_collision", t_now, target, group))
                for plan in group:
                    dead.add(plan[0])
                report.annihilated_pairs += 1
        plans_by_src = {plan[0]: plan for plan in plans}
        for edge, sign, target, moves in plans:
            if edge in dead or sign < 0 or not moves:
                continue
            partner = plans_by_src.get(target)
            if partner is not None and partner[1] == -1 and target not in dead:
                # r moving onto the edge of an l moving the other way: crossing
                if partner[3] and partner[2] == edge:
                    dead.add(edge)
                    dead.add(target)
                    report.annihilated_pairs += 1
        predicted = {tgt: (src, sign) for src, sign, tgt, _ in plans if src not in dead}
        moved = {src: mv for src, _, _, mv in plans}

        cur = step(cur)
        actual = particle_map(cur)
        pred_set = {(e, s) for e, (_, s) in predicted.items()}
        act_set = set(actual.items())
        if pred_set != act_set:
            note(("field_mismatch", cur.time, sorted(pred_set ^ act_set)[:6]))
            ids = {edge: (cur.time, edge) for edge in actual}
            last_move = {}
            particles = actual
            continue
        new_ids = {}
        for tgt, (src, sign) in predicted.items():
            pid = ids.get(src, (t_now, src))
            if moved[src]:
                report.moves_checked += 1
                prev = last_move.get(pid)
                if prev is not None and cur.time - prev != 3:
                    note(("speed_violation", cur.time, tgt, cur.time - prev))
                last_move[pid] = cur.time
            new_ids[tgt] = pid
        ids = new_ids
        particles = actual
    report.steps = len(counts)
    report.counts = np.array(counts, dtype=np.int64)
    return report


@dataclass(frozen=True)
class EquivalenceReport:
    """Result of comparing a time-t differential event with its survival event."""

    rule: str
    t: int
    mode: str
    configs: int
    mismatches: int
    events: int  # how many configs realized the (rare) particle event


def event_equivalence_check(
    rule: str,
    t: int,
    mode: str = "exhaustive",
    samples: int = 10**6,
    seed=0,
    chunk: int = 200_000,
) -> EquivalenceReport:
    """Compare the particle event at the proposition time with its survival event.

    For CCA/GHM the window is the 2t+2 sites covering both light cones and
    the events are ``dX_t(0,1) = -1`` versus all prefix sums of the initial
    differential over ``[-t, s]``, ``s <= t``, staying <= -1.  For FCA the
    window is 6t+4 sites and the events are ``dX_{3t+1}(0,1) = +1`` versus
    prefix sums of the time-1 differential staying >= +1.  Returns mismatch
    counts (expected zero) over every window coloring (exhaustive) or
    ``samples`` uniform ones (sampled).
    """
    _check_rule(rule)
    if mode not in ("exhaustive", "sampled"):
        raise ValidationError("BAD_MODE", f"mode must be exhaustive or sampled, got {mode!r}")
    if rule == "fca":
        width = 6 * t + 4
        origin = 3 * t + 1  # array index of lattice site 0
        horizon = 3 * t + 1
    else:
        width = 2 * t + 2
        origin = t
        horizon = t
    total = 3**width
    if mode == "exhaustive" and total > 10**8:
        raise ComputationError("TOO_LARGE", f"3^{width} = {total} configurations")

    mismatches = 0
    events = 0
    checked = 0
    rng = as_seedspec(seed).generator(0) if mode == "sampled" else None
    remaining = total if mode == "exhaustive" else samples
    pos = 0
    powers = 3 ** np.arange(width - 1, -1, -1, dtype=np.int64)
    while remaining > 0:
        b = min(chunk, remaining)
        if mode == "exhaustive":
            ids = np.arange(pos, pos + b, dtype=np.int64)
            colors = ((ids[:, None] // powers) % 3).astype(np.uint8)
            pos += b
        else:
            colors = rng.integers(0, 3, size=(b, width), dtype=np.uint8)
        remaining -= b
        lhs, rhs = _equivalence_events(colors, rule, t, origin, horizon)
        mismatches += int(np.count_nonzero(lhs != rhs))
        events += int(np.count_nonzero(lhs))
        checked += b
    return EquivalenceReport(
        rule=rule, t=t, mode=mode, configs=checked, mismatches=mismatches, events=events
    )


def _equivalence_events(colors: np.ndarray, rule: str, t: int, origin: int, horizon: int):
    if rule == "fca":
        d1 = differential_colors(step_colors(colors, rule, "segment"), rule, "segment")
        span = d1[:, origin - t : origin + t + 1].astype(np.int32)
        rhs = (np.cumsum(span, axis=1) >= 1).all(axis=1)
        target = 1
    else:
        d0 = differential_colors(colors, rule, "segment")
        span = d0[:, origin - t : origin + t + 1].astype(np.int32)
        rhs = (np.cumsum(span, axis=1) <= -1).all(axis=1)
        target = -1
    c = colors
    for _ in range(horizon):
        c = step_colors(c, rule, "segment")
    lhs = (
        differential_colors(c[:, origin : origin + 2], rule, "segment")[:, 0] == target
    )
    return lhs, rhs


@dataclass(frozen=True)
class ExcitationReport:
    """Result of checking the excitation-count / running-maximum identity."""

    t_max: int
    configs: int
    mismatches: int
    increment_mismatches: int


def excitation_identity_check(
    t_max: int,
    mode: str = "exhaustive",
    n_random: int = 1000,
    segment_len: Optional[int] = None,
    seed=0,
) -> ExcitationReport:
    """Verify that CCA excitations of site 0 equal a running maximum.

    On the half-line segment, the number of excitations of site 0 during the
    first t steps equals ``max(0, max_{0<=s<t} sum_{x<=s} dX_0(x, x+1))``
    (the empty prefix counts, pinned by brute force), and its increment at
    step t equals ``1{dX_{t-1}(0,1) = +1}``.  Checked for every t <= t_max
    over all colorings of the segment (exhaustive mode) or ``n_random``
    uniform ones.
    """
    if mode not in ("exhaustive", "sampled"):
        raise ValidationError("BAD_MODE", f"mode must be exhaustive or sampled, got {mode!r}")
    L = segment_len if segment_len is not None else t_max + 2
    if L <= t_max + 1:
        raise ValidationError("BAD_SEGMENT", f"segment needs > t_max + 1 sites, got {L}")
    if mode == "exhaustive":
        total = 3**L
        if total > 10**8:
            raise ComputationError("TOO_LARGE", f"3^{L} = {total} configurations")
        powers = 3 ** np.arange(L - 1, -1, -1, dtype=np.int64)
        colors = ((np.arange(total, dtype=np.int64)[:, None] // powers) % 3).astype(np.uint8)
    else:
        rng = as_seedspec(seed).generator(0)
        colors = rng.integers(0, 3, size=(n_random, L), dtype=np.uint8)

    d0 = differential_colors(colors, "cca", "segment").astype(np.int32)
    prefix = np.cumsum(d0[:, : t_max], axis=1)
    run_max = np.maximum.accumulate(prefix, axis=1)
    expected = np.maximum(run_max, 0)  # expected ne_t(0) for t = 1..t_max

    c = colors
    ne = np.zeros(colors.shape[0], dtype=np.int32)
    mism = 0
    inc_mism = 0
    for t in range(1, t_max + 1):
        prev_d = differential_colors(c[:, :2], "cca", "segment")[:, 0]
        c2 = step_colors(c, "cca", "segment")
        excited = c2[:, 0] != c[:, 0]
        inc_mism += int(np.count_nonzero(excited != (prev_d == 1)))
        ne += excited
        mism += int(np.count_nonzero(ne != expected[:, t - 1]))
        c = c2
    return ExcitationReport(
        t_max=t_max, configs=colors.shape[0], mismatches=mism, increment_mismatches=inc_mism
    )
