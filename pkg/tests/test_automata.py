import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from persistlab import (
    RingConfig,
    SeedSpec,
    ValidationError,
    density_curve,
    differential,
    event_equivalence_check,
    excitation_identity_check,
    no_flip_check,
    particle_law_check,
    proposition_time,
    random_init,
    step,
    step_colors,
)


def ring(colors, rule):
    return RingConfig(colors=np.array(colors, dtype=np.uint8), rule=rule)


class TestRules:
    def test_cca_rotating_ring(self):
        assert list(step(ring([0, 1, 2], "cca")).colors) == [1, 2, 0]

    def test_ghm_rotating_ring(self):
        assert list(step(ring([0, 1, 2], "ghm")).colors) == [1, 2, 0]

    def test_ghm_rested_stays(self):
        assert list(step(ring([0, 0, 2], "ghm")).colors) == [0, 0, 0]

    def test_fca_waiting(self):
        # the 2 has a blinking neighbor and holds; the others advance
        assert list(step(ring([1, 2, 0], "fca")).colors) == [2, 2, 1]

    def test_fca_no_blink_advances(self):
        assert list(step(ring([0, 2, 0], "fca")).colors) == [1, 0, 1]

    def test_segment_endpoints_single_neighbor(self):
        cfg = RingConfig(colors=np.array([1, 0], dtype=np.uint8), rule="cca", topology="segment")
        assert list(step(cfg).colors) == [1, 1]

    def test_time_advances(self):
        cfg = ring([0, 1, 2], "cca")
        assert step(step(cfg)).time == 2

    def test_unknown_rule(self):
        with pytest.raises(ValidationError):
            ring([0, 1, 2], "life")


class TestDifferential:
    def test_cca_convention(self):
        cfg = RingConfig(colors=np.array([0, 1], dtype=np.uint8), rule="cca", topology="segment")
        assert differential(cfg).tolist() == [1]
        cfg = RingConfig(colors=np.array([1, 0], dtype=np.uint8), rule="cca", topology="segment")
        assert differential(cfg).tolist() == [-1]

    def test_ghm_zero_off_front(self):
        cfg = RingConfig(colors=np.array([2, 0], dtype=np.uint8), rule="ghm", topology="segment")
        assert differential(cfg).tolist() == [0]

    def test_constant_coloring_zero_field(self):
        cfg = ring([2, 2, 2, 2], "fca")
        assert not differential(cfg).any()

    def test_ring_wraps(self):
        cfg = ring([0, 0, 1], "cca")
        assert differential(cfg).tolist() == [0, 1, -1]


class TestRandomInit:
    def test_deterministic(self, seed):
        a = random_init(512, seed, stream=4)
        b = random_init(512, seed, stream=4)
        assert np.array_equal(a.colors, b.colors)

    def test_color_frequencies(self, seed):
        cfg = random_init(10**6, seed)
        freq = np.bincount(cfg.colors, minlength=3) / cfg.n
        sigma = np.sqrt((1 / 3) * (2 / 3) / cfg.n)
        assert np.abs(freq - 1 / 3).max() <= 4 * sigma

    def test_initial_disagreement_two_thirds(self, seed):
        cfg = random_init(10**6, seed, stream=1)
        p0 = np.count_nonzero(differential(cfg)) / cfg.n
        sigma = np.sqrt((2 / 3) * (1 / 3) / cfg.n)
        assert abs(p0 - 2 / 3) <= 4 * sigma

    def test_ring_too_small(self, seed):
        with pytest.raises(ValidationError):
            random_init(2, seed)


class TestDensityCurve:
    def test_light_cone_precondition(self, seed):
        with pytest.raises(ValidationError) as exc:
            density_curve("cca", 64, 100, 2, seed)
        assert exc.value.code == "RING_TOO_SMALL"

    def test_deterministic_and_worker_independent(self, seed):
        a = density_curve("cca", 1024, 40, 4, seed, workers=1)
        b = density_curve("cca", 1024, 40, 4, seed, workers=3)
        assert np.array_equal(a.density, b.density)
        assert np.array_equal(a.stderr, b.stderr)

    def test_counts_nonincreasing(self, seed):
        for rule in ("cca", "ghm", "fca"):
            ser = density_curve(rule, 2048, 200, 2, seed)
            start = 1 if rule == "fca" else 0
            assert (np.diff(ser.particles[start:]) <= 1e-9).all()

    def test_proposition_time(self):
        assert proposition_time("cca", 7) == 7
        assert proposition_time("fca", 7) == 22


class TestNoFlips:
    def test_random_trajectories(self, seed):
        for i in range(50):
            cfg = random_init(512, seed, rule="fca", stream=i)
            assert no_flip_check(cfg, 30) == []

    def test_planted_pattern_dies(self, seed):
        colors = random_init(128, seed, rule="fca", stream=99).colors.copy()
        colors[5:8] = (1, 2, 0)
        colors[60:63] = (0, 2, 1)
        cfg = RingConfig(colors=colors, rule="fca")
        assert no_flip_check(cfg, 20) == []

    def test_wrong_rule(self, seed):
        with pytest.raises(ValidationError):
            no_flip_check(random_init(64, seed, rule="cca"), 5)


class TestParticleLaws:
    def test_random_rings_clean(self, seed):
        for i in range(8):
            cfg = random_init(700, seed, rule="fca", stream=i)
            rep = particle_law_check(cfg, 60)
            assert rep.ok, rep.violations[:3]
            drops = np.diff(rep.counts)
            assert (drops <= 0).all() and (drops[drops < 0] % 2 == 0).all()

    def test_single_particle_speed_third(self):
        colors = np.zeros(300, dtype=np.uint8)
        colors[150:] = 1  # one ascending junction and its wrap partner
        cfg = RingConfig(colors=colors, rule="fca")
        d0 = differential(cfg)
        start = int(np.flatnonzero(d0 == 1)[0])
        cur = cfg
        steps = 60
        for _ in range(steps):
            cur = step(cur)
        end = np.flatnonzero(differential(cur) == 1)
        assert len(end) == 1
        assert abs(int(end[0]) - start - steps // 3) <= 1


class TestEventEquivalence:
    @pytest.mark.parametrize("rule", ["cca", "ghm"])
    def test_exhaustive_small(self, rule):
        for t in (1, 2):
            rep = event_equivalence_check(rule, t, mode="exhaustive")
            assert rep.mismatches == 0
            assert rep.events > 0

    def test_fca_exhaustive_t1(self):
        rep = event_equivalence_check("fca", 1, mode="exhaustive")
        assert rep.configs == 3**10
        assert rep.mismatches == 0

    def test_fca_sampled_t2(self, seed):
        rep = event_equivalence_check("fca", 2, mode="sampled", samples=50_000, seed=seed)
        assert rep.mismatches == 0

    def test_too_large_guard(self):
        with pytest.raises(Exception) as exc:
            event_equivalence_check("fca", 4, mode="exhaustive")
        assert "TOO_LARGE" in str(exc.value)


class TestExcitationIdentity:
    def test_exhaustive(self):
        rep = excitation_identity_check(4, mode="exhaustive")
        assert rep.mismatches == 0 and rep.increment_mismatches == 0
        assert rep.configs == 3**6

    def test_monochromatic_zero(self):
        # all-equal coloring never excites site 0; max prefix sums are <= 0
        rep = excitation_identity_check(3, mode="sampled", n_random=1, segment_len=6, seed=0)
        cfg = np.full((1, 6), 2, dtype=np.uint8)
        c = cfg
        ne = 0
        for _ in range(3):
            c2 = step_colors(c, "cca", "segment")
            ne += int(c2[0, 0] != c[0, 0])
            c = c2
        assert ne == 0

    def test_sampled_long(self, seed):
        rep = excitation_identity_check(80, mode="sampled", n_random=300, seed=seed)
        assert rep.mismatches == 0 and rep.increment_mismatches == 0


@given(rule=st.sampled_from(["cca", "ghm", "fca"]), shift=st.integers(1, 63), s=st.integers(0, 2**31))
@settings(max_examples=15, deadline=None)
def test_translation_equivariance(rule, shift, s):
    cfg = random_init(64, SeedSpec(s), rule=rule)
    rotated = RingConfig(colors=np.roll(cfg.colors, shift), rule=rule)
    a, b = cfg, rotated
    for _ in range(10):
        a, b = step(a), step(b)
    assert np.array_equal(np.roll(a.colors, shift), b.colors)


@given(rule=st.sampled_from(["cca", "ghm", "fca"]), s=st.integers(0, 2**31))
@settings(max_examples=15, deadline=None)
def test_light_cone(rule, s):
    rng = SeedSpec(s).generator(0)
    base = rng.integers(0, 3, size=200, dtype=np.uint8)
    site = int(rng.integers(0, 200))
    t = 25
    mod = base.copy()
    mod[site] = (mod[site] + 1) % 3
    a, b = base.copy(), mod.copy()
    for _ in range(t):
        a = step_colors(a, rule, "ring")
        b = step_colors(b, rule, "ring")
    diff = np.flatnonzero(a != b)
    if diff.size:
        dist = np.minimum((diff - site) % 200, (site - diff) % 200)
        assert dist.max() <= t
