import itertools
from fractions import Fraction

import numpy as np
import pytest

from persistlab import ValidationError, autocovariance_exact, build_preset, preset_from_string


def window_autocov_exact(model, k):
    """Oracle: Cov[g(W_0), g(W_k)] of a uniform window chain by enumeration."""
    w = model.window.width
    ge = model.g_exact
    total = Fraction(0)
    for colors in itertools.product(range(3), repeat=w + k):
        s0 = model.window.encode(np.array(colors[:w]))
        sk = model.window.encode(np.array(colors[k : k + w]))
        total += ge[int(s0)] * ge[int(sk)]
    mean = sum(ge) / len(ge)
    return total / Fraction(3 ** (w + k)) - mean * mean


class TestPresetConstruction:
    def test_srw_is_symmetric_persistent(self):
        srw = build_preset("srw")
        pers = build_preset("persistent", alpha=0.5)
        np.testing.assert_allclose(srw.P, pers.P)
        assert srw.spec.labels == pers.spec.labels == ("-1", "+1")

    def test_all_presets_mean_zero_exact(self):
        names = ["srw", "example32", "cca", "ghm-pair", "fca-quad", "triple-ex35"]
        for name in names:
            m = build_preset(name)
            mean = sum(p * g for p, g in zip(m.dist.exact, m.g_exact))
            assert mean == 0

    def test_unknown_preset(self):
        with pytest.raises(ValidationError) as exc:
            build_preset("nonesuch")
        assert exc.value.code == "UNKNOWN_PRESET"

    def test_iid_mean_not_zero_rejected(self):
        with pytest.raises(ValidationError) as exc:
            build_preset("iid", values=[1, 1], probs=[Fraction(1, 2), Fraction(1, 2)])
        assert exc.value.code == "MEAN_NOT_ZERO"

    def test_persistent_alpha_one_reducible(self):
        with pytest.raises(ValidationError) as exc:
            build_preset("persistent", alpha=1)
        assert exc.value.code == "REDUCIBLE"

    def test_preset_strings(self):
        assert preset_from_string("persistent(0.75)").P[0, 0] == 0.75
        m = preset_from_string("iid(-1,0,1;0.25,0.5,0.25)")
        assert m.g_exact == (Fraction(-1), Fraction(0), Fraction(1))
        assert m.dist.exact[1] == Fraction(1, 2)
        with pytest.raises(ValidationError):
            preset_from_string("persistent[0.5]")


class TestFunctionals:
    def test_triple_functional_values(self, triple35):
        win = triple35.window
        idx = lambda t: int(win.encode(np.array(t)))
        assert triple35.g_exact[idx((1, 2, 0))] == -2
        assert triple35.g_exact[idx((0, 2, 1))] == 2
        assert triple35.g_exact[idx((0, 0, 1))] == 1   # k - j = 1
        assert triple35.g_exact[idx((2, 1, 0))] == -1  # k - j = -1 mod 3 -> 2 -> -1
        assert triple35.g_exact[idx((1, 0, 0))] == 0

    def test_ghm_pair_functional(self, ghm_pair):
        win = ghm_pair.window
        idx = lambda t: int(win.encode(np.array(t)))
        assert ghm_pair.g_exact[idx((0, 1))] == -1
        assert ghm_pair.g_exact[idx((1, 0))] == 1
        assert all(
            ghm_pair.g_exact[idx(p)] == 0
            for p in itertools.product(range(3), repeat=2)
            if p not in ((0, 1), (1, 0))
        )
        second_moment = sum(p * g * g for p, g in zip(ghm_pair.dist.exact, ghm_pair.g_exact))
        assert second_moment == Fraction(2, 9)

    def test_fca_quad_upward_skip_free(self, fca_quad):
        assert fca_quad.g_max == 1.0 and fca_quad.g_min == -1.0

    def test_window_transition_structure(self, triple35):
        # P((a1,a2,a3),(a2,a3,b)) = 1/3, all else 0
        win = triple35.window
        for s in range(27):
            digs = win.decode(s)
            succ = {int(win.encode(np.array(digs[1:] + (b,)))) for b in range(3)}
            for s2 in range(27):
                expect = 1 / 3 if s2 in succ else 0.0
                assert triple35.P[s, s2] == expect


class TestExactCovariances:
    """Frozen values computed by the enumeration oracle above."""

    @pytest.mark.parametrize(
        "name,expected",
        [
            ("ghm-pair", [Fraction(2, 9), Fraction(-2, 27), Fraction(0)]),
            ("triple-ex35", [Fraction(8, 9), Fraction(-2, 9), Fraction(-2, 27), Fraction(0)]),
            (
                "fca-quad",
                # matches the component values the quadruple construction is
                # known to produce: 40/81 and -17/243, -19/729, -2/729
                [
                    Fraction(40, 81),
                    Fraction(-17, 243),
                    Fraction(-19, 729),
                    Fraction(-2, 729),
                    Fraction(0),
                ],
            ),
        ],
    )
    def test_window_covariances(self, name, expected):
        m = build_preset(name)
        for k, want in enumerate(expected):
            assert window_autocov_exact(m, k) == want
            assert abs(autocovariance_exact(m, k) - float(want)) <= 1e-14
