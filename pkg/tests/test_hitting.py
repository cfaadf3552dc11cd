import numpy as np
import pytest

from persistlab import (
    ValidationError,
    build_preset,
    hitting_kernel,
    hitting_kernel_converged,
    prop34_check,
    suggested_cap,
)


def kernel_bruteforce(model, x, j, H):
    """Oracle: absorbing DFS over state paths (lands-on-level convention)."""
    n = model.n_states
    g = model.g_int
    P = model.P
    probs = np.zeros((j + 1, n))
    missed = np.zeros(j + 1)
    tail = np.zeros(j + 1)
    for i in range(j):

        def walk(state, level, depth, pr):
            if depth == H:
                tail[i] += pr
                return
            for y in range(n):
                p = P[state, y]
                if p == 0.0:
                    continue
                lv = level + int(g[y])
                if lv <= i:
                    if lv == i:
                        probs[i, y] += pr * p
                    else:
                        missed[i] += pr * p
                else:
                    walk(y, lv, depth + 1, pr * p)

        walk(x, j, 0, 1.0)
    probs[j, x] = 1.0
    return probs, missed, tail


class TestKernel:
    def test_start_level_point_mass(self, example32):
        kern = hitting_kernel(example32, 2, 3, 5)
        want = np.zeros(3)
        want[2] = 1.0
        np.testing.assert_array_equal(kern.probs[3], want)

    @pytest.mark.parametrize(
        "name,H", [("srw", 12), ("persistent:0.7", 12), ("example32", 12), ("cca", 10), ("ghm-pair", 8), ("triple-ex35", 8)]
    )
    def test_matches_bruteforce(self, name, H):
        if ":" in name:
            base, arg = name.split(":")
            m = build_preset(base, alpha=arg)
        else:
            m = build_preset(name)
        kern = hitting_kernel(m, 0, 2, H)
        bf_p, bf_m, bf_t = kernel_bruteforce(m, 0, 2, H)
        assert np.abs(kern.probs - bf_p).max() <= 1e-12
        assert np.abs(kern.missed - bf_m).max() <= 1e-12
        assert np.abs(kern.tail - bf_t).max() <= 1e-12

    def test_persistent_down_crossing_state(self, persistent70):
        # the first strict down-crossing of a +-1 walk ends with a -1 step
        minus = persistent70.state_index("-1")
        kern = hitting_kernel(persistent70, persistent70.state_index("+1"), 1, 2000)
        assert kern.probs[0].argmax() == minus
        assert kern.probs[0][1 - minus] == 0.0

    def test_mass_accounting(self, srw):
        kern = hitting_kernel(srw, 0, 2, 500)
        for i in range(3):
            total = kern.probs[i].sum() + kern.missed[i] + kern.tail[i]
            assert abs(total - 1.0) <= 1e-12

    def test_tail_decreases_with_horizon(self, srw):
        tails = []
        for H in (100, 1000, 10_000):
            kern = hitting_kernel(srw, 1, 1, H, cap=suggested_cap(1.0, H))
            tails.append(kern.tail[0])
        assert tails[0] > tails[1] > tails[2] > 0

    def test_triple_never_jumps_past(self, triple35):
        # a -2 step only happens one step after a +1 arrival, so the walk
        # cannot jump past a level it has not visited: missed mass is zero
        kern = hitting_kernel(triple35, 0, 1, 400)
        assert kern.missed[0] == 0.0
        assert kern.probs[0].sum() + kern.tail[0] <= 1 + 1e-12

    def test_iid_down_jumps_miss(self):
        from fractions import Fraction

        m = build_preset("iid", values=[-2, 1], probs=[Fraction(1, 3), Fraction(2, 3)])
        kern = hitting_kernel(m, 0, 1, 400)
        assert kern.missed[0] > 0.3  # the first step alone jumps past with prob 1/3
        assert kern.probs[0].sum() + kern.missed[0] + kern.tail[0] <= 1 + 1e-12

    def test_doubling_stops_at_h_max(self, srw):
        kern = hitting_kernel_converged(srw, 1, 1, tol=1e-6, h0=64, h_max=256, gamma=1.0)
        assert kern.horizon == 256  # sqrt-decay tails cannot meet 1e-6 this soon
        assert kern.tail[0] > 1e-6

    def test_non_integer_rejected(self):
        from fractions import Fraction

        m = build_preset("iid", values=[-1, Fraction(1, 2)], probs=[Fraction(1, 3), Fraction(2, 3)])
        with pytest.raises(ValidationError):
            hitting_kernel(m, 0, 1, 10)


class TestProp34:
    def test_relation1_exact_everywhere(self, example32):
        for t in (5, 50, 500):
            rep = prop34_check(example32, 1, 1, t)
            assert rep.relation1_residual <= 1e-12

    def test_ratios_approach_one(self, srw):
        r100 = prop34_check(srw, 0, 1, 100)
        r2000 = prop34_check(srw, 0, 1, 2000)
        assert abs(r2000.relation2_ratio - 1) < abs(r100.relation2_ratio - 1)
        assert abs(r2000.relation3_ratio - 1) < abs(r100.relation3_ratio - 1)
        assert abs(r2000.relation2_ratio - 1) < 0.01

    def test_negative_level_rejected(self, srw):
        with pytest.raises(ValidationError):
            prop34_check(srw, 0, -1, 10)
