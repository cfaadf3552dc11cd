from fractions import Fraction

import numpy as np
import pytest

from persistlab import (
    MarkovSpec,
    SeedSpec,
    ValidationError,
    autocovariance_exact,
    make_walk_model,
    parse_chain_text,
    reverse,
    sample_stationary_path,
    sample_stationary_paths,
    stationary,
    validate,
)
from persistlab.chain import stationary_power


def spec_of(rows, labels=None):
    P = np.array(rows, dtype=float)
    labels = labels or tuple(str(i) for i in range(len(rows)))
    return MarkovSpec(P=P, labels=labels)


class TestValidate:
    def test_symmetric_two_state_ok(self):
        validate(spec_of([[0.3, 0.7], [0.7, 0.3]]))

    def test_identity_reducible(self):
        with pytest.raises(ValidationError) as exc:
            validate(spec_of([[1.0, 0.0], [0.0, 1.0]]))
        assert exc.value.code == "REDUCIBLE"

    def test_bad_row_sum(self):
        with pytest.raises(ValidationError) as exc:
            validate(spec_of([[0.5, 0.6], [0.5, 0.5]]))
        assert exc.value.code == "NOT_STOCHASTIC"
        assert "row 0" in str(exc.value)

    def test_negative_entry(self):
        with pytest.raises(ValidationError) as exc:
            validate(spec_of([[-0.1, 1.1], [0.5, 0.5]]))
        assert exc.value.code == "NEGATIVE_ENTRY"


class TestStationary:
    def test_persistent_half_half(self, persistent75):
        dist = stationary(persistent75.spec)
        np.testing.assert_allclose(dist.pi, [0.5, 0.5], atol=1e-14)

    def test_example32_true_law(self, example32):
        # solve of pi P = pi; the printed (1/3,1/3,1/3) fails the equation
        dist = stationary(example32.spec)
        np.testing.assert_allclose(dist.pi, [0.4, 0.2, 0.4], atol=1e-13)
        assert dist.exact == (Fraction(2, 5), Fraction(1, 5), Fraction(2, 5))
        bad = np.array([1 / 3, 1 / 3, 1 / 3])
        assert np.abs(bad @ example32.P - bad).max() > 1e-3

    def test_window_chain_uniform(self, ghm_pair):
        dist = stationary(ghm_pair.spec)
        np.testing.assert_allclose(dist.pi, np.full(9, 1 / 9), atol=1e-13)

    def test_power_iteration_agrees(self, example32):
        pi = stationary_power(example32.spec, iters=3000)
        np.testing.assert_allclose(pi, example32.pi, atol=1e-8)

    def test_invariants(self, fca_quad):
        pi = fca_quad.pi
        assert pi.min() >= 0
        assert abs(pi.sum() - 1) <= 1e-12
        assert np.abs(pi @ fca_quad.P - pi).max() <= 1e-10


class TestReverse:
    def test_symmetric_chain_self_reverse(self, persistent75):
        np.testing.assert_allclose(reverse(persistent75).P, persistent75.P, atol=1e-15)

    def test_example32_reversed_keeps_pi(self, example32):
        rspec = reverse(example32)
        np.testing.assert_allclose(rspec.P.sum(axis=1), 1.0, atol=1e-14)
        np.testing.assert_allclose(example32.pi @ rspec.P, example32.pi, atol=1e-14)

    def test_double_reverse(self, example32):
        rspec = reverse(example32)
        rmodel = make_walk_model(rspec, example32.g, dist=example32.dist)
        np.testing.assert_allclose(reverse(rmodel).P, example32.P, atol=1e-12)

    def test_window_reverse_slides_left(self, ghm_pair):
        # two-step joint law: reversed pair chain reads the window right-to-left
        R = reverse(ghm_pair).P
        for s1, l1 in enumerate(ghm_pair.spec.labels):
            for s2, l2 in enumerate(ghm_pair.spec.labels):
                expect = 1 / 3 if l1[0] == l2[1] else 0.0
                assert abs(R[s1, s2] - expect) <= 1e-14


class TestSampling:
    def test_zero_steps(self, srw, seed):
        states, incs = sample_stationary_path(srw, 0, seed)
        assert incs.size == 0 and states.size == 1

    def test_mean_zero_large_sample(self, srw, seed):
        _, incs = sample_stationary_paths(srw, 100, 10_000, seed)
        vals = incs.astype(float).ravel()  # 1e6 stationary increments
        assert abs(vals.mean()) <= 4.0 * vals.std() / np.sqrt(vals.size)

    def test_deterministic_given_seed(self, example32, seed):
        a = sample_stationary_paths(example32, 50, 8, seed, "forward", 3)
        b = sample_stationary_paths(example32, 50, 8, seed, "forward", 3)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_backward_uses_reversed_kernel(self, example32, seed):
        # one-step joint law of a backward path is pi(x) Prev(x, y)
        states, _ = sample_stationary_paths(example32, 1, 200_000, seed, "backward")
        R = reverse(example32).P
        joint = np.zeros((3, 3))
        for x in range(3):
            for y in range(3):
                joint[x, y] = np.mean((states[:, 0] == x) & (states[:, 1] == y))
        np.testing.assert_allclose(joint, example32.pi[:, None] * R, atol=4e-3)

    def test_window_matches_generic_law(self, ghm_pair, seed):
        # window fast path and generic stepping agree in distribution
        s_win, _ = sample_stationary_paths(ghm_pair, 3, 100_000, seed, "forward", 0)
        generic = ghm_pair.__class__(
            spec=ghm_pair.spec,
            dist=ghm_pair.dist,
            g=ghm_pair.g,
            integer_valued=True,
            g_exact=ghm_pair.g_exact,
            window=None,
            name="generic",
        )
        s_gen, _ = sample_stationary_paths(generic, 3, 100_000, seed, "forward", 1)
        for col in range(4):
            f_win = np.bincount(s_win[:, col], minlength=9) / 1e5
            f_gen = np.bincount(s_gen[:, col], minlength=9) / 1e5
            assert np.abs(f_win - f_gen).max() < 6e-3


class TestAutocovariance:
    def test_persistent_geometric(self, persistent75):
        # keep-sign chains: Cov(g_0, g_k) = (alpha - beta)^k
        for k in range(6):
            assert abs(autocovariance_exact(persistent75, k) - 0.5**k) <= 1e-14

    def test_example32_lag_one(self, example32):
        # independent solve: pi diag(g) P g with pi = (2/5, 1/5, 2/5)
        assert abs(autocovariance_exact(example32, 1) - 7 / 30) <= 1e-15

    def test_window_lags_vanish(self, triple35):
        for k in (3, 4, 5):
            assert abs(autocovariance_exact(triple35, k)) <= 1e-14


CHAIN_FILE = """\
# a persistent sign chain
states 2
P
0.7 0.3
0.3 0.7
g
-1 +1
"""


class TestChainFile:
    def test_well_formed(self):
        m = parse_chain_text(CHAIN_FILE)
        np.testing.assert_allclose(m.pi, [0.5, 0.5], atol=1e-14)
        assert m.integer_valued
        assert m.spec.P_exact[0][0] == Fraction(7, 10)

    def test_bad_row_sum_reports_line(self):
        bad = CHAIN_FILE.replace("0.7 0.3", "0.6 0.3", 1)
        with pytest.raises(ValidationError) as exc:
            parse_chain_text(bad)
        assert exc.value.code == "NOT_STOCHASTIC"

    def test_mean_not_zero(self):
        bad = CHAIN_FILE.replace("-1 +1", "1 +1")
        with pytest.raises(ValidationError) as exc:
            parse_chain_text(bad)
        assert exc.value.code == "MEAN_NOT_ZERO"

    def test_parse_error_carries_line_number(self):
        from persistlab import ParseError

        with pytest.raises(ParseError) as exc:
            parse_chain_text("states 2\nP\n0.5 x\n0.5 0.5\ng\n-1 1\n")
        assert exc.value.line == 3

    def test_rational_tokens_accepted(self):
        text = "states 2\nP\n1/2 1/2\n1/2 1/2\ng\n-1 1\n"
        m = parse_chain_text(text)
        assert m.spec.P_exact[0][0] == Fraction(1, 2)
