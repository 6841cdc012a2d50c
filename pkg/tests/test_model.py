import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from wonham_lab import ModelSpec, coupling_rate, matrix_exponential, spectral_gap, validate
from wonham_lab.exceptions import NonErgodicError
from wonham_lab.model import expm, is_ergodic, stationary_distribution

from oracles import expm_two_state

CIRC = [[-2, 1, 1], [1, -2, 1], [1, 1, -2]]


def random_generator(rng, d, sparsity=0.0):
    g = rng.uniform(0.1, 3.0, (d, d))
    g[rng.random((d, d)) < sparsity] = 0.0
    np.fill_diagonal(g, 0.0)
    np.fill_diagonal(g, -g.sum(axis=1))
    return g


class TestValidate:
    def test_canonical_model_is_valid(self):
        rep = validate(ModelSpec([[-1, 1], [1, -1]], [1, -1], 1.0, [0.5, 0.5]))
        assert rep.valid and not rep.warnings

    def test_row_sum_violation(self):
        rep = validate(ModelSpec([[-1, 0.5], [1, -1]], [1, -1], 1.0))
        assert not rep.valid
        assert any("row-sum" in e for e in rep.errors)

    def test_equal_levels_warn(self):
        rep = validate(ModelSpec([[-1, 1], [1, -1]], [3, 3], 1.0))
        assert rep.valid
        assert rep.warnings == ["Delta h=0: 2-state closed form undefined"]

    @pytest.mark.parametrize("nu", [[0.7, 0.7], [-0.1, 1.1], [1.0]])
    def test_bad_initial_law(self, nu):
        assert not validate(ModelSpec([[-1, 1], [1, -1]], [1, -1], 1.0, nu)).valid

    def test_negative_rate_and_sigma(self):
        rep = validate(ModelSpec([[1, -1], [1, -1]], [1, -1], 0.0))
        assert len(rep.errors) >= 2

    def test_reducible(self):
        rep = validate(ModelSpec([[-1, 1, 0], [0, 0, 0], [0, 1, -1]], [0, 1, 2], 1.0))
        assert "generator is not ergodic" in rep.errors


@pytest.mark.parametrize("g, mu", [
    ([[-1, 1], [1, -1]], [0.5, 0.5]),
    ([[-1, 1], [2, -2]], [2 / 3, 1 / 3]),
    (CIRC, [1 / 3] * 3),
])
def test_stationary_distribution(g, mu):
    assert np.allclose(stationary_distribution(g), mu, atol=1e-14)


def test_stationary_fixed_point_random():
    rng = np.random.default_rng(3)
    for d in (2, 3, 5, 8):
        g = random_generator(rng, d, sparsity=0.3)
        if not is_ergodic(g):
            continue
        mu = stationary_distribution(g)
        assert mu.min() > 0
        assert abs(mu.sum() - 1) < 1e-12
        assert np.abs(mu @ g).max() < 1e-10


def test_reducible_rejected():
    with pytest.raises(NonErgodicError):
        stationary_distribution([[0, 0], [1, -1]])


@pytest.mark.parametrize("g, gap", [([[-1, 1], [1, -1]], -2.0), ([[-1, 1], [2, -2]], -3.0),
                                    (CIRC, -3.0)])
def test_spectral_gap(g, gap):
    assert spectral_gap(g) == pytest.approx(gap, abs=1e-12)


def test_spectral_gap_permutation_invariant():
    rng = np.random.default_rng(8)
    g = random_generator(rng, 5)
    p = rng.permutation(5)
    ref = max(ev.real for ev in np.linalg.eigvals(g) if abs(ev) > 1e-9)
    assert spectral_gap(g) == pytest.approx(ref, abs=1e-10)
    assert spectral_gap(g[np.ix_(p, p)]) == pytest.approx(spectral_gap(g), abs=1e-10)


class TestExponential:
    def test_identity_at_zero(self):
        assert np.array_equal(matrix_exponential(CIRC, 0.0), np.eye(3))

    def test_symmetric_example(self):
        e2 = math.exp(-2)
        want = np.array([[(1 + e2) / 2, (1 - e2) / 2], [(1 - e2) / 2, (1 + e2) / 2]])
        got = matrix_exponential([[-1, 1], [1, -1]], 1.0)
        assert np.allclose(got, want, atol=1e-15)
        assert got[0, 0] == pytest.approx(0.56767, abs=5e-6)

    @given(st.floats(0.01, 20), st.floats(0.01, 20), st.floats(1e-4, 5))
    @settings(max_examples=60, deadline=None)
    def test_two_state_closed_form(self, a, b, t):
        got = matrix_exponential([[-a, a], [b, -b]], t)
        assert np.allclose(got, expm_two_state(a, b, t), atol=1e-13, rtol=1e-12)

    def test_matches_scipy(self):
        rng = np.random.default_rng(1)
        for d in (3, 4, 6):
            a = random_generator(rng, d) * rng.uniform(0.1, 10)
            assert np.allclose(expm(a), scipy.linalg.expm(a), atol=1e-12, rtol=1e-11)

    def test_long_time_rows_equal_mu(self):
        rng = np.random.default_rng(2)
        g = random_generator(rng, 4)
        p = matrix_exponential(g, 100.0)
        assert np.abs(p - stationary_distribution(g)).max() < 1e-8

    def test_stochastic_rows(self):
        p = matrix_exponential(CIRC, 0.37)
        assert p.min() >= 0
        assert np.abs(p.sum(axis=1) - 1).max() < 1e-14


class TestCouplingRate:
    def test_symmetric_value(self):
        e2 = math.exp(-2)
        assert coupling_rate([[-1, 1], [1, -1]]) == pytest.approx(1 - (1 - e2 ** 2) / 2, abs=1e-14)
        assert coupling_rate([[-1, 1], [1, -1]]) == pytest.approx(0.50914, abs=5e-5)

    def test_fast_chain_tends_to_half(self):
        assert coupling_rate(10 * np.array([[-1.0, 1], [1, -1]])) == pytest.approx(0.5, abs=1e-8)

    def test_slow_chain_near_one(self):
        eps = 1e-6
        r = coupling_rate([[-eps, eps], [eps, -eps]])
        assert r == pytest.approx(1 - 2 * eps, abs=1e-10)
        assert r < 1

    def test_monotone_in_speed(self):
        rs = [coupling_rate(c * np.array([[-1.0, 1], [1, -1]])) for c in (0.01, 0.1, 1, 3)]
        assert all(a > b for a, b in zip(rs, rs[1:]))
