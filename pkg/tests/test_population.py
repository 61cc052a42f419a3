import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clearn.errors import BoundaryError, DimensionMismatchError, InvalidParameterError
from clearn.losses import LossParams, coherence_v
from clearn.population import (
    FiniteDistribution,
    cond_risk,
    eta_tilde,
    eta_tilde_sign,
    exact_risks,
    f_star,
    log_eta_tilde,
    risk_gap,
    w_sum_minus_one,
)

import oracles

# frozen from oracles.f_star_by_search / mp_eta_tilde / mp_cond_risk
F_STAR_1_1_08 = 2.153962071818679
ETA_TILDE_1_1_1 = 0.6378903113466692
COND_RISK_1_1_05_0 = 1.313261687518223
RISK_GAP_1_1_08_1 = 0.121448209315115

P11 = LossParams(rho=1.0, u=1.0)


class TestFStar:
    def test_logistic_case(self):
        assert f_star(LossParams(1.0, 0.0), 0.8) == pytest.approx(math.log(4.0), abs=1e-14)

    def test_half_is_zero(self):
        assert f_star(P11, 0.5) == 0.0

    def test_against_search_oracle(self):
        assert f_star(P11, 0.8) == pytest.approx(F_STAR_1_1_08, abs=1e-12)
        assert F_STAR_1_1_08 == pytest.approx(float(oracles.f_star_by_search(1, 1, 0.8)), abs=1e-12)

    @pytest.mark.parametrize("eta", [0.0, 1.0, -0.1, 1.5])
    def test_boundary(self, eta):
        with pytest.raises(BoundaryError):
            f_star(P11, eta)

    def test_sign_matches_bayes(self):
        eta = np.linspace(0.01, 0.99, 99)
        eta = eta[np.abs(eta - 0.5) > 1e-9]
        for p in (P11, LossParams(0.01, 2.0), LossParams(50.0, 0.0)):
            assert np.array_equal(np.sign(f_star(p, eta)), np.sign(eta - 0.5))

    def test_odd_symmetry(self):
        eta = np.linspace(0.01, 0.49, 25)
        p = LossParams(0.3, 1.5)
        assert np.allclose(f_star(p, eta), -f_star(p, 1 - eta), rtol=0, atol=1e-13)

    def test_small_temperature_limit(self):
        p = LossParams(1e-3, 1.0)
        for eta in (0.1, 0.2, 0.3, 0.4, 0.6, 0.7, 0.8, 0.9):
            assert abs(abs(f_star(p, eta)) - 1.0) < 5e-3

    def test_derivative_lower_bound(self):
        h = 1e-6
        for rho in (0.1, 1.0, 3.0):
            for u in (0.0, 0.5, 1.0, 2.0):
                p = LossParams(rho, u)
                for eta in np.linspace(0.05, 0.95, 19):
                    fd = (f_star(p, eta + h) - f_star(p, eta - h)) / (2 * h)
                    bound = rho / (eta * (1 - eta))
                    assert fd >= bound - 1e-6
                    if u == 0.0:
                        assert fd == pytest.approx(bound, abs=1e-6 * max(1.0, bound))

    def test_stable_at_extreme_eta_small_rho(self):
        p = LossParams(1e-3, 1.0)
        for eta in (1e-9, 0.49999, 0.5 + 1e-12, 1 - 1e-9):
            assert np.isfinite(f_star(p, eta))


class TestEtaTilde:
    def test_half_at_zero(self):
        assert eta_tilde(P11, 0.0) == 0.5

    def test_value(self):
        assert eta_tilde(P11, 1.0) == pytest.approx(ETA_TILDE_1_1_1, abs=1e-14)
        assert ETA_TILDE_1_1_1 == pytest.approx(float(oracles.mp_eta_tilde(1, 1, 1)), abs=1e-15)

    def test_degenerate_level(self):
        assert eta_tilde(LossParams(0.01, 1.0), 1.0) == pytest.approx(2 / 3, abs=1e-6)

    def test_round_trip(self):
        eta = np.linspace(0.01, 0.99, 197)
        for p in (P11, LossParams(0.1, 1.0), LossParams(5.0, 2.0), LossParams(1.0, 0.0)):
            assert np.max(np.abs(eta_tilde(p, f_star(p, eta)) - eta)) < 1e-10

    @settings(max_examples=200, deadline=None)
    @given(st.floats(-30, 30), st.floats(1e-3, 1e2), st.floats(0, 5))
    def test_in_open_interval_and_symmetric(self, f, rho, u):
        p = LossParams(rho, u)
        lp, lq = log_eta_tilde(p, f)
        # both logs finite: the probability never rounds to exactly 0 or 1 in log space
        assert np.isfinite(lp) and np.isfinite(lq)
        assert lp <= 0 and lq <= 0 and min(lp, lq) <= -math.log(2) + 1e-15
        lp2, lq2 = log_eta_tilde(p, -f)
        assert lp == pytest.approx(lq2, rel=1e-12, abs=1e-300)

    def test_sign_where_probability_rounds_to_half(self):
        p = LossParams(1e-3, 1.0)
        f = np.array([-0.5, -0.1, 0.0, 0.1, 0.5, 1.5])
        assert np.all(eta_tilde(p, f[np.abs(f) < 1]) == 0.5)
        assert np.array_equal(eta_tilde_sign(p, f), np.sign(f))

    @settings(max_examples=200, deadline=None)
    @given(st.floats(-30, 30), st.floats(1e-3, 1e2))
    def test_sign_matches_probability_when_resolved(self, f, rho):
        p = LossParams(rho, 1.0)
        s = eta_tilde_sign(p, f)
        assert s == np.sign(f)
        e = eta_tilde(p, f)
        if e != 0.5:
            assert np.sign(e - 0.5) == s

    def test_strictly_increasing(self):
        f = np.linspace(-5, 5, 1001)
        assert np.all(np.diff(eta_tilde(LossParams(0.5, 1.0), f)) > 0)

    def test_limits(self):
        lo = LossParams(1e-4, 1.0)
        for f, target in [(2, 1.0), (1, 2 / 3), (0, 0.5), (-1, 1 / 3), (-2, 0.0)]:
            assert abs(eta_tilde(lo, f) - target) < 1e-3
        hi = LossParams(1e4, 1.0)
        for f in (-2, -1, 0, 1, 2):
            assert abs(eta_tilde(hi, f) - 0.5) < 1e-3

    def test_weight_identity(self):
        for p in (P11, LossParams(0.2, 3.0), LossParams(2.0, 0.5)):
            for f in (-3.0, -0.4, 0.0, 1.1, 4.0):
                assert w_sum_minus_one(p, f) > 0
                w1 = 1 / (1 + math.exp((f - p.u) / p.rho))
                w2 = 1 / (1 + math.exp(-(f + p.u) / p.rho))
                assert eta_tilde(p, f) == pytest.approx(w2 / (w1 + w2), rel=1e-13)
        assert w_sum_minus_one(LossParams(1.0, 0.0), 0.7) == pytest.approx(0.0, abs=1e-15)


class TestRisks:
    def test_degenerate_class(self):
        for f in (-2.0, 0.0, 3.0):
            assert cond_risk(P11, 1.0, f) == pytest.approx(coherence_v(P11, f), rel=1e-15)

    def test_value(self):
        assert cond_risk(P11, 0.5, 0.0) == pytest.approx(COND_RISK_1_1_05_0, abs=1e-14)
        assert COND_RISK_1_1_05_0 == pytest.approx(float(oracles.mp_cond_risk(1, 1, 0.5, 0)), abs=1e-14)

    def test_gap_zero_at_minimizer(self):
        for eta in (0.1, 0.5, 0.77):
            assert risk_gap(P11, eta, f_star(P11, eta)) == pytest.approx(0.0, abs=1e-14)

    def test_gap_quadratic_lower_bound(self):
        assert risk_gap(P11, 0.8, 0.0) >= 2 * 0.3**2
        for p in (P11, LossParams(0.3, 2.0), LossParams(3.0, 0.5)):
            for eta in np.linspace(0.05, 0.95, 10):
                for f in np.linspace(-4, 4, 17):
                    assert risk_gap(p, eta, f) >= 2 * p.rho * (eta - eta_tilde(p, f)) ** 2 - 1e-12

    def test_gap_value(self):
        ref = float(oracles.mp_cond_risk(1, 1, 0.8, 1) - oracles.mp_cond_risk(1, 1, 0.8, F_STAR_1_1_08))
        assert RISK_GAP_1_1_08_1 == pytest.approx(ref, abs=1e-13)
        assert risk_gap(P11, 0.8, 1.0) == pytest.approx(RISK_GAP_1_1_08_1, abs=1e-13)


class TestExactRisks:
    def test_bayes_scores(self):
        dist = FiniteDistribution.from_atoms([(0.2, 0.1), (0.3, 0.6), (0.5, 0.9)])
        r = exact_risks(P11, dist, f_star(P11, dist.etas))
        assert r.surrogate_gap == pytest.approx(0.0, abs=1e-14)
        assert r.zero_one_risk == pytest.approx(r.bayes_risk, abs=1e-15)

    def test_single_atom(self):
        dist = FiniteDistribution.from_atoms([(1.0, 0.8)])
        r = exact_risks(P11, dist, [-1.0])
        assert r.zero_one_risk == pytest.approx(0.8)
        assert r.bayes_risk == pytest.approx(0.2)

    def test_misaligned(self):
        dist = FiniteDistribution.from_atoms([(1.0, 0.8)])
        with pytest.raises(DimensionMismatchError):
            exact_risks(P11, dist, [1.0, 2.0])

    def test_weights_validated(self):
        with pytest.raises(InvalidParameterError):
            FiniteDistribution([0.5, 0.4], [0.1, 0.2])

    def test_bound_on_five_atoms(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            w = rng.dirichlet(np.ones(5))
            w[-1] = 1.0 - w[:-1].sum()
            dist = FiniteDistribution(w, rng.uniform(0, 1, 5))
            p = LossParams(rng.uniform(0.05, 3), 1.0)
            r = exact_risks(p, dist, rng.normal(0, 2, 5))
            assert r.zero_one_risk <= r.bayes_risk + math.sqrt(2 * r.surrogate_gap / p.rho) + 1e-12
