"""Schedule families against a quadrature oracle, plus validator verdicts."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from pgflow.errors import InvalidInputError
from pgflow.schedules import Constant, Power, PowerGE1, validate

FAMILIES = [
    Constant(K=2.0),
    Power(K=1.0, alpha=0.3),
    Power(K=1.0, alpha=0.5),
    Power(K=2.5, alpha=0.9),
    PowerGE1(K=1.0, alpha=1.0),
    PowerGE1(K=1.0, alpha=2.0),
    PowerGE1(K=3.0, alpha=1.5),
]


class TestFrozenValues:
    def test_constant_value(self):
        assert Constant(K=2.0).value(7.0) == 2.0

    def test_power_values(self):
        s = Power(K=1.0, alpha=0.5)
        assert s.value(0.0) == 1.0
        assert s.value(3.0) == pytest.approx(0.5)

    def test_derivatives(self):
        assert Constant(K=2.0).derivative(13.0) == 0.0
        assert Power(K=1.0, alpha=0.5).derivative(0.0) == pytest.approx(-0.5)
        assert PowerGE1(K=2.0, alpha=1.0).derivative(1.0) == pytest.approx(-0.5)

    def test_gamma_closed_forms(self):
        assert Constant(K=2.0).gamma(5.0) == 10.0
        # antiderivative of (1+t)^(-1/2) from 0 to 10
        assert Power(K=1.0, alpha=0.5).gamma(10.0) == pytest.approx(2.0 * (math.sqrt(11.0) - 1.0))
        for s in FAMILIES:
            assert s.gamma(0.0) == 0.0

    def test_gamma_log_form(self):
        assert PowerGE1(K=1.0, alpha=1.0).gamma(math.e - 1.0) == pytest.approx(1.0)

    def test_gamma_limits(self):
        assert Power(K=1.0, alpha=0.5).gamma_limit() == math.inf
        assert Constant(K=1.0).gamma_limit() == math.inf
        assert PowerGE1(K=1.0, alpha=1.0).gamma_limit() == math.inf
        assert PowerGE1(K=1.0, alpha=2.0).gamma_limit() == pytest.approx(1.0)
        assert PowerGE1(K=3.0, alpha=2.5).gamma_limit() == pytest.approx(2.0)


@pytest.mark.parametrize("s", FAMILIES, ids=lambda s: f"{type(s).__name__}-a{s.alpha:g}")
class TestAgainstQuadrature:
    def test_gamma_matches_quadrature(self, s):
        for t in (0.5, 1.0, 7.0, 33.0, 100.0):
            num, _ = quad(s.value, 0.0, t, limit=200)
            assert s.gamma(t) == pytest.approx(num, abs=1e-9)

    def test_derivative_matches_finite_differences(self, s):
        h = 1e-6
        for t in (0.0, 0.7, 4.0, 50.0):
            fd = (s.value(t + h) - s.value(max(t - h, 0.0))) / (h if t < h else 2 * h)
            d = s.derivative(t)
            assert d == pytest.approx(fd, rel=1e-5, abs=1e-10)

    def test_gamma_concave_when_monotone(self, s):
        assert s.monotone
        ts = np.linspace(0.0, 60.0, 400)
        g = np.array([s.gamma(t) for t in ts])
        assert np.all(np.diff(g, 2) <= 1e-9)

    def test_gamma_doubling_bound(self, s):
        # non-increasing lambda puts at least half of gamma(t) before t/2
        for t in (0.4, 2.0, 10.0, 80.0):
            assert s.gamma(t) <= 2.0 * s.gamma(t / 2.0) + 1e-12

    def test_gamma_strictly_increasing(self, s):
        ts = np.linspace(0.0, 20.0, 100)
        g = np.array([s.gamma(t) for t in ts])
        assert np.all(np.diff(g) > 0)

    def test_negative_time_rejected(self, s):
        for method in (s.value, s.derivative, s.gamma):
            with pytest.raises(InvalidInputError):
                method(-0.1)


class TestValidator:
    def test_power_all_pass(self):
        rep = validate(Power(K=1.0, alpha=0.5), theta=0.25)
        assert rep.gamma_unbounded.passed
        assert rep.variation_finite.passed
        assert rep.power_tail_integrable.passed
        assert rep.exp_tail_integrable.status == "not-applicable"
        assert rep.monotone

    def test_saturating_clock_fails_with_evidence(self):
        rep = validate(PowerGE1(K=1.0, alpha=2.0))
        assert rep.gamma_unbounded.status == "fail"
        assert rep.gamma_unbounded.evidence["gamma_limit"] == pytest.approx(1.0, abs=1e-9)

    def test_saturating_clock_evidence_scales_with_K(self):
        rep = validate(PowerGE1(K=6.0, alpha=4.0))
        assert rep.gamma_unbounded.evidence["gamma_limit"] == pytest.approx(2.0, abs=1e-9)

    def test_constant_exponential_tail(self):
        rep = validate(Constant(K=1.0), theta=0.5)
        assert rep.gamma_unbounded.passed
        assert rep.variation_finite.passed
        assert rep.exp_tail_integrable.passed
        assert rep.power_tail_integrable.status == "not-applicable"
        # evidence carries one quadrature value per probed c
        assert len(rep.exp_tail_integrable.evidence) == 3

    def test_log_clock_power_tail_threshold(self):
        # Gamma ~ log t: tail integrable iff theta/(1-2 theta) > 1, i.e. theta > 1/3
        assert validate(PowerGE1(K=1.0, alpha=1.0), theta=0.4).power_tail_integrable.passed
        assert not validate(PowerGE1(K=1.0, alpha=1.0), theta=0.3).power_tail_integrable.passed

    def test_bounded_clock_fails_both_tails(self):
        assert validate(PowerGE1(K=1.0, alpha=2.0), theta=0.25).power_tail_integrable.status == "fail"
        assert validate(PowerGE1(K=1.0, alpha=2.0), theta=0.5).exp_tail_integrable.status == "fail"

    def test_variation_evidence_matches_quadrature(self):
        rep = validate(Power(K=2.0, alpha=0.5), horizon=1000.0)
        ev = rep.variation_finite.evidence
        assert ev["total_variation"] == pytest.approx(2.0)
        # partial integral approaches the total variation from below
        assert ev["abs_derivative_integral_to_horizon"] < ev["total_variation"]
        assert ev["abs_derivative_integral_to_horizon"] == pytest.approx(2.0, abs=0.1)

    def test_theta_out_of_range(self):
        with pytest.raises(InvalidInputError):
            validate(Power(K=1.0, alpha=0.5), theta=0.75)
        with pytest.raises(InvalidInputError):
            validate(Power(K=1.0, alpha=0.5), theta=0.0)

    def test_family_parameter_validation(self):
        with pytest.raises(InvalidInputError):
            Power(K=1.0, alpha=1.0)
        with pytest.raises(InvalidInputError):
            PowerGE1(K=1.0, alpha=0.5)
        with pytest.raises(InvalidInputError):
            Constant(K=0.0)
        with pytest.raises(InvalidInputError):
            Constant(K=-2.0)
