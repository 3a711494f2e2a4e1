"""
Tests for the psi <-> rate correspondence.
"""

import math

import numpy as np
import pytest

from dani import (
    AffineRate,
    DomainError,
    PowerLaw,
    RateValidityError,
    Tabulated,
    divergence_probe,
    identity_residual,
    eval_psi,
    load_tabulated_csv,
    power_law_rate,
    psi_from_dict,
    psi_to_rate,
    rate_to_psi,
    start_time,
)


class TestApproxFunctions:
    """Evaluating the supported psi kinds."""

    def test_power_law(self):
        """Test psi(x) = c x^-delta."""
        assert eval_psi(PowerLaw(1.0, 1.0), 10.0) == pytest.approx(0.1)

    def test_constant_power_law(self):
        """Test a constant psi."""
        assert eval_psi(PowerLaw(2.5, 0.0), 1234.0) == pytest.approx(2.5)

    def test_tabulated_log_linear(self):
        """Test the tabulated psi is log-linear between knots."""
        f = Tabulated((1.0, math.e ** 2), (1.0, math.e ** -2))
        assert eval_psi(f, math.e) == pytest.approx(math.exp(-1))

    def test_tabulated_extrapolates_last_segment(self):
        """Test the last tabulated segment is extended past the table."""
        f = Tabulated((1.0, 10.0), (1.0, 0.1))
        assert eval_psi(f, 100.0) == pytest.approx(0.01)

    def test_vectorized_matches_scalar(self):
        """Test array evaluation agrees with scalar evaluation."""
        f = Tabulated((1.0, 4.0, 50.0), (2.0, 0.5, 0.01))
        lx = np.linspace(0.0, 6.0, 25)
        expected = [f.log_psi_log(float(v)) for v in lx]
        assert np.allclose(f.log_psi_log_array(lx), expected)

    def test_scaled(self):
        """Test scaling psi by a constant factor."""
        f = PowerLaw(1.0, 1.0).scaled(2.0)
        assert eval_psi(f, 4.0) == pytest.approx(0.5)

    def test_below_domain(self):
        """Test psi below x0 is refused."""
        with pytest.raises(DomainError):
            eval_psi(PowerLaw(1.0, 1.0, x0=2.0), 1.0)

    def test_tabulated_rejects_increasing_values(self):
        """Test a tabulated psi must be nonincreasing."""
        with pytest.raises(ValueError):
            Tabulated((1.0, 2.0), (1.0, 2.0))

    def test_from_dict(self):
        """Test building psi from a config dict."""
        assert psi_from_dict({"kind": "power", "c": 2, "delta": 1}) == PowerLaw(2.0, 1.0)
        with pytest.raises(ValueError):
            psi_from_dict({"kind": "bessel"})

    def test_load_tabulated_csv(self, tmp_path):
        """Test loading a tabulated psi from CSV."""
        path = tmp_path / "psi.csv"
        path.write_text("x,psi\n1,1\n10,0.1\n100,0.001\n")
        f = load_tabulated_csv(str(path))
        assert f.x0 == 1.0
        assert eval_psi(f, 10.0) == pytest.approx(0.1)


class TestRateFunctions:
    """psi_to_rate, power_law_rate and their consistency."""

    def test_start_time_of_one_over_x(self):
        """Test the start time for psi = 1/x."""
        assert start_time(PowerLaw(1.0, 1.0), 1, 1) == pytest.approx(0.0)

    def test_closed_form_one_over_x(self):
        """Test the closed-form rate for psi = 1/x."""
        rate = power_law_rate(1.0, 1.0, 1, 1)
        assert rate.slope == 0.0
        assert rate.intercept == 0.0

    def test_closed_form_cubic(self):
        """Test the closed-form rate for psi = x^-2."""
        rate = power_law_rate(1.0, 3.0, 1, 1)
        for t in (0.0, 1.0, 7.5):
            assert rate.r(t) == pytest.approx(t / 2)

    def test_bisection_one_over_x(self):
        """Test the bisection rate for psi = 1/x."""
        rate = psi_to_rate(PowerLaw(1.0, 1.0), 1, 1, span=5.0, step=0.1)
        assert np.max(np.abs(rate.rs)) < 1e-10

    def test_bisection_matches_closed_form(self):
        """Test bisection agrees with the closed form."""
        rate = psi_to_rate(PowerLaw(1.0, 3.0), 1, 1, span=5.0, step=0.1)
        for t, r in zip(rate.ts, rate.rs):
            assert abs(r - t / 2) < 1e-9

    @pytest.mark.parametrize("c,delta,m,n", [(0.5, 1.0, 1, 1), (2.0, 0.5, 2, 1), (1.0, 2.0, 1, 3)])
    def test_bisection_matches_closed_form_general(self, c, delta, m, n):
        """Test bisection agrees with the closed form for general weights."""
        sampled = psi_to_rate(PowerLaw(c, delta), m, n, span=4.0, step=0.25)
        closed = power_law_rate(c, delta, m, n)
        assert sampled.t0 == pytest.approx(closed.t0)
        for t, r in zip(sampled.ts, sampled.rs):
            assert abs(r - closed.r(t)) < 1e-9

    def test_identity_residual_vanishes(self):
        """Test the psi-rate identity holds at every grid point."""
        psi = Tabulated((1.0, 5.0, 40.0), (1.0, 0.3, 0.002))
        rate = psi_to_rate(psi, 1, 2, span=6.0, step=0.05)
        assert max(identity_residual(psi, rate, float(t)) for t in rate.grid()) < 1e-9

    def test_lambda_strictly_increasing(self):
        """Test lambda is strictly increasing."""
        rate = psi_to_rate(PowerLaw(1.0, 2.0), 2, 2, span=3.0, step=0.1)
        lam = [rate.lam(t) for t in rate.grid()]
        assert all(b > a for a, b in zip(lam, lam[1:]))

    def test_invalid_affine_rate(self):
        """Test an affine rate with slope outside the allowed range is refused."""
        with pytest.raises(RateValidityError):
            AffineRate(1.0, 0.0, 1, 1).check()


class TestRoundTrip:
    """rate_to_psi inverts psi_to_rate."""

    def test_zero_rate_gives_one_over_x(self):
        """Test a zero rate gives back psi = 1/x."""
        f = rate_to_psi(AffineRate(0.0, 0.0, 1, 1))
        for x in (1.0, 2.0, 10.0, 1e4):
            assert f.log_psi(x) == pytest.approx(-math.log(x), abs=1e-9)

    def test_half_slope_gives_cubic(self):
        """Test the half-slope rate gives back psi = x^-3."""
        f = rate_to_psi(AffineRate(0.5, 0.0, 1, 1))
        for x in (1.0, 3.0, 50.0):
            assert f.log_psi(x) == pytest.approx(-3 * math.log(x), abs=1e-8)

    def test_dimension_mismatch(self):
        """Test a mismatched dimension pair is refused."""
        with pytest.raises(ValueError):
            rate_to_psi(AffineRate(0.0, 0.0, 1, 1), m=2, n=1)

    def test_round_trip_tabulated(self):
        """Test rate to psi and back for a tabulated psi."""
        psi = Tabulated((1.0, 3.0, 20.0, 400.0), (1.0, 0.2, 0.01, 1e-5))
        rate = psi_to_rate(psi, 1, 1, span=8.0, step=0.05)
        back = rate_to_psi(rate)
        for t in rate.grid()[::10]:
            lam = rate.lam(float(t))
            assert abs(back.log_psi_log(lam) - psi.log_psi_log(lam)) < 1e-8


class TestPartialIntegrals:
    """Partial integrals on both sides of the correspondence."""

    def test_one_over_x_grows_like_log(self):
        """Test both partial integrals for psi = 1/x grow like log X."""
        psi = PowerLaw(1.0, 1.0)
        rate = power_law_rate(1.0, 1.0, 1, 1)
        psi_part, rate_part = divergence_probe(psi, rate, math.exp(10.0), 10.0)
        assert psi_part == pytest.approx(10.0, rel=1e-6)
        assert rate_part == pytest.approx(10.0, rel=1e-6)

    def test_doubling_ratio_constant(self):
        """Test the psi integral grows by a constant ratio as T doubles."""
        psi = PowerLaw(1.0, 1.0)
        rate = power_law_rate(1.0, 1.0, 1, 1)
        parts = [divergence_probe(psi, rate, math.exp(T), T)[0] for T in (4.0, 8.0, 16.0)]
        assert parts[1] / parts[0] == pytest.approx(parts[2] / parts[1], rel=1e-6)

    def test_convergent_psi_stays_bounded(self):
        """Test the partial integrals of a convergent psi stay bounded."""
        psi = PowerLaw(1.0, 2.0)
        small, _ = divergence_probe(psi, power_law_rate(1.0, 2.0, 1, 1), math.exp(5.0), 5.0)
        large, _ = divergence_probe(psi, power_law_rate(1.0, 2.0, 1, 1), math.exp(20.0), 20.0)
        assert large < 1.0 + 1e-6
        assert large - small < 0.01

    def test_domain_checked(self):
        """Test X below the domain of psi is refused."""
        with pytest.raises(DomainError):
            divergence_probe(PowerLaw(1.0, 1.0), power_law_rate(1.0, 1.0, 1, 1), 0.5, 1.0)
