import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp, mpf

from twophase import analytic
from twophase.analytic import (DispersionCurve, RadialProfile, TwoPhaseConfig, beta,
                               beta_slope, bifurcation_value, dbeta_dlambda,
                               radial_solution, sigma_set)
from twophase.errors import DomainError

radii = st.floats(min_value=0.05, max_value=0.98)
dims = st.integers(min_value=2, max_value=6)
modes = st.integers(min_value=1, max_value=40)


def s_oracle(N, R, k):
    """Literal quotient in 40-digit arithmetic."""
    mp.dps = 40
    R = mpf(R)
    P = R ** (2 - N - 2 * k)
    return (k * (N + k - 1) - (N + k - 2) * (k - 1) * P) / (k * (N + k - 1) + k * (k - 1) * P)


def beta_oracle(R, m, k, lam):
    mp.dps = 40
    R, lam = mpf(R), mpf(lam)
    s = s_oracle(2, R, m)
    Q = R ** (-2 * k)
    return (((k + 1) * (s + lam - 1) * k + (k + k * s + k * lam) * (k - 1) * Q)
            / (2 * (k + k * s + k * lam) * Q + 2 * k * (1 - s - lam)))


class TestBifurcationValue:
    def test_mode_one(self):
        assert bifurcation_value(2, 0.37, 1) == 1.0

    @pytest.mark.parametrize("R, k, expected", [
        (0.9, 2, 0.32621365764915950),
        (0.5, 2, -13 / 19),
        (0.9, 3, 0.030482596677851740),
    ])
    def test_examples(self, R, k, expected):
        assert bifurcation_value(2, R, k) == pytest.approx(expected, rel=1e-13)

    @given(dims, radii)
    def test_first_mode_is_one(self, N, R):
        assert bifurcation_value(N, R, 1) == 1.0

    @settings(max_examples=200)
    @given(dims, radii, modes)
    def test_matches_high_precision(self, N, R, k):
        assert bifurcation_value(N, R, k) == pytest.approx(float(s_oracle(N, R, k)),
                                                           rel=1e-11, abs=1e-13)

    @pytest.mark.parametrize("N", [2, 3, 5])
    def test_tail_tends_to_minus_one(self, N):
        ks = (100, 500, 1000, 3000)
        vals = [bifurcation_value(N, 0.5, k) for k in ks]
        assert all(np.isfinite(vals))
        # limit of the quotient is -(N + k - 2)/k
        for k, v in zip(ks, vals):
            assert v == pytest.approx(-(N + k - 2) / k, rel=1e-12)
        d = np.diff([bifurcation_value(N, 0.5, k) for k in range(5, 60)])
        assert np.all(d <= 0) or np.all(d >= 0)

    @pytest.mark.parametrize("bad", [dict(R=0.0), dict(R=1.0), dict(R=1.5), dict(k=0)])
    def test_domain_errors(self, bad):
        args = dict(N=2, R=0.5, k=2) | bad
        with pytest.raises(DomainError):
            bifurcation_value(**args)


class TestSigmaSet:
    def test_small_core(self):
        ss = sigma_set(2, 0.5, 10)
        assert ss.members == ((1, 1.0),)
        assert ss.cutoff == 2

    def test_large_core(self):
        ss = sigma_set(2, 0.9, 10)
        d = dict(ss.members)
        assert d[2] == pytest.approx(0.326214, abs=1e-6)
        assert d[3] == pytest.approx(0.0304826, abs=1e-7)
        assert 2 in ss and 4 not in ss
        assert ss.cutoff == 4
        assert all(s < 0 for k, s in ss.values if k >= ss.cutoff)

    def test_three_dimensions(self):
        assert sigma_set(3, 0.9, 1).members == ((1, 1.0),)

    def test_cutoff_none_when_tail_not_reached(self):
        # R close to 1: many positive values
        assert sigma_set(2, 0.99, 5).cutoff is None

    def test_no_values_above_one(self):
        for R in np.linspace(0.05, 0.98, 30):
            assert sigma_set(2, R, 50).above_one == ()


class TestBeta:
    def test_vanishes_at_bifurcation(self):
        assert beta(0.9, 2, 2, 0.0) == 0.0

    def test_other_mode_pinned(self):
        assert beta(0.9, 2, 3, 0.0) == pytest.approx(0.36220472440944879, rel=1e-13)

    def test_small_lambda(self):
        assert beta(0.9, 2, 2, 1e-6) == pytest.approx(8.393159556903750e-07, rel=1e-8)

    @settings(max_examples=150)
    @given(st.floats(0.3, 0.97), st.integers(2, 6), st.integers(1, 60),
           st.floats(-0.01, 0.01))
    def test_matches_literal_formula(self, R, m, k, lam):
        if not 0 < bifurcation_value(2, R, m) < 1:
            return
        assert beta(R, m, k, lam) == pytest.approx(float(beta_oracle(R, m, k, lam)),
                                                   rel=1e-10, abs=1e-13)

    @pytest.mark.parametrize("R", np.round(np.arange(0.5, 0.96, 0.05), 2))
    def test_kernel_is_simple(self, R):
        for m in range(2, 11):
            if not 0 < bifurcation_value(2, R, m) < 1:
                continue
            assert abs(beta(R, m, m, 0.0)) < 1e-15
            for k in range(1, 65):
                if k != m:
                    assert beta(R, m, k, 0.0) != 0.0

    def test_no_overflow_at_large_k(self):
        b = beta(0.5, 2, 2000, 0.0)
        assert np.isfinite(b) and b > 0


class TestSlope:
    def test_example(self):
        assert beta_slope(0.9, 2) == pytest.approx(0.83931611892242039, rel=1e-13)
        assert beta_slope(0.9, 3) == pytest.approx(1.3345734038598201, rel=1e-13)

    @pytest.mark.parametrize("R", np.round(np.arange(0.5, 0.96, 0.05), 2))
    def test_positive_on_grid(self, R):
        for m in range(1, 11):
            if 0 < bifurcation_value(2, R, m) < 1:
                assert beta_slope(R, m) > 0

    @pytest.mark.parametrize("R, m", [(0.9, 2), (0.9, 3), (0.95, 4), (0.8, 2)])
    def test_central_difference(self, R, m):
        h = 1e-5
        fd = (beta(R, m, m, h) - beta(R, m, m, -h)) / (2 * h)
        assert fd == pytest.approx(beta_slope(R, m), rel=1e-6)
        assert dbeta_dlambda(R, m, m, 0.0) == pytest.approx(beta_slope(R, m), rel=1e-13)

    def test_rejects_mode_outside_unit_interval(self):
        with pytest.raises(DomainError):
            beta_slope(0.5, 2)


def test_dispersion_curve():
    c = DispersionCurve(k=1, m=2, R=0.9)
    assert c.s_k == 1.0
    d = DispersionCurve(k=2, m=2, R=0.9)
    assert d.beta(0.0) == 0.0
    assert d.dbeta_at_0 == pytest.approx(beta_slope(0.9, 2))


class TestRadialSolution:
    @pytest.mark.parametrize("N", [2, 3, 4])
    @pytest.mark.parametrize("sigma", [0.3, 0.5, 2.0, 5.0])
    def test_interface_and_flux(self, N, sigma):
        prof = radial_solution(TwoPhaseConfig(R=0.7, sigma_c=sigma, N=N))
        R = 0.7
        below, above = np.nextafter(R, 0), R
        assert prof(below) == pytest.approx(float(prof(above)), abs=1e-15)
        assert prof.flux(below) == pytest.approx(float(prof.flux(above)), abs=1e-15)
        assert prof(1.0) == 0.0
        assert prof.dr(1.0) == pytest.approx(-1.0 / N, abs=1e-15)

    def test_solves_radial_ode(self):
        # finite-difference check of -(1/r^(N-1)) (r^(N-1) sigma u')' = 1
        prof = RadialProfile(3, 0.6, 2.5)
        h = 1e-4
        for r in (0.3, 0.8):
            sig = 2.5 if r < 0.6 else 1.0
            lhs = -(((r + h / 2) ** 2 * prof.dr(r + h / 2) - (r - h / 2) ** 2 * prof.dr(r - h / 2))
                    / (h * r * r)) * sig
            assert lhs == pytest.approx(1.0, rel=1e-7)

    def test_one_phase_limit(self):
        prof = RadialProfile(2, 0.5, 1.0)
        r = np.linspace(0, 1, 11)
        np.testing.assert_allclose(prof(r), (1 - r**2) / 4, atol=1e-16)


class TestConfig:
    def test_sigma_from_mode(self):
        cfg = TwoPhaseConfig(R=0.9, m=2, K=16)
        assert cfg.sigma_c == bifurcation_value(2, 0.9, 2)
        assert cfg.M_col == 256
        assert cfg.sigma(0.01) == pytest.approx(cfg.sigma_c + 0.01)

    @pytest.mark.parametrize("kw", [
        dict(R=0.9, m=1),             # s(1) = 1
        dict(R=0.9, sigma_c=1.0),
        dict(R=0.9, sigma_c=-0.2),
        dict(R=0.9, sigma_c=2.0, K=4),
        dict(R=0.9, sigma_c=2.0, K=16, M_col=20),
        dict(R=1.2, sigma_c=2.0),
        dict(R=0.9),
    ])
    def test_invalid(self, kw):
        with pytest.raises(DomainError):
            TwoPhaseConfig(**kw)

    def test_replace_resets_collocation(self):
        cfg = TwoPhaseConfig(R=0.9, sigma_c=2.0, K=200)
        assert cfg.M_col == 401
        assert cfg.replace(K=16).M_col == 256
