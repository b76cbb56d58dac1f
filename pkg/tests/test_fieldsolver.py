import io
import json

import numpy as np
import pytest

from twophase import analytic
from twophase.analytic import TwoPhaseConfig
from twophase.errors import GeometryError, SolverError
from twophase.fieldsolver import boundary_flux, residual, solve, transmission_ratio
from twophase.geometry import FourierBoundary, measures, nodes


def interface_ratio(R, sigma, k):
    """Solve the mode-k interface system for (b, c) with a = 1 directly."""
    # unknowns b, c:  R^k + b R^-k = c R^k ;  sigma k c R^(k-1) = k (R^(k-1) - b R^(-k-1))
    A = np.array([[R**-k, -R**k], [k * R ** (-k - 1), sigma * k * R ** (k - 1)]])
    rhs = np.array([-R**k, k * R ** (k - 1)])
    b, c = np.linalg.solve(A, rhs)
    return b, c


class TestTransmissionRatio:
    @pytest.mark.parametrize("R, sigma, k", [(0.5, 2.0, 1), (0.9, 0.326214, 2), (0.7, 5.0, 6)])
    def test_against_interface_system(self, R, sigma, k):
        cfg = TwoPhaseConfig(R=R, sigma_c=sigma, K=8)
        b, _ = interface_ratio(R, sigma, k)
        assert transmission_ratio(cfg, k) == pytest.approx(b, rel=1e-12)

    def test_examples(self):
        assert transmission_ratio(TwoPhaseConfig(R=0.5, sigma_c=2.0, K=8), 1) == pytest.approx(-1 / 12)
        assert transmission_ratio(TwoPhaseConfig(R=0.9, sigma_c=0.326214, K=8), 2) == pytest.approx(
            0.9**4 * 0.673786 / 1.326214, rel=1e-14)

    def test_invisible_interface(self):
        cfg = TwoPhaseConfig(R=0.5, sigma_c=2.0, K=8)
        assert transmission_ratio(cfg, 3, sigma=1.0) == 0.0


class TestTrivialSolution:
    @pytest.mark.parametrize("sigma", [0.3, 0.5, 2.0, 5.0])
    def test_recovers_radial_profile(self, sigma):
        cfg = TwoPhaseConfig(R=0.7, sigma_c=sigma, K=16)
        sol = solve(cfg, FourierBoundary.zero(16))
        assert sol.a0 == pytest.approx(0.25, abs=1e-12)
        assert sol.c0 == pytest.approx((1 - 0.49) / 4 + 0.49 / (4 * sigma), abs=1e-12)
        assert np.max(np.abs(sol.a)) < 1e-12 and np.max(np.abs(sol.atil)) < 1e-12
        assert sol.b0 == 0.0
        assert sol.collocation_residual <= 1e-12
        prof = analytic.radial_solution(cfg)
        r = np.array([0.0, 0.2, 0.69, 0.7, 0.85, 1.0])
        t = np.linspace(0, 6, r.size)
        np.testing.assert_allclose(sol(r, t), prof(r), atol=1e-12)

    def test_flux_is_compatibility_constant(self):
        cfg = TwoPhaseConfig(R=0.6, sigma_c=2.0, K=16)
        flux = boundary_flux(solve(cfg, FourierBoundary.zero(16)))
        np.testing.assert_allclose(flux.values, -0.5, atol=1e-12)
        assert measures(FourierBoundary.zero(16)).c_g == pytest.approx(-0.5)

    @pytest.mark.parametrize("lam", [-0.1, 0.0, 0.2])
    def test_residual_vanishes(self, lam):
        cfg = TwoPhaseConfig(R=0.9, m=2, K=16)
        assert residual(cfg, FourierBoundary.zero(16), lam).sup_norm() <= 1e-10


def smooth_boundary(K):
    g = FourierBoundary(np.zeros(K), np.zeros(K))
    c = np.zeros(K)
    s = np.zeros(K)
    c[:3] = [0.01, 0.015, -0.008]
    s[1:4] = [0.005, 0.0, 0.01]
    return FourierBoundary(c, s)


class TestPerturbedSolution:
    def test_transmission_conditions(self):
        cfg = TwoPhaseConfig(R=0.8, sigma_c=0.4, K=32)
        sol = solve(cfg, smooth_boundary(32))
        t = np.linspace(0, 2 * np.pi, 64, endpoint=False)
        r = np.full(t.shape, cfg.R)
        jump = sol(r, t, "core") - sol(r, t, "annulus")
        flux_in = cfg.sigma_c * sol.gradient(r, t, "core")[0]
        flux_out = sol.gradient(r, t, "annulus")[0]
        assert np.max(np.abs(jump)) <= 1e-12
        assert np.max(np.abs(flux_in - flux_out)) <= 1e-12

    def test_satisfies_poisson_equation(self):
        cfg = TwoPhaseConfig(R=0.8, sigma_c=0.4, K=32)
        sol = solve(cfg, smooth_boundary(32))
        h = 1e-3
        for r0, t0, sig in [(0.4, 1.0, 0.4), (0.9, 2.0, 1.0)]:
            x0, y0 = r0 * np.cos(t0), r0 * np.sin(t0)

            def v(x, y):
                return sol(np.hypot(x, y), np.arctan2(y, x))[0]

            lap = (v(x0 + h, y0) + v(x0 - h, y0) + v(x0, y0 + h) + v(x0, y0 - h) - 4 * v(x0, y0)) / h**2
            assert -sig * lap == pytest.approx(1.0, abs=1e-5)

    def test_spectral_convergence(self):
        res = []
        for K in (16, 32, 64):
            cfg = TwoPhaseConfig(R=0.5, sigma_c=3.0, K=K)
            c = np.zeros(K)
            s = np.zeros(K)
            c[:3] = [0.2, 0.1, 0.05]
            s[1] = 0.1
            res.append(solve(cfg, FourierBoundary(c, s)).collocation_residual)
        assert res[0] > res[1] > res[2]
        assert res[2] < 1e-9

    def test_singular_system(self):
        cfg = TwoPhaseConfig(R=0.1, sigma_c=3.0, K=128, margin=0.0)
        with pytest.raises(SolverError):
            solve(cfg, FourierBoundary.mode(128, 1, 0.6))

    def test_inadmissible_boundary(self):
        cfg = TwoPhaseConfig(R=0.9, sigma_c=0.5, K=16)
        with pytest.raises(GeometryError):
            solve(cfg, FourierBoundary.mode(16, 3, 0.06))


class TestResidual:
    @pytest.fixture
    def cfg(self):
        return TwoPhaseConfig(R=0.9, m=2, K=32)

    def test_mean_vanishes(self, cfg):
        r = residual(cfg, smooth_boundary(32), 0.01)
        assert abs(r.nodal.mean()) <= 1e-12

    def test_even_input_gives_even_residual(self, cfg):
        c = np.zeros(32)
        c[[0, 2, 5]] = [0.01, -0.02, 0.004]
        r = residual(cfg, FourierBoundary.from_cos(c), 0.0)
        assert np.max(np.abs(r.sin)) <= 1e-10
        assert np.max(np.abs(r.cos)) > 1e-4

    @pytest.mark.parametrize("phi", [np.pi / 7, np.pi / 3])
    def test_rotation_equivariance(self, cfg, phi):
        g = smooth_boundary(32)
        a = residual(cfg, g, 0.003)
        b = residual(cfg, g.rotated(phi), 0.003)
        rotated = FourierBoundary(a.cos, a.sin).rotated(phi)
        np.testing.assert_allclose(b.cos, rotated.cos, atol=1e-10)
        np.testing.assert_allclose(b.sin, rotated.sin, atol=1e-10)

    def test_flux_rotation_equivariance(self, cfg):
        # rotation by a node spacing permutes the nodal traces exactly
        M = cfg.M_col
        phi = 2 * np.pi * 5 / M
        g = smooth_boundary(32)
        a = boundary_flux(solve(cfg, g))
        b = boundary_flux(solve(cfg, g.rotated(phi)))
        np.testing.assert_allclose(b.values, np.roll(a.values, 5), atol=1e-10)

    def test_unweighted_mismatch_recorded(self, cfg):
        r = residual(cfg, smooth_boundary(32), 0.0)
        from twophase.geometry import normal_and_jacobian
        _, J = normal_and_jacobian(smooth_boundary(32), cfg.M_col)
        np.testing.assert_allclose(r.mismatch.values * J, r.nodal.values, atol=1e-15)

    @pytest.mark.parametrize("lam", [-0.01, 0.0, 0.01])
    def test_linear_response_by_mode(self, cfg, lam):
        # quadratic terms land in modes 0 and 2k, so the k-th coefficient
        # matches beta_k to O(delta^2)
        delta = 1e-5
        for k in range(1, cfg.K // 2 + 1):
            r = residual(cfg, FourierBoundary.mode(cfg.K, k, delta), lam)
            b = analytic.beta(cfg.R, 2, k, lam)
            assert abs(r.cos[k - 1] / delta - b) <= 1e-4 * abs(b) + 1e-8

    @pytest.mark.parametrize("lam", [-0.01, 0.0, 0.01])
    def test_linear_response_sup_norm(self, cfg, lam):
        delta = 1e-5
        t = nodes(cfg.M_col)
        for k in range(1, cfg.K // 2 + 1):
            if k == cfg.m:
                continue  # beta_m ~ 0 while the O(delta) quadratic response is not
            r = residual(cfg, FourierBoundary.mode(cfg.K, k, delta), lam)
            b = analytic.beta(cfg.R, 2, k, lam)
            err = np.max(np.abs(r.nodal.values / delta - b * np.cos(k * t)))
            assert err <= 1e-4 * abs(b) + 1e-8

    def test_csv_format(self, cfg):
        r = residual(cfg, smooth_boundary(32), 0.0)
        buf = io.StringIO()
        r.write_csv(buf)
        lines = buf.getvalue().splitlines()
        assert lines[0].startswith("# ")
        header = json.loads(lines[0][2:])
        assert header["K"] == 32 and header["M_col"] == 256
        assert header["c_g"] == r.c_g and header["lambda"] == 0.0
        assert lines[1] == "theta,psi,flux"
        assert len(lines) == 2 + 256
        theta, psi, flux = map(float, lines[5].split(","))
        assert psi == r.nodal.values[3] and flux == r.flux.values[3]
