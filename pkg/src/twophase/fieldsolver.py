"""Spectral solver for the two-phase Dirichlet problem on ``(B_R, Omega_g)``.

The field is written as

    v = -r^2/4        + a0 + sum_k F_k(r) (a_k cos k theta + atil_k sin k theta)   (annulus)
    v = -r^2/(4 sc)   + c0 + sum_k   r^k  (c_k cos k theta + ctil_k sin k theta)   (core)

with ``F_k(r) = r^k + rho_k r^-k``.  The decaying coefficient is tied to the
growing one by the transmission ratio ``rho_k = R^(2k) (1 - sc)/(1 + sc)``, so
both interface conditions on ``r = R`` hold exactly mode by mode.  Mode 0 has
no ``log r`` term (flux balance through ``r = R``) and ``c0`` follows from
continuity.  The remaining ``2K + 1`` unknowns are fitted to ``v = 0`` on the
outer boundary by least squares over ``M_col`` collocation points.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .analytic import TwoPhaseConfig
from .errors import SolverError
from .geometry import (BoundaryTrace, FourierBoundary, check_admissible,
                       measures, nodes, trig_tables)

MAX_CONDITION = 1e12


def transmission_ratio(cfg: TwoPhaseConfig, k: int, sigma=None) -> float:
    """``rho_k = R^(2k) (1 - sigma)/(1 + sigma)``; ``b_k = rho_k a_k``."""
    sigma = cfg.sigma_c if sigma is None else sigma
    return math.exp(2 * k * math.log(cfg.R)) * (1 - sigma) / (1 + sigma)


def _radial_factors(r, K, R, sigma):
    """``F_k(r)`` and ``r dF_k/dr / k`` for ``k = 1..K``; shape ``(len(r), K)``.

    The decaying part is evaluated as ``rho_hat (R^2/r)^k`` so that nothing
    overflows at large ``k``.
    """
    k = np.arange(1, K + 1)
    rho_hat = (1 - sigma) / (1 + sigma)
    grow = np.exp(np.multiply.outer(np.log(r), k))
    decay = rho_hat * np.exp(np.multiply.outer(np.log(R * R / r), k))
    return grow + decay, grow - decay


@dataclass(frozen=True, eq=False)
class SpectralSolution:
    cfg: TwoPhaseConfig
    g: FourierBoundary
    sigma: float
    a0: float
    a: np.ndarray
    atil: np.ndarray
    collocation_residual: float
    condition: float

    @property
    def K(self):
        return self.a.size

    @property
    def b0(self):
        return 0.0

    @property
    def rho(self):
        return np.array([transmission_ratio(self.cfg, k, self.sigma)
                         for k in range(1, self.K + 1)])

    @property
    def b(self):
        return self.rho * self.a

    @property
    def btil(self):
        return self.rho * self.atil

    @property
    def c0(self):
        R2 = self.cfg.R**2
        return self.a0 - R2 / 4 + R2 / (4 * self.sigma)

    @property
    def c(self):
        return self.a * (1 + (1 - self.sigma) / (1 + self.sigma))

    @property
    def ctil(self):
        return self.atil * (1 + (1 - self.sigma) / (1 + self.sigma))

    def _parts(self, r, theta):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        theta = np.broadcast_to(np.asarray(theta, dtype=float), r.shape)
        k = np.arange(1, self.K + 1)
        kt = np.multiply.outer(theta, k)
        return r, theta, k, np.cos(kt), np.sin(kt)

    def _regions(self, r, region):
        if region is None:
            core = r < self.cfg.R
        elif region in ("core", "annulus"):
            core = np.full(r.shape, region == "core")
        else:
            raise ValueError(f"region must be 'core' or 'annulus', got {region!r}")
        return core, ~core

    def __call__(self, r, theta, region=None):
        """Field value at polar points ``(r, theta)``.

        ``region`` forces the core or annulus expansion regardless of ``r``
        (used to compare both sides of the interface).
        """
        r, theta, k, c, s = self._parts(r, theta)
        out = np.empty_like(r)
        core, ann = self._regions(r, region)
        if np.any(ann):
            F, _ = _radial_factors(r[ann], self.K, self.cfg.R, self.sigma)
            out[ann] = (-r[ann]**2 / 4 + self.a0
                        + np.sum(F * (c[ann] * self.a + s[ann] * self.atil), axis=1))
        if np.any(core):
            rk = np.power.outer(r[core], k)
            out[core] = (-r[core]**2 / (4 * self.sigma) + self.c0
                         + np.sum(rk * (c[core] * self.c + s[core] * self.ctil), axis=1))
        return out

    def gradient(self, r, theta, region=None):
        """Polar gradient components ``(dv/dr, (1/r) dv/dtheta)``."""
        r, theta, k, c, s = self._parts(r, theta)
        vr = np.empty_like(r)
        vt = np.empty_like(r)
        core, ann = self._regions(r, region)
        if np.any(ann):
            ra = r[ann]
            F, G = _radial_factors(ra, self.K, self.cfg.R, self.sigma)
            cc, ss = c[ann], s[ann]
            vr[ann] = -ra / 2 + np.sum(k * G * (cc * self.a + ss * self.atil), axis=1) / ra
            vt[ann] = np.sum(k * F * (-ss * self.a + cc * self.atil), axis=1) / ra
        if np.any(core):
            rc = r[core]
            rk = np.power.outer(rc, k)
            cc, ss = c[core], s[core]
            vr[core] = -rc / (2 * self.sigma) + np.sum(k * rk * (cc * self.c + ss * self.ctil), axis=1) / rc
            vt[core] = np.sum(k * rk * (-ss * self.c + cc * self.ctil), axis=1) / rc
        return vr, vt


def solve(cfg: TwoPhaseConfig, g: FourierBoundary, sigma=None) -> SpectralSolution:
    """Solve ``-div(sigma grad v) = 1`` in ``Omega_g``, ``v = 0`` on its boundary.

    ``sigma`` overrides ``cfg.sigma_c``.  Raises :class:`GeometryError` for an
    inadmissible ``g`` and :class:`SolverError` when the scaled collocation
    matrix has condition number above ``1e12``.
    """
    sigma = cfg.sigma(0.0) if sigma is None else float(sigma)
    K, M, R = cfg.K, cfg.M_col, cfg.R
    g = g.resized(K) if g.K != K else g
    check_admissible(g, R, cfg.margin, M)
    r = 1.0 + g.on_nodes(M)
    c, s = trig_tables(K, M)
    F, _ = _radial_factors(r, K, R, sigma)
    A = np.empty((M, 2 * K + 1))
    A[:, 0] = 1.0
    A[:, 1:K + 1] = F * c
    A[:, K + 1:] = F * s
    rhs = r**2 / 4
    scale = np.linalg.norm(A, axis=0)
    x, _, rank, sv = np.linalg.lstsq(A / scale, rhs, rcond=None)
    cond = sv[0] / sv[-1] if sv[-1] > 0 else np.inf
    if cond > MAX_CONDITION or rank < A.shape[1]:
        raise SolverError(f"collocation matrix is numerically singular "
                          f"(condition {cond:.3e}); increase M_col or reduce K")
    x = x / scale
    res = float(np.max(np.abs(A @ x - rhs)))
    return SpectralSolution(cfg, g, sigma, float(x[0]), x[1:K + 1], x[K + 1:], res, float(cond))


def _flux_parts(sol: SpectralSolution):
    M = sol.cfg.M_col
    t = nodes(M)
    rho = 1.0 + sol.g.on_nodes(M)
    drho = sol.g.on_nodes(M, 1)
    vr, vt = sol.gradient(rho, t)
    jac = np.hypot(rho, drho)
    # rho * v_r - (rho'/rho) * v_theta, i.e. J * dv/dn_g
    weighted = rho * vr - drho * vt
    return t, weighted, jac


def boundary_flux(sol: SpectralSolution) -> BoundaryTrace:
    """Normal derivative ``dv/dn_g`` at the mapped nodes, indexed by ``theta``."""
    t, weighted, jac = _flux_parts(sol)
    return BoundaryTrace(t, weighted / jac)


@dataclass(frozen=True, eq=False)
class ResidualTrace:
    nodal: BoundaryTrace
    cos: np.ndarray
    sin: np.ndarray
    c_g: float
    flux: BoundaryTrace
    mismatch: BoundaryTrace  # dv/dn_g - c_g, without the Jacobian weight
    lam: float
    sigma: float
    K: int
    collocation_residual: float

    @property
    def M_col(self):
        return self.nodal.M

    def sup_norm(self):
        return self.nodal.sup_norm()

    def vector(self):
        return np.concatenate([self.cos, self.sin])

    def header(self):
        return {"c_g": self.c_g, "lambda": self.lam, "sigma_c": self.sigma,
                "K": self.K, "M_col": self.M_col}

    def write_csv(self, fh):
        """CSV body ``theta,psi,flux`` preceded by a ``# {json}`` header line."""
        fh.write("# " + json.dumps(self.header()) + "\n")
        fh.write("theta,psi,flux\n")
        for t, p, f in zip(self.nodal.nodes, self.nodal.values, self.flux.values):
            fh.write(f"{t:.17g},{p:.17g},{f:.17g}\n")


def residual(cfg: TwoPhaseConfig, g: FourierBoundary, lam: float = 0.0) -> ResidualTrace:
    """Overdetermined residual ``(dv/dn_g - c_g) J_tau(g)`` at ``sigma_c + lam``.

    The Fourier projection keeps modes ``1..K``; the zero mode is dropped.
    """
    sigma = cfg.sigma(lam)
    sol = solve(cfg, g, sigma)
    t, weighted, jac = _flux_parts(sol)
    c_g = measures(sol.g, cfg.M_col, cfg.R, cfg.margin).c_g
    psi = BoundaryTrace(t, weighted - c_g * jac)
    cos, sin = psi.fourier(cfg.K)
    flux = weighted / jac
    return ResidualTrace(psi, cos, sin, c_g, BoundaryTrace(t, flux),
                         BoundaryTrace(t, flux - c_g), float(lam), sigma, cfg.K,
                         sol.collocation_residual)
