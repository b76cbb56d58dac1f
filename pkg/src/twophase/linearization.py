"""Finite-difference linearisation of the residual map in Fourier coordinates."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from . import analytic
from .analytic import TwoPhaseConfig
from .errors import DomainError, SolverError
from .fieldsolver import ResidualTrace, residual
from .geometry import BoundaryTrace, FourierBoundary

DEFAULT_STEP = 1e-5
KERNEL_RTOL = 1e-6


def directional_derivative(cfg: TwoPhaseConfig, g: FourierBoundary, lam: float,
                           direction: FourierBoundary, delta: float = DEFAULT_STEP):
    """Central difference ``(Psi(g + delta d) - Psi(g - delta d)) / (2 delta)``.

    Returned as a :class:`~twophase.fieldsolver.ResidualTrace` whose nodal
    values, Fourier coefficients and flux are all differenced.
    """
    if not delta > 1e-12:
        raise DomainError(f"finite-difference step must exceed 1e-12, got {delta!r}")
    plus = residual(cfg, g + direction * delta, lam)
    minus = residual(cfg, g - direction * delta, lam)
    h = 2 * delta

    def diff(a, b):
        return BoundaryTrace(a.nodes, (a.values - b.values) / h)

    return ResidualTrace(
        nodal=diff(plus.nodal, minus.nodal),
        cos=(plus.cos - minus.cos) / h,
        sin=(plus.sin - minus.sin) / h,
        c_g=(plus.c_g - minus.c_g) / h,
        flux=diff(plus.flux, minus.flux),
        mismatch=diff(plus.mismatch, minus.mismatch),
        lam=lam, sigma=plus.sigma, K=plus.K,
        collocation_residual=max(plus.collocation_residual, minus.collocation_residual),
    )


def _basis(K, even):
    cols = [FourierBoundary.mode(K, k) for k in range(1, K + 1)]
    if not even:
        cols += [FourierBoundary.mode(K, k, kind="sin") for k in range(1, K + 1)]
    return cols


def _map(fn, items, jobs):
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def assemble_jacobian(cfg: TwoPhaseConfig, g: FourierBoundary, lam: float,
                      even: bool = False, delta: float = DEFAULT_STEP, jobs: int = 1):
    """Dense Jacobian of ``g -> Psi(g, lam)`` in Fourier coordinates.

    Columns follow the input ordering ``[cos_1..cos_K, sin_1..sin_K]`` and rows
    the residual ordering likewise.  With ``even=True`` only cosine inputs and
    cosine outputs are kept (a ``K x K`` matrix).
    """
    g = g.resized(cfg.K) if g.K != cfg.K else g

    def column(d):
        dd = directional_derivative(cfg, g, lam, d, delta)
        return dd.cos if even else dd.vector()

    cols = _map(column, _basis(cfg.K, even), jobs)
    return np.column_stack(cols)


@dataclass(frozen=True, eq=False)
class JacobianSpectrum:
    modes: np.ndarray
    numeric_beta: np.ndarray
    analytic_beta: np.ndarray | None
    offdiag: np.ndarray  # largest cross-mode response per probed mode
    lam: float

    @property
    def offdiag_norm(self):
        return float(np.max(self.offdiag))

    def beta(self, k):
        return float(self.numeric_beta[list(self.modes).index(k)])

    def abs_error(self):
        if self.analytic_beta is None:
            return None
        return np.abs(self.numeric_beta - self.analytic_beta)

    def write_csv(self, fh):
        fh.write("k,beta_numeric,beta_analytic,abs_error,offdiag\n")
        err = self.abs_error()
        for i, k in enumerate(self.modes):
            ana = "" if self.analytic_beta is None else f"{self.analytic_beta[i]:.17g}"
            e = "" if err is None else f"{err[i]:.17g}"
            fh.write(f"{k},{self.numeric_beta[i]:.17g},{ana},{e},{self.offdiag[i]:.17g}\n")


def spectrum_at_trivial(cfg: TwoPhaseConfig, lam: float, k_max: int,
                        delta: float = DEFAULT_STEP, jobs: int = 1) -> JacobianSpectrum:
    """Probe cosine modes ``1..k_max`` at ``g = 0`` and record the responses.

    ``analytic_beta`` is filled in when ``cfg`` carries a bifurcation mode.
    """
    if k_max > cfg.K // 2:
        raise DomainError(f"k_max={k_max} exceeds K/2={cfg.K // 2}")
    K = cfg.K
    zero = FourierBoundary.zero(K)
    modes = np.arange(1, k_max + 1)

    def probe(k):
        v = directional_derivative(cfg, zero, lam, FourierBoundary.mode(K, k), delta).vector()
        diag = v[k - 1]
        v[k - 1] = 0.0
        return diag, np.max(np.abs(v))

    out = _map(probe, modes, jobs)
    nb = np.array([d for d, _ in out])
    off = np.array([o for _, o in out])
    ana = None
    if cfg.m is not None:
        ana = np.array([analytic.beta(cfg.R, cfg.m, int(k), lam) for k in modes])
    return JacobianSpectrum(modes, nb, ana, off, float(lam))


def numeric_beta(cfg: TwoPhaseConfig, k: int, lam: float, delta: float = DEFAULT_STEP) -> float:
    """Mode-``k`` diagonal response at ``g = 0``."""
    zero = FourierBoundary.zero(cfg.K)
    return float(directional_derivative(cfg, zero, lam,
                                        FourierBoundary.mode(cfg.K, k), delta).cos[k - 1])


class NoCrossing(SolverError):
    """``beta_m`` has the same sign at both ends of the search window."""


def detect_bifurcation(cfg: TwoPhaseConfig, m: int, window=(-0.05, 0.05),
                       xtol: float = 1e-9) -> float:
    """Locate the zero of ``lam -> numeric_beta(m, lam)`` inside ``window``."""
    lo, hi = window

    def f(lam):
        return numeric_beta(cfg, m, lam)

    flo, fhi = f(lo), f(hi)
    if np.sign(flo) == np.sign(fhi):
        raise NoCrossing(f"no sign change of beta_{m} on [{lo}, {hi}] "
                         f"(values {flo:.3e}, {fhi:.3e})")
    return float(bisect(f, lo, hi, xtol=xtol))


def kernel(J: np.ndarray, rtol: float = KERNEL_RTOL):
    """Singular values below ``rtol * max`` and the matching right singular vectors."""
    _, sv, vt = np.linalg.svd(J)
    small = sv < rtol * sv[0]
    return sv, vt[small]
