"""Closed-form quantities for the two-phase problem on concentric balls.

Everything here is exact arithmetic on explicit formulas: the bifurcation
values ``s(k)``, the finite set of positive ones, the diagonal coefficients
``beta_k(lambda)`` of the linearised residual (N = 2) and their slope at the
bifurcation point, and the radial base solution.

Large powers ``R**(-2k)`` are never formed directly; each quotient is
rescaled by its dominant power so that ``k`` in the thousands stays finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

DEFAULT_MARGIN = 0.05
MIN_COLLOCATION = 256


def _check_radius(R):
    if not 0.0 < R < 1.0:
        raise DomainError(f"core radius must lie in (0, 1), got R={R!r}")


def _check_mode(k, name="k"):
    if int(k) != k or k < 1:
        raise DomainError(f"mode {name} must be an integer >= 1, got {k!r}")


def bifurcation_value(N: int, R: float, k: int) -> float:
    """Return ``s(k)`` for dimension ``N``, core radius ``R`` and mode ``k``.

    ``s(1) == 1`` exactly for every ``N`` and ``R``; ``s(k) -> -1`` as
    ``k -> inf``.
    """
    if int(N) != N or N < 2:
        raise DomainError(f"dimension must be an integer >= 2, got N={N!r}")
    _check_radius(R)
    _check_mode(k)
    log_p = (2 - N - 2 * k) * math.log(R)  # log of R**(2-N-2k)
    a = k * (N + k - 1)
    b = (N + k - 2) * (k - 1)
    c = k * (k - 1)
    if log_p > 0:
        q = math.exp(-log_p)
        return (a * q - b) / (a * q + c)
    p = math.exp(log_p)
    return (a - b * p) / (a + c * p)


@dataclass(frozen=True)
class SigmaSet:
    """Positive bifurcation values up to ``k_max``.

    ``cutoff`` is the smallest ``k*`` with ``s(k) < 0`` for all
    ``k* <= k <= k_max`` (``None`` when ``s(k_max) >= 0``).
    """

    N: int
    R: float
    k_max: int
    values: tuple  # (k, s(k)) for every k <= k_max
    members: tuple  # (k, s(k)) with s(k) > 0
    cutoff: int | None
    above_one: tuple = ()  # modes k >= 2 with s(k) >= 1, not traced

    def __contains__(self, k):
        return any(kk == k for kk, _ in self.members)


def sigma_set(N: int, R: float, k_max: int) -> SigmaSet:
    _check_mode(k_max, "k_max")
    values = tuple((k, bifurcation_value(N, R, k)) for k in range(1, k_max + 1))
    members = tuple((k, s) for k, s in values if s > 0)
    cutoff = None
    for k, s in reversed(values):
        if s >= 0:
            break
        cutoff = k
    above_one = tuple(k for k, s in values if k >= 2 and s >= 1)
    return SigmaSet(N, R, k_max, values, members, cutoff, above_one)


def _mode_sigma(R, m):
    s = bifurcation_value(2, R, m)
    return s


def beta(R: float, m: int, k: int, lam: float) -> float:
    """Diagonal coefficient ``beta_k(lambda)`` of the linearised residual (N=2).

    The conductivity is ``sigma_c = s(m) + lam``.  Numerator and denominator
    are divided by ``k R**(-2k)`` before evaluation.
    """
    _check_mode(k)
    sig = _mode_sigma(R, m) + lam
    q = math.exp(2 * k * math.log(R))  # R**(2k)
    num = (k + 1) * (sig - 1) * q + (1 + sig) * (k - 1)
    den = 2 * (1 + sig) + 2 * (1 - sig) * q
    if abs(den) <= 1e-14 * (abs(2 * (1 + sig)) + abs(2 * (1 - sig) * q)):
        raise DomainError(f"beta_{k} denominator vanishes at lambda={lam!r}")
    return num / den


def dbeta_dlambda(R: float, m: int, k: int, lam: float) -> float:
    """Closed-form ``d beta_k / d lambda`` at ``lam``."""
    _check_mode(k)
    sig = _mode_sigma(R, m) + lam
    q = math.exp(2 * k * math.log(R))
    num = (k + 1) * (sig - 1) * q + (1 + sig) * (k - 1)
    den = 2 * (1 + sig) + 2 * (1 - sig) * q
    dnum = (k + 1) * q + (k - 1)
    dden = 2 - 2 * q
    return (dnum * den - num * dden) / den**2


def beta_slope(R: float, m: int) -> float:
    """Transversality slope ``d beta_m / d lambda`` at ``lambda = 0``.

    Uses ``beta_m(0) = 0``, so only the numerator's derivative survives.
    Requires ``0 < s(m) < 1``; the result is then strictly positive.
    """
    s = _mode_sigma(R, m)
    if not 0.0 < s < 1.0:
        raise DomainError(f"s({m}) = {s:.6g} is not in (0, 1) for R={R}")
    q = math.exp(2 * m * math.log(R))
    return ((m + 1) * q + (m - 1)) / (2 * (1 + s) + 2 * (1 - s) * q)


@dataclass(frozen=True)
class DispersionCurve:
    k: int
    m: int
    R: float
    s_k: float = field(init=False)
    dbeta_at_0: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "s_k", bifurcation_value(2, self.R, self.k))
        object.__setattr__(self, "dbeta_at_0", dbeta_dlambda(self.R, self.m, self.k, 0.0))

    def beta(self, lam):
        return beta(self.R, self.m, self.k, lam)


@dataclass(frozen=True)
class TwoPhaseConfig:
    """Physical and discretisation parameters.

    Either ``sigma_c`` is given directly, or a bifurcation mode ``m`` is given
    and ``sigma_c`` defaults to ``s(m)``.  A parameter offset ``lam`` always
    acts additively: the conductivity used by the solver is
    ``sigma_c + lam``.
    """

    R: float
    sigma_c: float | None = None
    m: int | None = None
    N: int = 2
    K: int = 32
    M_col: int | None = None
    margin: float = DEFAULT_MARGIN

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise DomainError(f"dimension must be an integer >= 2, got N={self.N!r}")
        _check_radius(self.R)
        if int(self.K) != self.K or self.K < 8:
            raise DomainError(f"truncation order K must be >= 8, got {self.K!r}")
        if self.m is not None:
            _check_mode(self.m, "m")
        if self.sigma_c is None:
            if self.m is None:
                raise DomainError("either sigma_c or a bifurcation mode m is required")
            object.__setattr__(self, "sigma_c", bifurcation_value(self.N, self.R, self.m))
        if self.M_col is None:
            object.__setattr__(self, "M_col", max(2 * self.K + 1, MIN_COLLOCATION))
        if self.M_col < 2 * self.K + 1:
            raise DomainError(f"M_col={self.M_col} < 2K+1={2 * self.K + 1}")
        if not 0.0 <= self.margin < 1.0 - self.R:
            raise DomainError(f"margin {self.margin} incompatible with R={self.R}")
        check_conductivity(self.sigma_c)

    def sigma(self, lam=0.0):
        """Conductivity ``sigma_c + lam``, validated."""
        return check_conductivity(self.sigma_c + lam)

    @property
    def s_m(self):
        if self.m is None:
            return None
        return bifurcation_value(self.N, self.R, self.m)

    def replace(self, **changes):
        d = dict(R=self.R, sigma_c=self.sigma_c, m=self.m, N=self.N, K=self.K,
                 M_col=self.M_col, margin=self.margin)
        if "K" in changes and "M_col" not in changes:
            d["M_col"] = None
        d.update(changes)
        return TwoPhaseConfig(**d)


def check_conductivity(sigma):
    if not sigma > 0.0:
        raise DomainError(f"conductivity must be positive, got {sigma!r}")
    if sigma == 1.0:
        raise DomainError(
            "conductivity equals 1 (no inclusion); for m = 1 this is forced by s(1) = 1, "
            "so mode 1 cannot be used as a bifurcation mode")
    return float(sigma)


@dataclass(frozen=True)
class RadialProfile:
    """Exact solution on concentric balls ``B_R`` inside ``B_1``."""

    N: int
    R: float
    sigma_c: float

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        N, R, sc = self.N, self.R, self.sigma_c
        outer = (1 - r**2) / (2 * N)
        inner = (1 - R**2) / (2 * N) + (R**2 - r**2) / (2 * N * sc)
        return np.where(r >= R, outer, inner)

    def dr(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r >= self.R, -r / self.N, -r / (self.N * self.sigma_c))

    def flux(self, r):
        """``sigma * du/dr``; continuous across ``r = R``."""
        r = np.asarray(r, dtype=float)
        return np.where(r >= self.R, 1.0, self.sigma_c) * self.dr(r)


def radial_solution(cfg: TwoPhaseConfig, lam: float = 0.0) -> RadialProfile:
    # sigma_c = 1 is allowed here as a consistency limit
    sigma = cfg.sigma_c + lam
    if not sigma > 0:
        raise DomainError(f"conductivity must be positive, got {sigma!r}")
    return RadialProfile(cfg.N, cfg.R, sigma)
