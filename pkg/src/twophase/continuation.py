"""Tracing the symmetry-breaking branch that leaves the concentric solution.

The branch is parametrised by the amplitude ``eps`` of ``cos(m theta)`` in the
boundary perturbation.  For each ``eps`` the square system

    cosine coefficients 1..K of Psi(g, lam) = 0,     g.cos[m] - eps = 0

is solved for the cosine coefficients of ``g`` and ``lam`` by damped Newton,
so every iterate stays in the even subspace.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import analytic
from .analytic import TwoPhaseConfig
from .errors import ConvergenceError, DomainError, GeometryError, SolverError
from .fieldsolver import residual
from .geometry import FourierBoundary
from .linearization import (KERNEL_RTOL, assemble_jacobian, numeric_beta)

NEWTON_TOL = 1e-9
MAX_NEWTON = 25
MIN_DAMPING = 2.0**-10
LAMBDA_STEP = 1e-6
EPS_MAX = 0.1
EPS_MIN = 1e-4


@dataclass(frozen=True, eq=False)
class BranchPoint:
    eps: float
    lam: float
    g: FourierBoundary
    residual_norm: float
    newton_iters: int

    def deviation(self, m):
        """``max|g - eps cos(m theta)| / |eps|`` on the collocation nodes."""
        if self.eps == 0:
            return 0.0
        d = self.g - FourierBoundary.mode(self.g.K, m, self.eps)
        return d.sup_norm() / abs(self.eps)


def _check_branch_mode(cfg, m):
    s = analytic.bifurcation_value(2, cfg.R, m)
    if m == 1:
        raise DomainError("mode m = 1 is excluded: s(1) = 1 forces sigma_c = 1 at the "
                          "bifurcation point, which violates sigma_c != 1")
    if not 0.0 < s < 1.0:
        raise DomainError(f"s({m}) = {s:.6g} is not in (0, 1) for R = {cfg.R}; "
                          "no branch is traced there")
    return s


def _mode_config(cfg, m):
    if cfg.m == m and cfg.sigma_c == analytic.bifurcation_value(cfg.N, cfg.R, m):
        return cfg
    return cfg.replace(m=m, sigma_c=None)


def corrector(cfg: TwoPhaseConfig, m: int, eps: float, guess=None,
              tol: float = NEWTON_TOL, max_iter: int = MAX_NEWTON, jobs: int = 1) -> BranchPoint:
    """Newton-solve for the branch point with ``cos(m theta)`` amplitude ``eps``.

    ``guess`` is a ``(g, lam)`` pair; by default ``(eps cos(m theta), 0)``.
    Damping is Armijo backtracking on the residual sup-norm (factor 1/2, down
    to ``2**-10``).  Once the tolerance is met, further steps are taken only
    while they keep reducing the residual.
    """
    _check_branch_mode(cfg, m)
    cfg = _mode_config(cfg, m)
    K = cfg.K
    if guess is None:
        g, lam = FourierBoundary.mode(K, m, eps), 0.0
    else:
        g, lam = guess
        g = FourierBoundary.from_cos(g.resized(K).cos)
    # impose the constraint exactly on the starting point
    c = g.cos.copy()
    c[m - 1] = eps
    g = FourierBoundary.from_cos(c)

    def merit(g, lam):
        r = residual(cfg, g, lam)
        return max(r.sup_norm(), abs(g.cos[m - 1] - eps)), r

    norm, res = merit(g, lam)
    iters = 0
    while iters < max_iter:
        if norm <= tol * 1e-3:
            break
        J = assemble_jacobian(cfg, g, lam, even=True, jobs=jobs)
        dlam = (residual(cfg, g, lam + LAMBDA_STEP).cos
                - residual(cfg, g, lam - LAMBDA_STEP).cos) / (2 * LAMBDA_STEP)
        A = np.zeros((K + 1, K + 1))
        A[:K, :K] = J
        A[:K, K] = dlam
        A[K, m - 1] = 1.0
        F = np.append(res.cos, g.cos[m - 1] - eps)
        try:
            step = np.linalg.solve(A, -F)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"singular Newton matrix at eps={eps}") from exc
        iters += 1
        t = 1.0
        accepted = False
        while t >= MIN_DAMPING:
            trial_g = FourierBoundary.from_cos(g.cos + t * step[:K])
            trial_lam = lam + t * step[K]
            try:
                trial_norm, trial_res = merit(trial_g, trial_lam)
            except (GeometryError, SolverError, DomainError):
                t *= 0.5
                continue
            if trial_norm <= (1 - 1e-4 * t) * norm:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            if norm <= tol:
                break  # already converged; residual is at its floor
            raise ConvergenceError(
                f"line search failed at eps={eps} after {iters} iterations "
                f"(residual {norm:.3e})")
        g, lam, norm, res = trial_g, trial_lam, trial_norm, trial_res
        assert g.parity == "even" and not np.any(g.sin)
    if norm > tol:
        raise ConvergenceError(f"no convergence at eps={eps} in {max_iter} iterations "
                               f"(residual {norm:.3e})")
    return BranchPoint(float(eps), float(lam), g, float(res.sup_norm()), iters)


def geometric_schedule(eps_min: float = EPS_MIN, eps_max: float = EPS_MAX):
    """``eps_min * 2**n`` up to ``eps_max``, with ``eps_max`` appended if missed."""
    out = []
    e = eps_min
    while e <= eps_max * (1 + 1e-12):
        out.append(e)
        e *= 2
    if eps_max - out[-1] > 1e-12 * eps_max:
        out.append(eps_max)
    return out


@dataclass(eq=False)
class Branch:
    m: int
    config: TwoPhaseConfig
    points: list = field(default_factory=list)
    schedule: list = field(default_factory=list)
    failures: list = field(default_factory=list)  # (eps, message)

    @property
    def truncated(self):
        return bool(self.failures)

    def eps(self):
        return np.array([p.eps for p in self.points])

    def lam(self):
        return np.array([p.lam for p in self.points])

    def point(self, eps):
        for p in self.points:
            if math.isclose(p.eps, eps, rel_tol=1e-12, abs_tol=0.0) or p.eps == eps:
                return p
        raise KeyError(eps)

    def fit_lambda(self):
        """Least-squares fit ``lam ~ a eps + b eps^2`` over the nonzero points."""
        e, lam = self.eps(), self.lam()
        keep = e != 0
        if keep.sum() < 2:
            return None
        A = np.column_stack([e[keep], e[keep] ** 2])
        (a, b), *_ = np.linalg.lstsq(A, lam[keep], rcond=None)
        return float(a), float(b)

    def write_csv(self, fh):
        K = self.config.K
        cols = (["epsilon", "lambda", "residual_norm", "newton_iters"]
                + [f"cos_{k}" for k in range(1, K + 1)]
                + [f"sin_{k}" for k in range(1, K + 1)])
        fh.write(",".join(cols) + "\n")
        for p in self.points:
            vals = [f"{p.eps:.17g}", f"{p.lam:.17g}", f"{p.residual_norm:.17g}",
                    str(p.newton_iters)]
            vals += [f"{x:.17g}" for x in p.g.vector()]
            fh.write(",".join(vals) + "\n")

    def to_json(self):
        cfg = asdict(self.config)
        return json.dumps({
            "m": self.m,
            "config": cfg,
            "schedule": list(self.schedule),
            "failures": [{"epsilon": e, "message": msg} for e, msg in self.failures],
            "lambda_fit": self.fit_lambda(),
            "points": [{"epsilon": p.eps, "lambda": p.lam,
                        "residual_norm": p.residual_norm, "newton_iters": p.newton_iters,
                        "g": json.loads(p.g.to_json())} for p in self.points],
        }, indent=2)


def trace_branch(cfg: TwoPhaseConfig, m: int, schedule=None, tol: float = NEWTON_TOL,
                 jobs: int = 1) -> Branch:
    """March along the branch for both signs of ``eps``.

    ``schedule`` lists positive amplitudes (default ``geometric_schedule()``);
    each is used with both signs, warm-starting from the previous point.  A
    failing corrector ends that side of the branch and is recorded in
    ``Branch.failures``.
    """
    _check_branch_mode(cfg, m)
    cfg = _mode_config(cfg, m)
    schedule = sorted(abs(e) for e in (schedule or geometric_schedule()) if e != 0)
    center = BranchPoint(0.0, 0.0, FourierBoundary.zero(cfg.K), residual(cfg, FourierBoundary.zero(cfg.K)).sup_norm(), 0)
    sides = {}
    failures = []
    for sign in (1.0, -1.0):
        pts = []
        prev = None
        for e in schedule:
            eps = sign * e
            guess = None
            if prev is not None:
                guess = (prev.g * (eps / prev.eps), prev.lam)
            try:
                p = corrector(cfg, m, eps, guess, tol=tol, jobs=jobs)
            except (ConvergenceError, GeometryError, SolverError) as exc:
                failures.append((eps, str(exc)))
                break
            pts.append(p)
            prev = p
        sides[sign] = pts
    points = list(reversed(sides[-1.0])) + [center] + sides[1.0]
    return Branch(m, cfg, points, schedule, failures)


@dataclass
class Condition:
    name: str
    passed: bool
    measured: dict
    detail: str = ""


@dataclass
class CRReport:
    m: int
    R: float
    sigma_c: float
    conditions: list = field(default_factory=list)
    rejected: str | None = None

    @property
    def passed(self):
        return self.rejected is None and all(c.passed for c in self.conditions)

    def to_json(self):
        return json.dumps({"m": self.m, "R": self.R, "sigma_c": self.sigma_c,
                           "rejected": self.rejected, "passed": self.passed,
                           "conditions": [asdict(c) for c in self.conditions]}, indent=2)

    def lines(self):
        if self.rejected:
            return [f"REJECTED m={self.m}: {self.rejected}"]
        out = []
        for c in self.conditions:
            vals = ", ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}"
                             for k, v in c.measured.items())
            out.append(f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {vals}")
        return out


def verify_crandall_rabinowitz(cfg: TwoPhaseConfig, m: int,
                               lam_grid=(-0.01, -0.005, 0.0, 0.005, 0.01),
                               slope_step: float = 1e-4, jobs: int = 1) -> CRReport:
    """Check the four bifurcation hypotheses numerically in the even subspace.

    The conductivity is ``cfg.sigma_c + lam`` (``cfg.sigma_c`` defaults to
    ``s(m)``), while the reference slope always uses ``s(m)``; overriding
    ``sigma_c`` therefore shows up as failures of (ii) and (iv).
    """
    try:
        s = _check_branch_mode(cfg, m)
    except DomainError as exc:
        return CRReport(m, cfg.R, float("nan"), rejected=str(exc))
    if cfg.m != m:
        cfg = cfg.replace(m=m, sigma_c=None)
    report = CRReport(m, cfg.R, cfg.sigma_c)
    K = cfg.K
    zero = FourierBoundary.zero(K)

    # (i) trivial solution for all nearby lambda
    worst = max(residual(cfg, zero, lam).sup_norm() for lam in lam_grid)
    report.conditions.append(Condition(
        "(i) Psi(0, lambda) = 0", worst <= 1e-10, {"max_residual": worst}))

    # (ii) one-dimensional kernel spanned by cos(m theta)
    J = assemble_jacobian(cfg, zero, 0.0, even=True, jobs=jobs)
    u, sv, vt = np.linalg.svd(J)
    small = sv < KERNEL_RTOL * sv[0]
    dim = int(small.sum())
    align = float(abs(vt[-1, m - 1]))
    report.conditions.append(Condition(
        "(ii) dim Ker = 1, spanned by cos(m theta)", dim == 1 and align > 1 - 1e-6,
        {"kernel_dim": dim, "smallest_sv": float(sv[-1]), "largest_sv": float(sv[0]),
         "alignment": align}))

    # (iii) range has codimension one and is complementary to the kernel
    diag = np.abs(np.diag(J))
    others = float(np.min(np.delete(diag, m - 1)))
    transversal = float(abs(u[:, -1] @ vt[-1]))
    report.conditions.append(Condition(
        "(iii) codim Im = 1, Im + Ker = Y*",
        dim == 1 and others > KERNEL_RTOL * sv[0] and transversal > 0.5,
        {"rank": int((~small).sum()), "min_other_diag": others,
         "kernel_range_transversality": transversal}))

    # (iv) transversality: d/dlambda of beta_m is nonzero and matches the closed form
    slope = (numeric_beta(cfg, m, slope_step) - numeric_beta(cfg, m, -slope_step)) / (2 * slope_step)
    expected = analytic.beta_slope(cfg.R, m)
    rel = abs(slope - expected) / expected
    report.conditions.append(Condition(
        "(iv) d_lambda d_x Psi [x0] not in Im", slope > 0 and rel <= 1e-3,
        {"slope": float(slope), "expected": expected, "rel_error": float(rel)},
        f"s(m) = {s:.12g}"))
    return report
