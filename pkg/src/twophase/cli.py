"""Command-line front end.

Subcommands: ``sigma-table``, ``dispersion``, ``solve``, ``linearize``,
``branch`` and ``verify``.  Parameters can come from flags or from a JSON
file given with ``--config``; flags win.  Exit status is 0 on success, 2 on
invalid input and 3 on numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import analytic, plotting
from .analytic import TwoPhaseConfig
from .continuation import geometric_schedule, trace_branch, verify_crandall_rabinowitz
from .errors import DomainError, GeometryError, SolverError
from .fieldsolver import residual
from .geometry import FourierBoundary, check_admissible
from .linearization import spectrum_at_trivial

log = logging.getLogger("twophase")

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    R: float | None = None
    N: int = 2
    sigma_c: float | None = None
    mode_m: int | None = None
    lam: float = 0.0
    K: int = 32
    M_col: int | None = None
    margin: float = analytic.DEFAULT_MARGIN
    out_dir: str = "."
    seed: int = 0
    jobs: int = 1
    # command-specific
    kmax: int | None = None
    lambda_min: float = -0.05
    lambda_max: float = 0.05
    n_lambda: int = 11
    boundary: str | None = None
    random: float | None = None
    svg: bool = False
    eps_min: float = 1e-4
    eps_max: float = 1e-2
    plots: bool = True
    sigma_override: float | None = None

    def two_phase(self, need_sigma=True):
        if self.R is None:
            raise UsageError("--R is required")
        if need_sigma and self.sigma_c is None and self.mode_m is None:
            raise UsageError("one of --sigma-c or --mode-m is required")
        return TwoPhaseConfig(R=self.R, sigma_c=self.sigma_c, m=self.mode_m, N=self.N,
                              K=self.K, M_col=self.M_col, margin=self.margin)

    @property
    def out(self):
        p = Path(self.out_dir)
        p.mkdir(parents=True, exist_ok=True)
        return p


CONFIG_KEYS = {f.name for f in fields(RunConfig)} | {"lambda", "m"}


def _read_text(path):
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def load_config(path):
    text = _read_text(path)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise UsageError(f"{path}: configuration must be a JSON object")
    unknown = set(doc) - CONFIG_KEYS
    if unknown:
        raise UsageError(f"{path}: unknown configuration keys {sorted(unknown)}")
    if "lambda" in doc:
        doc["lam"] = doc.pop("lambda")
    if "m" in doc:
        doc["mode_m"] = doc.pop("m")
    for key, value in doc.items():
        _check_type(path, key, value)
    return doc


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _check_type(path, key, value):
    spec = _FIELD_TYPES[key]
    if value is None and "None" in spec:
        return
    if spec.startswith("bool"):
        ok = isinstance(value, bool)
    elif spec.startswith("int"):
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif spec.startswith("float"):
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    else:
        ok = isinstance(value, str)
    if not ok:
        raise UsageError(f"{path}: key {key!r} has invalid value {value!r} (expected {spec})")


def _common(p):
    g = p.add_argument_group("configuration")
    g.add_argument("--config", help="JSON file with any of the options below")
    g.add_argument("--N", type=int)
    g.add_argument("--R", type=float, help="core radius, 0 < R < 1")
    g.add_argument("--sigma-c", dest="sigma_c", type=float, help="core conductivity")
    g.add_argument("--mode-m", dest="mode_m", type=int,
                   help="bifurcation mode; sigma_c defaults to s(m)")
    g.add_argument("--lambda", dest="lam", type=float, help="offset added to sigma_c")
    g.add_argument("--K", type=int, help="Fourier truncation order")
    g.add_argument("--M-col", dest="M_col", type=int, help="collocation nodes")
    g.add_argument("--margin", type=float)
    g.add_argument("--out-dir", dest="out_dir")
    g.add_argument("--seed", type=int)
    g.add_argument("--jobs", type=int, help="threads for independent column probes")
    g.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(prog="twophase", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sigma-table", help="bifurcation values s(k) and the set of positive ones")
    _common(p)
    p.add_argument("--kmax", type=int)

    p = sub.add_parser("dispersion", help="beta_k(lambda) on a lambda grid")
    _common(p)
    p.add_argument("--kmax", type=int)
    p.add_argument("--lambda-min", dest="lambda_min", type=float)
    p.add_argument("--lambda-max", dest="lambda_max", type=float)
    p.add_argument("--n-lambda", dest="n_lambda", type=int)

    p = sub.add_parser("solve", help="residual trace on a perturbed boundary")
    _common(p)
    p.add_argument("--boundary", help="boundary JSON file (default: unit circle)")
    p.add_argument("--random", type=float, metavar="AMP",
                   help="random even-decaying perturbation of sup-norm AMP (uses --seed)")
    p.add_argument("--svg", action="store_true", help="also write domain.svg")

    p = sub.add_parser("linearize", help="Jacobian spectrum at the trivial solution")
    _common(p)
    p.add_argument("--kmax", type=int)

    p = sub.add_parser("branch", help="trace the symmetry-breaking branch for mode m")
    _common(p)
    p.add_argument("--eps-min", dest="eps_min", type=float)
    p.add_argument("--eps-max", dest="eps_max", type=float)
    p.add_argument("--no-plots", dest="plots", action="store_false", default=None)

    p = sub.add_parser("verify", help="check the four bifurcation hypotheses for mode m")
    _common(p)
    p.add_argument("--sigma-override", dest="sigma_override", type=float,
                   help="use this conductivity instead of s(m) (failure injection)")
    return parser


def resolve(args) -> RunConfig:
    values = {}
    if args.config:
        values.update(load_config(args.config))
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    return RunConfig(**values)


def _fmt(x):
    return f"{x:.17g}"


def cmd_sigma_table(rc: RunConfig):
    if rc.R is None:
        raise UsageError("--R is required")
    kmax = rc.kmax or 10
    ss = analytic.sigma_set(rc.N, rc.R, kmax)
    path = rc.out / "sigma_table.csv"
    with open(path, "w") as fh:
        fh.write("k,s_k,in_sigma\n")
        for k, s in ss.values:
            fh.write(f"{k},{_fmt(s)},{int(s > 0)}\n")
    print(f"{'k':>4} {'s(k)':>14}  in Sigma")
    for k, s in ss.values:
        print(f"{k:>4} {s:>14.6f}  {'yes' if s > 0 else 'no'}")
    cut = ss.cutoff if ss.cutoff is not None else f"none up to k={kmax}"
    print(f"Sigma = {{{', '.join(f'{s:.6g}' for _, s in ss.members)}}}; "
          f"s(k) < 0 for all k >= {cut}")
    if ss.above_one:
        print(f"note: s(k) >= 1 for k = {list(ss.above_one)} (not traced)")
    if rc.plots:
        plotting.sigma_figure(rc.out / "sigma_table.svg", ss.values)
    return EXIT_OK


def cmd_dispersion(rc: RunConfig):
    if rc.R is None or rc.mode_m is None:
        raise UsageError("dispersion requires --R and --mode-m")
    if rc.n_lambda < 1:
        raise UsageError("--n-lambda must be at least 1 (empty lambda grid)")
    m = rc.mode_m
    kmax = rc.kmax or max(8, m + 2)
    grid = np.linspace(rc.lambda_min, rc.lambda_max, rc.n_lambda)
    betas = {}
    path = rc.out / "dispersion.csv"
    with open(path, "w") as fh:
        fh.write("m,k,lambda,beta,dbeta_dlambda\n")
        for k in range(1, kmax + 1):
            row = []
            for lam in grid:
                b = analytic.beta(rc.R, m, k, lam)
                d = analytic.dbeta_dlambda(rc.R, m, k, lam)
                row.append(b)
                fh.write(f"{m},{k},{_fmt(lam)},{_fmt(b)},{_fmt(d)}\n")
            betas[k] = np.array(row)
    print(f"s({m}) = {analytic.bifurcation_value(2, rc.R, m):.12g}")
    s_m = analytic.bifurcation_value(2, rc.R, m)
    if 0 < s_m < 1:
        print(f"d beta_{m}/d lambda (0) = {analytic.beta_slope(rc.R, m):.12g}")
    print(f"wrote {path}")
    if rc.plots:
        plotting.dispersion_figure(rc.out / "dispersion.svg", grid, betas, m)
    return EXIT_OK


def _read_boundary(path, K):
    text = _read_text(path)
    try:
        g = FourierBoundary.from_json(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: malformed boundary JSON: {exc.msg}") from exc
    if g.K > K:
        raise UsageError(f"boundary order {g.K} exceeds --K {K}")
    return g.resized(K)


def _random_boundary(rc, K):
    rng = np.random.default_rng(rc.seed)
    k = np.arange(1, K + 1)
    decay = np.exp(-0.5 * k)
    g = FourierBoundary(rng.standard_normal(K) * decay, rng.standard_normal(K) * decay)
    return g * (rc.random / g.sup_norm())


def cmd_solve(rc: RunConfig):
    cfg = rc.two_phase()
    if rc.boundary:
        g = _read_boundary(rc.boundary, cfg.K)
    elif rc.random:
        g = _random_boundary(rc, cfg.K)
    else:
        g = FourierBoundary.zero(cfg.K)
    check_admissible(g, cfg.R, cfg.margin, cfg.M_col)
    res = residual(cfg, g, rc.lam)
    path = rc.out / "residual.csv"
    with open(path, "w") as fh:
        res.write_csv(fh)
    print(f"sigma_c = {res.sigma:.12g}, c_g = {res.c_g:.12g}")
    print(f"max|Psi| = {res.sup_norm():.3e}, max|sine coeff| = {np.max(np.abs(res.sin)):.3e}, "
          f"collocation residual = {res.collocation_residual:.3e}")
    print(f"wrote {path}")
    if rc.svg:
        plotting.domain_figure(rc.out / "domain.svg", cfg.R, g,
                               plotting.auto_exaggeration(cfg.R, g, cfg.margin))
    return EXIT_OK


def cmd_linearize(rc: RunConfig):
    cfg = rc.two_phase()
    kmax = rc.kmax or min(16, cfg.K // 2)
    if kmax > cfg.K // 2:
        raise UsageError(f"--kmax {kmax} exceeds K/2 = {cfg.K // 2}")
    spec = spectrum_at_trivial(cfg, rc.lam, kmax, jobs=rc.jobs)
    path = rc.out / "spectrum.csv"
    with open(path, "w") as fh:
        spec.write_csv(fh)
    print(f"{'k':>4} {'beta_numeric':>16} {'beta_analytic':>16} {'abs_error':>10}")
    err = spec.abs_error()
    for i, k in enumerate(spec.modes):
        ana = "" if spec.analytic_beta is None else f"{spec.analytic_beta[i]:16.10f}"
        e = "" if err is None else f"{err[i]:10.2e}"
        print(f"{k:>4} {spec.numeric_beta[i]:16.10f} {ana:>16} {e:>10}")
    print(f"max off-diagonal response = {spec.offdiag_norm:.3e}")
    return EXIT_OK


def cmd_branch(rc: RunConfig):
    if rc.mode_m is None:
        raise UsageError("branch requires --mode-m")
    cfg = rc.two_phase()
    schedule = geometric_schedule(rc.eps_min, rc.eps_max)
    br = trace_branch(cfg, rc.mode_m, schedule, jobs=rc.jobs)
    with open(rc.out / "branch.csv", "w") as fh:
        br.write_csv(fh)
    (rc.out / "branch.json").write_text(br.to_json())
    if rc.plots:
        plotting.branch_gallery(rc.out / "branch_gallery.svg", br)
        plotting.branch_diagram(rc.out / "branch_diagram.svg", br)
    print(f"{'epsilon':>12} {'lambda':>14} {'residual':>10} {'deviation':>10}")
    for p in br.points:
        print(f"{p.eps:>12.4e} {p.lam:>14.6e} {p.residual_norm:>10.2e} {p.deviation(br.m):>10.3e}")
    fit = br.fit_lambda()
    if fit:
        print(f"lambda ~ {fit[0]:.4g} eps + {fit[1]:.4g} eps^2")
    for eps, msg in br.failures:
        print(f"branch truncated at eps = {eps:g}: {msg}", file=sys.stderr)
    return EXIT_NUMERIC if br.truncated else EXIT_OK


def cmd_verify(rc: RunConfig):
    if rc.R is None or rc.mode_m is None:
        raise UsageError("verify requires --R and --mode-m")
    m = rc.mode_m
    if m == 1 or not 0 < analytic.bifurcation_value(2, rc.R, m) < 1:
        report = verify_crandall_rabinowitz(TwoPhaseConfig(R=rc.R, sigma_c=0.5, K=rc.K), m)
    else:
        sigma = rc.sigma_override if rc.sigma_override is not None else rc.sigma_c
        cfg = TwoPhaseConfig(R=rc.R, m=m, sigma_c=sigma, N=rc.N, K=rc.K,
                             M_col=rc.M_col, margin=rc.margin)
        report = verify_crandall_rabinowitz(cfg, m, jobs=rc.jobs)
    (rc.out / "verify.json").write_text(report.to_json())
    for line in report.lines():
        print(line)
    print("ALL PASS" if report.passed else "FAILED")
    if report.rejected:
        return EXIT_INVALID
    return EXIT_OK if report.passed else EXIT_NUMERIC


COMMANDS = {
    "sigma-table": cmd_sigma_table,
    "dispersion": cmd_dispersion,
    "solve": cmd_solve,
    "linearize": cmd_linearize,
    "branch": cmd_branch,
    "verify": cmd_verify,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        rc = resolve(args)
        return COMMANDS[args.command](rc)
    except (UsageError, DomainError, GeometryError) as exc:
        print(f"twophase {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SolverError as exc:
        print(f"twophase {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
