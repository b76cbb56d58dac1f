"""Static SVG figures for the report paths of the command-line tools."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "xtick.direction": "out",
    "ytick.direction": "out",
    "lines.linewidth": 1.2,
    "legend.frameon": False,
    "svg.fonttype": "none",
    "svg.hashsalt": "twophase",
}

CORE_COLOR = "#9ecae1"
BOUNDARY_COLOR = "#08306b"
REFERENCE_COLOR = "0.6"


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None}, bbox_inches="tight")
    plt.close(fig)
    return path


def _draw_domain(ax, R, g, exaggeration=1.0, n=720):
    t = np.linspace(0, 2 * np.pi, n + 1)
    r = 1.0 + exaggeration * g(t)
    ax.fill(R * np.cos(t), R * np.sin(t), color=CORE_COLOR, lw=0)
    ax.plot(np.cos(t), np.sin(t), ls="--", lw=0.6, color=REFERENCE_COLOR)
    ax.plot(r * np.cos(t), r * np.sin(t), color=BOUNDARY_COLOR)
    ax.set_aspect("equal")
    ax.set_xticks([])
    ax.set_yticks([])
    for side in ("left", "bottom"):
        ax.spines[side].set_visible(False)


def auto_exaggeration(R, g, margin=0.05):
    """Scale factor making the largest perturbation visible but still outside ``B_R``."""
    sup = g.sup_norm()
    if sup == 0:
        return 1.0
    return max(1.0, 0.6 * (1.0 - R - margin) / sup)


def domain_figure(path, R, g, exaggeration=1.0, title=None):
    """Core ``B_R`` with the perturbed outer boundary."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(3.2, 3.2))
        _draw_domain(ax, R, g, exaggeration)
        if title:
            ax.set_title(title)
        return _save(fig, path)


def branch_gallery(path, branch, n_panels=4):
    """Boundary shapes at the largest positive amplitudes along a branch."""
    pts = [p for p in branch.points if p.eps > 0]
    pts = pts[-n_panels:] if pts else branch.points[-1:]
    R = branch.config.R
    scale = auto_exaggeration(R, pts[-1].g, branch.config.margin)
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, len(pts), figsize=(2.4 * len(pts), 2.6), squeeze=False)
        for ax, p in zip(axes[0], pts):
            _draw_domain(ax, R, p.g, scale)
            ax.set_title(f"eps = {p.eps:.2g}\nlambda = {p.lam:.3g}")
        if scale > 1:
            fig.suptitle(f"m = {branch.m}, perturbation x{scale:.3g}", y=1.05)
        return _save(fig, path)


def branch_diagram(path, branch):
    """``lambda`` against ``eps`` along the branch."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(3.6, 2.8))
        ax.plot(branch.eps(), branch.lam(), "o-", ms=3, color=BOUNDARY_COLOR)
        ax.axhline(0.0, color=REFERENCE_COLOR, lw=0.6)
        ax.set_xlabel("epsilon")
        ax.set_ylabel("lambda")
        ax.set_title(f"branch m = {branch.m}, R = {branch.config.R:g}")
        return _save(fig, path)


def dispersion_figure(path, lam, betas, m):
    """``beta_k(lambda)`` curves; ``betas`` maps ``k`` to an array over ``lam``."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(3.6, 2.8))
        for k, b in betas.items():
            ax.plot(lam, b, lw=2.0 if k == m else 0.9, label=f"k = {k}")
        ax.axhline(0.0, color=REFERENCE_COLOR, lw=0.6)
        ax.set_xlabel("lambda")
        ax.set_ylabel("beta_k")
        ax.legend(fontsize=7, ncol=2)
        return _save(fig, path)


def sigma_figure(path, values):
    """Bar chart of ``s(k)`` with the positive ones highlighted."""
    ks = [k for k, _ in values]
    ss = [s for _, s in values]
    colors = [BOUNDARY_COLOR if s > 0 else REFERENCE_COLOR for s in ss]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(3.6, 2.6))
        ax.bar(ks, ss, color=colors)
        ax.axhline(0.0, color="k", lw=0.6)
        ax.set_xlabel("k")
        ax.set_ylabel("s(k)")
        return _save(fig, path)
