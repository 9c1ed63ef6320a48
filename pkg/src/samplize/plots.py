"""Figure rendering for the report path: every CSV the CLI emits gets a
matching PNG next to it."""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .harness import ScalingFit, TrialRow


def render_run_report(rows: Sequence[TrialRow], path: str) -> str:
    """Two panels: per-trial estimation errors against the target, and the
    joint success rate per epsilon."""
    eps_values = sorted({r.epsilon for r in rows})
    fig, (ax_err, ax_succ) = plt.subplots(1, 2, figsize=(10, 4))

    jitter = 0.008
    for k, eps in enumerate(eps_values):
        sub = [r for r in rows if r.epsilon == eps]
        xs = np.full(len(sub), eps)
        off = jitter * eps
        ax_err.plot(xs - off, [r.err_T for r in sub], ".", color="tab:blue",
                    alpha=0.5, markersize=4, label="|T err|" if k == 0 else None)
        ax_err.plot(xs + off, [r.err_F for r in sub], ".", color="tab:orange",
                    alpha=0.5, markersize=4, label="|F err|" if k == 0 else None)
    lo, hi = min(eps_values), max(eps_values)
    ax_err.plot([lo, hi], [lo, hi], "k--", linewidth=1, label="target")
    ax_err.set_xlabel("epsilon")
    ax_err.set_ylabel("absolute error")
    ax_err.set_title(f"errors ({rows[0].method})")
    ax_err.legend(fontsize=8)

    rates = [
        np.mean([r.success for r in rows if r.epsilon == eps]) for eps in eps_values
    ]
    ax_succ.bar(range(len(eps_values)), rates, color="tab:green", alpha=0.8)
    ax_succ.set_xticks(range(len(eps_values)))
    ax_succ.set_xticklabels([f"{e:g}" for e in eps_values])
    ax_succ.set_ylim(0, 1.05)
    ax_succ.axhline(2 / 3, color="k", linestyle="--", linewidth=1)
    ax_succ.set_xlabel("epsilon")
    ax_succ.set_ylabel("joint success rate")
    ax_succ.set_title("success (both errors within epsilon)")

    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_scaling_plot(fit: ScalingFit, method: str, path: str) -> str:
    """Log-log sample cost against epsilon with the fitted power law."""
    xs = np.array([p[0] for p in fit.points])
    ys = np.array([p[1] for p in fit.points])
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(np.exp(xs), np.exp(ys), "o", color="tab:blue", label="median samples")
    grid = np.linspace(xs.min(), xs.max(), 50)
    ax.plot(
        np.exp(grid),
        np.exp(fit.slope * grid + fit.intercept),
        "-",
        color="tab:red",
        label=f"slope {fit.slope:.2f} (R^2 {fit.r_squared:.3f})",
    )
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("epsilon")
    ax.set_ylabel("total samples")
    ax.set_title(f"sample-cost scaling: {method}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
