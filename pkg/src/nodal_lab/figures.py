"""Figure rendering for scan fits and identity residuals.

Uses the Agg backend unconditionally so rendering works headless.  PNG
output is best-effort visual companion material; the JSON/CSV documents
remain the canonical record.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def render_loglog_fit(path, xs, ys, slope, intercept, x_label, y_label):
    """Scatter of (x, y) on log-log axes with the fitted power law overlaid."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    fig, ax = plt.subplots(figsize=(5.0, 3.75))
    ax.loglog(xs, ys, "o", ms=4, color="#1f6fb2", label="data")
    span = np.linspace(np.log(xs.min()), np.log(xs.max()), 64)
    ax.plot(
        np.exp(span),
        np.exp(intercept + slope * span),
        "-",
        color="#c44e52",
        lw=1.2,
        label=f"slope {slope:.4f}",
    )
    ax.set_xlabel(x_label)
    ax.set_ylabel(y_label)
    ax.legend(frameon=False, fontsize=8)
    ax.grid(True, which="both", alpha=0.25, lw=0.4)
    fig.tight_layout()
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_residuals(path, reports):
    """Bar chart of relative residuals for a batch of identity reports."""
    labels = []
    values = []
    for i, rep in enumerate(reports):
        name = rep.get("identity_name", "?") if isinstance(rep, dict) else rep.identity_name
        rel = rep.get("rel_residual") if isinstance(rep, dict) else rep.rel_residual
        labels.append(f"{name}[{i}]")
        values.append(max(float(rel if rel is not None else 0.0), 1e-18))
    fig, ax = plt.subplots(figsize=(max(4.0, 0.55 * len(labels) + 1.5), 3.5))
    ax.bar(range(len(values)), values, color="#1f6fb2")
    ax.set_yscale("log")
    ax.set_ylabel("relative residual")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=60, ha="right", fontsize=7)
    ax.grid(True, axis="y", alpha=0.25, lw=0.4)
    fig.tight_layout()
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    fig.savefig(path, dpi=120)
    plt.close(fig)
