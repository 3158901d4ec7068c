"""Figure rendering for run diagnostics and comparison tables.

Renders matplotlib figures to PNG files next to the delimited output; no
interactive backend is ever required.
"""

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .export import read_csv


def _semilogy(ax, x, series, xlabel, title):
    for label, values in series:
        if any(v > 0 for v in values):
            ax.semilogy(x, values, marker=".", label=label)
        else:
            ax.plot(x, values, marker=".", label=label)
    ax.set_xlabel(xlabel)
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()


def render_run_report(out_dir, diagnostics_csv=None):
    """Residual and norm history figures from a run's diagnostics table.

    Returns the list of figure paths written.
    """
    diagnostics_csv = diagnostics_csv or os.path.join(out_dir, "diagnostics.csv")
    rows = read_csv(diagnostics_csv)
    t = [row["t"] for row in rows]
    written = []

    fig, ax = plt.subplots(figsize=(7, 4.5))
    _semilogy(ax, t, [
        ("EQS residual", [row["eqs_residual"] for row in rows]),
        ("MQS residual", [row["mqs_residual"] for row in rows]),
        ("solenoidality", [row["solenoidality_residual"] for row in rows]),
        ("divergence monitor", [row["divergence_monitor"] for row in rows]),
    ], "t / s", "Per-step residuals")
    path = os.path.join(out_dir, "residuals.png")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(t, [row["phi_norm"] for row in rows], marker=".", label="|phi|")
    ax.set_xlabel("t / s")
    ax.set_ylabel("|phi|", color="C0")
    ax2 = ax.twinx()
    ax2.plot(t, [row["a_norm"] for row in rows], marker=".", color="C1", label="|a|")
    ax2.set_ylabel("|a|", color="C1")
    ax.set_title("State norm history")
    ax.grid(True, alpha=0.3)
    path = os.path.join(out_dir, "state_norms.png")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)
    return written


def render_comparison_report(out_dir, comparison_csv=None):
    """Bar chart of the relative field differences from a comparison table."""
    comparison_csv = comparison_csv or os.path.join(out_dir, "comparison.csv")
    rows = read_csv(comparison_csv)
    labels = [row["quantity"] for row in rows]
    values = [row["relative_difference"] for row in rows]

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(labels, values, color="C0")
    ax.set_yscale("log")
    ax.set_ylabel("relative difference")
    ax.set_title("Darwin vs full-Maxwell reference")
    ax.grid(True, axis="y", which="both", alpha=0.3)
    path = os.path.join(out_dir, "comparison.png")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return [path]
