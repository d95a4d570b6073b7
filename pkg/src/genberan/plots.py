"""Figure rendering for study and real-data reports.

Figures are written as SVG next to the CSV series they visualize. The SVG
output is made deterministic (fixed hash salt, no date metadata) so report
directories are byte-identical across reruns.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

plt.rcParams["svg.hashsalt"] = "genberan"

_STYLES = {
    "beran": {"color": "black", "linestyle": "-"},
    "gbe-oracle": {"color": "tab:green", "linestyle": "--"},
    "gbe-prior": {"color": "tab:blue", "linestyle": ":"},
    "gbe-linear": {"color": "tab:red", "linestyle": "-."},
    "gbe-nn": {"color": "tab:brown", "linestyle": "-.", "marker": "x",
               "markevery": 10},
    "gbe-nw": {"color": "tab:purple", "linestyle": "--"},
}


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_mse_curves(result, path):
    """One panel per test covariate, one MSE-vs-time series per variant."""
    n_panels = len(result.x_test)
    fig, axes = plt.subplots(1, n_panels, figsize=(4.2 * n_panels, 3.4),
                             sharey=True, squeeze=False)
    for j, x in enumerate(result.x_test):
        ax = axes[0][j]
        for v in result.variants:
            ax.plot(result.fixed_grid, result.mse_curves[v][j],
                    label=v, **_STYLES.get(v, {}))
        ax.set_title(f"x = {x}")
        ax.set_xlabel("time")
        if j == 0:
            ax.set_ylabel("MSE")
    axes[0][-1].legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def plot_survival_series(grid, series, path, title=""):
    """Survival curves (one per variant) on a common time grid.

    ``series`` maps variant name to an array of survival values.
    """
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    for name, vals in series.items():
        ax.plot(grid, vals, label=name, **_STYLES.get(name, {}))
    ax.set_xlabel("time")
    ax.set_ylabel("survival")
    ax.set_ylim(-0.02, 1.02)
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)
