"""Comparison charts rendered next to the delimited output.

Everything goes through the Agg backend with fixed geometry so the same
reports always produce byte-identical PNGs.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

FIGURE_NAMES = ("completion_time.png", "computation_time.png",
                "resource_utilization.png", "reductions.png", "load_split.png")


def _new_axes():
    return plt.subplots(figsize=(6.4, 3.6), dpi=100)


def _finish(fig, ax, path, labels, title, ylabel):
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax.set_title(title)
    ax.set_ylabel(ylabel)
    fig.tight_layout()
    fig.savefig(path, format="png")
    plt.close(fig)


def _bar_chart(path, labels, values, title, ylabel):
    fig, ax = _new_axes()
    ax.bar(range(len(labels)), values, 0.6, color="#4878a8")
    _finish(fig, ax, path, labels, title, ylabel)


def render_comparison_figures(reports, outdir) -> list[str]:
    """One chart per headline metric; returns the written paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    labels = [r.scheme for r in reports]

    _bar_chart(outdir / "completion_time.png", labels,
               [r.completion_mean_s for r in reports],
               "Mean task completion time", "seconds")
    _bar_chart(outdir / "computation_time.png", labels,
               [r.computation_mean_s for r in reports],
               "Mean task computation time", "seconds")
    _bar_chart(outdir / "resource_utilization.png", labels,
               [r.resource_utilization for r in reports],
               "Edge resource utilization", "busy fraction")

    fig, ax = _new_axes()
    x = range(len(labels))
    width = 0.38
    ax.bar([i - width / 2 for i in x], [r.comm_reduction for r in reports],
           width, label="communication", color="#4878a8")
    ax.bar([i + width / 2 for i in x], [r.comp_reduction for r in reports],
           width, label="computation", color="#a85448")
    ax.legend(fontsize=8)
    _finish(fig, ax, outdir / "reductions.png", labels,
            "Reduction vs remote-only execution", "fraction")

    fig, ax = _new_axes()
    bottoms = [0.0] * len(labels)
    for attr, label, color in (("load_cloud", "cloud", "#888888"),
                               ("load_edge_scratch", "edge scratch", "#4878a8"),
                               ("load_edge_reuse", "edge reuse", "#58a868")):
        values = [getattr(r, attr) for r in reports]
        ax.bar(range(len(labels)), values, 0.6, bottom=bottoms,
               label=label, color=color)
        bottoms = [b + v for b, v in zip(bottoms, values)]
    ax.legend(fontsize=8)
    _finish(fig, ax, outdir / "load_split.png", labels,
            "Where tasks were served", "fraction of tasks")

    return [str(outdir / name) for name in FIGURE_NAMES]
