"""Report figures (headless matplotlib)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
    "figure.figsize": (5.0, 3.4),
}
RAIL_COLOR = "#1f4e79"
HIGHWAY_COLOR = "#c55a11"


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_frontier(points, path, highlight=None):
    """Step plot of revenue against operating cost for the nondominated plans."""
    pts = sorted(points, key=lambda p: (p.z1, p.z2))
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        xs = [p.z1 for p in pts]
        ys = [p.z2 for p in pts]
        ax.step(xs, ys, where="post", color="0.6", lw=1, zorder=1)
        ax.scatter(xs, ys, s=22, color=RAIL_COLOR, zorder=2)
        for p in pts:
            ax.annotate(p.plan_id, (p.z1, p.z2), textcoords="offset points", xytext=(4, -9), fontsize=7)
        if highlight is not None:
            ax.scatter([highlight.z1], [highlight.z2], s=70, facecolors="none", edgecolors=HIGHWAY_COLOR, lw=1.5,
                       zorder=3, label="max z2 - z1")
            ax.legend(frameon=False, loc="lower right")
        ax.set_xlabel("operating cost z1 (CNY/day)")
        ax.set_ylabel("rail revenue z2 (CNY/day)")
        return _save(fig, path)


def plot_mode_split(point, path):
    decisions = list(point.lm.decisions)
    labels = [f"{d.demand.origin}-{d.demand.destination}" for d in decisions]
    rail = [d.rail_volume for d in decisions]
    road = [d.demand.volume - d.rail_volume for d in decisions]
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        idx = range(len(decisions))
        ax.bar(idx, rail, color=RAIL_COLOR, label="rail")
        ax.bar(idx, road, bottom=rail, color=HIGHWAY_COLOR, label="highway")
        ax.set_xticks(list(idx))
        ax.set_xticklabels(labels, rotation=45, ha="right")
        ax.set_ylabel("cars/day")
        ax.set_title(f"mode split, plan {point.plan_id}")
        ax.legend(frameon=False)
        return _save(fig, path)
