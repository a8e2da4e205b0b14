"""Matplotlib drawings of representations and range profiles."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .graph import Graph, as_pvebg  # noqa: E402
from .verify import FEASIBLE, INFEASIBLE, RangeProfile, Representation  # noqa: E402

_STYLE = {"red": dict(color="#c0392b", lw=1.2), "blue": dict(color="#2456a6", lw=1.2)}
_STATUS_Y = {FEASIBLE: 1.0, INFEASIBLE: 0.0}

# fixed metadata keeps SVG output byte-stable between runs
_SVG_META = {"Date": None, "Creator": None}


def _save(fig, path) -> None:
    plt.rcParams["svg.hashsalt"] = "twodist"
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)


def render_representation(g: Graph, rep: Representation, path, annotate_classes: bool = True,
                          title: str = "") -> None:
    p = as_pvebg(g)
    pts = np.asarray(rep.points)
    fig, ax = plt.subplots(figsize=(6, 6))
    for colour in ("red", "blue"):
        edges = p.red_edges if colour == "red" else p.blue_edges
        for u, v in edges:
            ax.plot(*pts[[u, v]].T, **_STYLE[colour], zorder=1)
    for e in p.green_edges:
        a, b = pts[e.tail], pts[e.head]
        ax.annotate("", xy=b, xytext=a,
                    arrowprops=dict(arrowstyle="->", color="#27ae60", lw=0.8, ls="--"), zorder=2)
        if annotate_classes:
            mid = (a + b) / 2
            ax.text(mid[0], mid[1], e.cls, fontsize=6, color="#1e8449", ha="center", va="bottom")
    ax.scatter(pts[:, 0], pts[:, 1], s=8, color="black", zorder=3)
    ax.set_aspect("equal")
    ax.set_title(title)
    ax.axis("off")
    _save(fig, path)


def plot_profile(profile: RangeProfile, path, title: str = "") -> None:
    ds = np.array([s[0] for s in profile.samples])
    ys = np.array([_STATUS_Y.get(s[1], 0.5) for s in profile.samples])
    res = np.array([max(s[2], 1e-17) for s in profile.samples])
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(7, 4), sharex=True)
    top.step(ds, ys, where="mid", color="#2c3e50")
    top.scatter(ds, ys, s=10, color="#2c3e50")
    top.set_yticks([0, 0.5, 1], ["infeasible", "degenerate", "feasible"])
    for lo, hi, _ in profile.inferred_intervals:
        top.axvspan(lo, hi, color="#27ae60", alpha=0.15)
    bottom.semilogy(ds, res, ".-", color="#8e44ad", lw=0.8)
    bottom.set_ylabel("residual")
    bottom.set_xlabel("d")
    top.set_title(title)
    fig.tight_layout()
    _save(fig, path)
