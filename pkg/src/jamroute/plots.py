"""Matplotlib figure rendering for topologies, routes, sweeps, and MC checks.

Every function writes a file and returns its path; rendering is headless.
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict, Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .experiment import McValidationReport, SweepRecord
from .planner import RoutePlan
from .topology import Topology

_AXIS_LABELS = {
    "outage_budget": "end-to-end outage budget",
    "max_power_w": "transmit power cap (W)",
}
_MODE_COLORS = {"vehicle": "royalblue", "baseline": "crimson"}


def render_topology(
    topology: Topology,
    path: Union[str, Path],
    plans: Optional[Dict[str, Optional[RoutePlan]]] = None,
) -> Path:
    """Draw the node/jammer layout, the road, and any planned routes."""
    fig, ax = plt.subplots(figsize=(7.0, 7.0))
    road_xy = topology.road_point_array()
    ax.plot(road_xy[:, 0], road_xy[:, 1], color="0.55", lw=3.0, alpha=0.5, label="road")
    for plane, marker in (("A", "o"), ("B", "s")):
        pts = np.array(
            [[n.point.x, n.point.y] for n in topology.nodes if n.plane == plane]
        ).reshape(-1, 2)
        ax.scatter(
            pts[:, 0], pts[:, 1], marker=marker, s=28, facecolors="none",
            edgecolors="0.3", label=f"plane {plane} nodes",
        )
    jam = topology.jammer_positions()
    if jam.size:
        ax.scatter(jam[:, 0], jam[:, 1], marker="x", s=48, color="red", label="jammers")

    for mode, plan in (plans or {}).items():
        if plan is None:
            continue
        color = _MODE_COLORS.get(mode, "black")
        for hop in plan.hops:
            xs = [hop.tx.point.x, hop.rx.point.x]
            ys = [hop.tx.point.y, hop.rx.point.y]
            style = "-" if hop.counted else ":"
            ax.plot(xs, ys, style, color=color, lw=1.6)
        if plan.handoff_point is not None:
            ax.scatter(
                [plan.handoff_point.x], [plan.handoff_point.y],
                marker="*", s=140, color=color, zorder=5,
            )
        ax.plot([], [], "-", color=color, label=f"{mode} route")

    src = topology.node(topology.source_id).point
    dst = topology.node(topology.dest_id).point
    ax.scatter([src.x], [src.y], marker="^", s=90, color="green", zorder=5)
    ax.scatter([dst.x], [dst.y], marker="v", s=90, color="purple", zorder=5)
    ax.annotate("S", (src.x, src.y), textcoords="offset points", xytext=(6, 6))
    ax.annotate("D", (dst.x, dst.y), textcoords="offset points", xytext=(6, 6))
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_aspect("equal")
    ax.legend(loc="best", fontsize=8)
    ax.set_title(f"topology (seed {topology.seed})")
    out = Path(path)
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out


def render_sweep(records: Sequence[SweepRecord], path: Union[str, Path]) -> Path:
    """Energy-versus-axis curves, one faint line per seed plus the mean."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    axis = records[0].axis if records else "value"
    for mode in sorted({r.mode for r in records}):
        color = _MODE_COLORS.get(mode, "black")
        per_seed: Dict[int, list] = {}
        for r in records:
            if r.mode == mode:
                per_seed.setdefault(r.seed, []).append(r)
        means: Dict[float, list] = {}
        for seed, rows in sorted(per_seed.items()):
            rows = sorted(rows, key=lambda r: r.value)
            xs = [r.value for r in rows if r.energy_j is not None]
            ys = [r.energy_j for r in rows if r.energy_j is not None]
            ax.plot(xs, ys, color=color, alpha=0.25, lw=0.9)
            for r in rows:
                if r.energy_j is not None:
                    means.setdefault(r.value, []).append(r.energy_j)
        if means:
            xs = sorted(means)
            ys = [float(np.mean(means[x])) for x in xs]
            ax.plot(xs, ys, color=color, lw=2.2, marker="o", ms=4, label=f"{mode} (mean)")
    ax.set_xlabel(_AXIS_LABELS.get(axis, axis))
    ax.set_ylabel("route energy (J)")
    ax.grid(alpha=0.3)
    ax.legend(loc="best")
    out = Path(path)
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out


def render_mc_report(report: McValidationReport, path: Union[str, Path]) -> Path:
    """Per-link |MC - closed form| deviation against the binomial bound."""
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    idx = np.arange(len(report.checks))
    dev = np.array([abs(c.monte_carlo - c.closed_form) for c in report.checks])
    bound = np.array([c.bound for c in report.checks])
    ax.bar(idx, dev, color="steelblue", label="|MC - closed form|")
    ax.plot(idx, bound, "r_", ms=10, label="4-sigma bound")
    ax.set_xlabel("link index")
    ax.set_ylabel("outage deviation")
    ax.set_title(f"{report.samples} samples/link, seed {report.seed}")
    ax.legend(loc="best")
    out = Path(path)
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out
