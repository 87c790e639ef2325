"""Run artifacts: trace CSV, summary JSON, body snapshots and SVG plots.

Plots are written with a fixed hash salt and no date metadata, so the same
trace always produces byte-identical SVG files.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .body2d import Body2D

__all__ = [
    "snapshot_steps",
    "SnapshotRecorder",
    "write_trace",
    "write_summary",
    "write_snapshot",
    "plot_functionals",
    "plot_outlines",
]


def snapshot_steps(limit: int) -> list[int]:
    """``0, 1, 2, 5, 10, 20, 50, 100, ...`` up to ``limit``."""
    steps, scale = [0], 1
    while True:
        for m in (1, 2, 5):
            s = m * scale
            if s > limit:
                return steps
            steps.append(s)
        scale *= 10


class SnapshotRecorder:
    """Iteration callback keeping the bodies at the snapshot steps and the last one."""

    def __init__(self, max_iter: int):
        self.wanted = set(snapshot_steps(max_iter))
        self.bodies = {}
        self.last = None

    def __call__(self, i, K):
        if i in self.wanted:
            self.bodies[i] = K
        self.last = (i, K)

    def items(self):
        out = dict(self.bodies)
        if self.last is not None:
            out[self.last[0]] = self.last[1]
        return sorted(out.items())


def _clean(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.generic):
        return _clean(value.item())
    return value


def write_trace(trace, path):
    Path(path).write_text(trace.to_csv())


def write_summary(summary: dict, path):
    Path(path).write_text(json.dumps(_clean(summary), indent=2, sort_keys=True) + "\n")


def write_snapshot(K, directory, step: int) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    csv_path = directory / f"body_{step:05d}.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if isinstance(K, Body2D):
            writer.writerow(["theta", "h", "f"])
            for row in K.snapshot_rows():
                writer.writerow([repr(float(v)) for v in row])
            return [csv_path]
        writer.writerow(["ux", "uy", "uz", "h", "A"])
        for u, h, a in zip(K.grid.nodes, K.support, K.areas):
            writer.writerow([repr(float(v)) for v in (*u, h, a)])
    off_path = directory / f"body_{step:05d}.off"
    off_path.write_text(K.to_off())
    return [csv_path, off_path]


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "curvimg"
    return plt


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})


def plot_functionals(trace, path):
    """Functionals and residual against the iteration count."""
    plt = _pyplot()
    it = trace.column("iter")
    fig, axes = plt.subplots(2, 2, figsize=(8, 6))
    panels = [
        ("volume", "V"),
        ("A_p", "A_p"),
        ("vol_product", "volume product"),
        ("residual", "fixed-point residual"),
    ]
    for ax, (col, title) in zip(axes.flat, panels):
        y = trace.column(col)
        if col == "residual":
            ax.semilogy(it, np.maximum(y, 1e-17), lw=1)
        else:
            ax.plot(it, y, lw=1)
        ax.set_title(title)
        ax.set_xlabel("iteration")
    fig.suptitle(f"p = {trace.p:g}, status {trace.status}")
    fig.tight_layout()
    _save(fig, path)
    plt.close(fig)


def plot_outlines(snapshots, path):
    """Planar body outlines, one curve per snapshot step."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 5))
    for step, K in snapshots:
        if not isinstance(K, Body2D):
            continue
        x = K.boundary(K.grid.theta)
        x = np.vstack([x, x[:1]])
        ax.plot(x[:, 0], x[:, 1], lw=0.8, label=f"step {step}")
    ax.set_aspect("equal")
    ax.legend(fontsize=7, loc="upper right")
    fig.tight_layout()
    _save(fig, path)
    plt.close(fig)
