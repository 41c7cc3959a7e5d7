"""CSV and SVG emission.  CSV is the source of truth; SVG plots (rendered
with matplotlib) are diagnostics: log-log count scatters with fitted slopes
and the projection-bound region diagram for lines in the plane."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .capacity import region_curve
from .projection import ProjectionExperimentReport

__all__ = [
    "write_csv",
    "counts_csv_rows",
    "experiment_csv_rows",
    "plot_loglog",
    "plot_region_diagram",
    "emit_report",
]

_SVG_KW = dict(format="svg", metadata={"Date": None})
matplotlib.rcParams["svg.hashsalt"] = "dimprofiles"


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def write_csv(path: str, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def counts_csv_rows(pairs):
    """Rows `k,count` from (k, count) pairs."""
    return [(k, c) for k, c in pairs]


def experiment_csv_rows(report: ProjectionExperimentReport):
    """Rows `trial,seed,k,count_lo,count_hi,slope_upper`."""
    rows = []
    for idx, trial in enumerate(report.trials):
        for k, lo, hi in trial.counts:
            rows.append((idx, trial.seed, k, lo, hi, trial.slope_upper))
    return rows


def plot_loglog(path: str, series, title: str = "covering counts") -> None:
    """Scatter of log2 count against the scale exponent k, one trace per
    series, each annotated with its fitted slope.

    series: list of (label, pairs, slope) with pairs = [(k, log2count)].
    """
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for label, pairs, slope in series:
        ks = [p[0] for p in pairs]
        ys = [p[1] for p in pairs]
        (line,) = ax.plot(ks, ys, "o", ms=4, label=f"{label} (slope {slope:.3f})")
        if len(ks) >= 2:
            k0, y0 = ks[0], ys[0]
            ax.plot(
                [k0, ks[-1]],
                [y0, y0 + slope * (ks[-1] - k0)],
                "-",
                lw=1,
                color=line.get_color(),
                alpha=0.6,
            )
    ax.set_xlabel("scale exponent k  (r = 2^-k)")
    ax.set_ylabel("log2 covering count")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SVG_KW)
    plt.close(fig)


def plot_region_diagram(path: str, m: int = 1, n: int = 2) -> None:
    """The (upper box, Assouad) parameter plane for projections onto lines:
    where dimension is preserved, where the improved bound applies, where
    only the general bounds hold, and the infeasible half below the
    diagonal."""
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    x_hi = float(n)
    xs = np.linspace(0.0, float(m), 200)
    curve = [float(region_curve(float(x), m, n)) for x in xs]

    ax.plot([0, x_hi], [0, x_hi], "k-", lw=1)
    ax.plot([0, x_hi], [m, m], "k--", lw=0.8)
    ax.plot(xs, curve, "b-", lw=1.5, label="improvement threshold (2x+2)/(x+2)")

    ax.fill_between([0, x_hi], [0, 0], [0, x_hi], color="0.85")
    ax.text(1.45, 0.55, "infeasible\n(assouad < box)", fontsize=8, ha="center")
    ax.text(0.42, 0.55, "preserved:\nmin{m, box}", fontsize=8, ha="center")
    ax.text(0.35, 1.12, "improved bound", fontsize=8, ha="center")
    ax.text(0.8, 1.7, "general bounds only", fontsize=8, ha="center")

    ax.set_xlim(0, x_hi)
    ax.set_ylim(0, x_hi)
    ax.set_xlabel("upper box dimension")
    ax.set_ylabel("Assouad dimension")
    ax.set_title(f"projection bound regions (m={m}, n={n})")
    ax.legend(fontsize=8, loc="lower right")
    fig.tight_layout()
    fig.savefig(path, **_SVG_KW)
    plt.close(fig)


def emit_report(results: dict, outdir: str) -> list:
    """Write one CSV per experiment plus diagnostic SVGs; returns the paths.

    results maps a name to a dict with keys:
      'rows' + 'header' (CSV), optional 'series' (log-log plot input).
    Empty results produce a headers-only CSV and no SVG.
    """
    os.makedirs(outdir, exist_ok=True)
    written = []
    for name, payload in results.items():
        csv_path = os.path.join(outdir, f"{name}.csv")
        write_csv(csv_path, payload["header"], payload.get("rows", []))
        written.append(csv_path)
        series = payload.get("series")
        if series:
            svg_path = os.path.join(outdir, f"{name}.svg")
            plot_loglog(svg_path, series, title=name)
            written.append(svg_path)
    return written
