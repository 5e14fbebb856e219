"""Matplotlib rendering of report data to PNG bytes.

The analysis stages emit plot-ready CSV/JSON; this module turns the same
in-memory structures into figures written alongside them. Rendering is
deterministic: Agg backend, fixed geometry, seeded jitter, and the PNG
Software tag stripped, so report bundles stay byte-reproducible.
"""

from __future__ import annotations

import csv
import io
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from advforecast.scoring import EmpiricalCdf

_FIGSIZE = (6.0, 4.5)
_DPI = 120

_KIND_COLORS = {
    "direct-pA": "black",
    "direct-pD": "dimgray",
    "EUM": "tab:red",
    "ARA": "tab:blue",
    "ARU": "tab:green",
    "MNL": "tab:orange",
}


def _png_bytes(fig) -> bytes:
    buf = io.BytesIO()
    fig.savefig(buf, format="png", dpi=_DPI, metadata={"Software": None})
    plt.close(fig)
    return buf.getvalue()


def scatter_png(
    rows: Sequence[tuple[str, str, float, float]],
    title: str,
    jitter: float = 0.012,
) -> bytes:
    """Direct judgment vs. decomposition gap, with inconsistent regions shaded.

    Grid responses overlap heavily, so points get a small seeded jitter.
    """
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.axhspan(0.5, 1.0, xmax=0.5, facecolor="mistyrose", zorder=0)
    ax.axhspan(0.0, 0.5, xmin=0.5, facecolor="mistyrose", zorder=0)
    gaps = np.array([r[2] for r in rows])
    directs = np.array([r[3] for r in rows])
    rng = np.random.Generator(np.random.Philox(key=0))
    gaps = gaps + rng.uniform(-jitter, jitter, size=gaps.size)
    directs = directs + rng.uniform(-jitter, jitter, size=directs.size)
    ax.scatter(gaps, directs, s=14, alpha=0.6, color="tab:blue", edgecolors="none", zorder=2)
    ax.axhline(0.5, color="gray", lw=0.8)
    ax.axvline(0.0, color="gray", lw=0.8)
    ax.set_xlim(-1.05, 1.05)
    ax.set_ylim(-0.05, 1.05)
    ax.set_xlabel("success probability minus acting threshold")
    ax.set_ylabel("direct probability of acting")
    ax.set_title(title)
    fig.tight_layout()
    return _png_bytes(fig)


def cdf_png(kinds: Mapping[str, EmpiricalCdf], title: str) -> bytes:
    """Step plot of score CDFs, one line per forecast kind.

    Large Monte Carlo samples are drawn on the 0.001 emission grid; true
    steps only show when the sample has few distinct values.
    """
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for kind in sorted(kinds):
        cdf = kinds[kind]
        points = cdf.step_points() if cdf.n <= 2000 else cdf.grid_points(0.001)
        xs = [0.0] + [x for x, _ in points] + [1.0]
        fs = [0.0] + [f for _, f in points] + [1.0]
        style = "-" if kind.startswith("direct") else "--"
        ax.step(xs, fs, where="post", label=kind, linestyle=style,
                color=_KIND_COLORS.get(kind), lw=1.4)
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1.02)
    ax.set_xlabel("Brier score")
    ax.set_ylabel("cumulative fraction")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _png_bytes(fig)


def forest_png_from_csv(intervals_csv_text: str, title: str) -> bytes:
    """Forest plot of paired-difference credible intervals."""
    reader = csv.DictReader(io.StringIO(intervals_csv_text))
    rows = list(reader)
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ys = range(len(rows), 0, -1)
    for y, row in zip(ys, rows):
        mean, lo, hi = float(row["mean"]), float(row["lo"]), float(row["hi"])
        ax.plot([lo, hi], [y, y], color="tab:blue", lw=2)
        ax.plot([mean], [y], marker="o", color="tab:blue")
    ax.axvline(0.0, color="gray", lw=0.8, linestyle=":")
    ax.set_yticks(list(ys))
    ax.set_yticklabels([row["comparison"] for row in rows], fontsize=8)
    ax.set_xlabel("mean Brier score difference")
    ax.set_title(title)
    fig.tight_layout()
    return _png_bytes(fig)


def surface_png(rows: Sequence[tuple[float, float, float]], sigma2: float) -> bytes:
    """Heat map of the probit recomposition over the (p_B, p_C) grid."""
    bs = sorted({r[0] for r in rows})
    cs = sorted({r[1] for r in rows})
    grid = np.empty((len(cs), len(bs)))
    b_index = {b: i for i, b in enumerate(bs)}
    c_index = {c: i for i, c in enumerate(cs)}
    for b, c, p in rows:
        grid[c_index[c], b_index[b]] = p
    fig, ax = plt.subplots(figsize=(5.4, 4.5))
    mesh = ax.pcolormesh(bs, cs, grid, vmin=0.0, vmax=1.0, cmap="RdYlBu", shading="nearest")
    fig.colorbar(mesh, ax=ax, label="recomposed probability")
    ax.set_xlabel("acting threshold (status-quo utility)")
    ax.set_ylabel("success probability")
    ax.set_title(f"probit recomposition, sigma2={sigma2:g}")
    fig.tight_layout()
    return _png_bytes(fig)
