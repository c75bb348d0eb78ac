"""SVG renderings of pipeline artifacts.

The CSV artifacts are the contract; these plots are conveniences drawn from
them.  Missing artifacts are skipped with a warning instead of failing.
"""

from __future__ import annotations

import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

log = logging.getLogger(__name__)

matplotlib.rcParams["svg.hashsalt"] = "lcfpca"
_SAVE_OPTS = {"format": "svg", "metadata": {"Date": None}}
_COLORS = plt.rcParams["axes.prop_cycle"].by_key()["color"]


def _read(path: Path) -> tuple[list[str], np.ndarray] | None:
    if not path.exists():
        log.warning("artifact %s missing, skipping plot", path.name)
        return None
    from .pipeline import read_csv

    header, rows = read_csv(path)
    return header, rows


def _plot_mean_curves(out: Path) -> None:
    loaded = _read(out / "cluster_mean_curves.csv")
    if loaded is None:
        return
    header, rows = loaded
    data = np.asarray([[float(v) for v in row] for row in rows])
    phases = data[:, 0]
    n_clusters = (len(header) - 1) // 2
    fig, ax = plt.subplots(figsize=(7, 4))
    for c in range(n_clusters):
        mean = data[:, 1 + 2 * c]
        se = data[:, 2 + 2 * c]
        color = _COLORS[c % len(_COLORS)]
        ax.plot(phases, mean, color=color, label=f"cluster {c}")
        if np.all(np.isfinite(se)):
            ax.fill_between(phases, mean - se, mean + se, color=color,
                            alpha=0.3, linewidth=0)
    ax.set_xlabel("phase")
    ax.set_ylabel("flux")
    ax.legend()
    fig.savefig(out / "cluster_mean_curves.svg", **_SAVE_OPTS)
    plt.close(fig)


def _plot_score_matrix(out: Path) -> None:
    scores_loaded = _read(out / "scores.csv")
    labels_loaded = _read(out / "assignments.csv")
    if scores_loaded is None or labels_loaded is None:
        return
    header, rows = scores_loaded
    scores = np.asarray([[float(v) for v in row[1:]] for row in rows])
    label_map = {row[0]: int(row[1]) for row in labels_loaded[1]}
    labels = np.asarray([label_map[row[0]] for row in rows])
    m = scores.shape[1]
    fig, axes = plt.subplots(m, m, figsize=(2.2 * m, 2.2 * m),
                             squeeze=False)
    for i in range(m):
        for j in range(m):
            ax = axes[i][j]
            if i == j:
                ax.hist(scores[:, i], bins=30, color="gray")
            else:
                ax.scatter(scores[:, j], scores[:, i], s=3,
                           c=[_COLORS[l % len(_COLORS)] for l in labels])
            if i == m - 1:
                ax.set_xlabel(header[1 + j])
            if j == 0:
                ax.set_ylabel(header[1 + i])
            ax.tick_params(labelsize=6)
    fig.tight_layout()
    fig.savefig(out / "score_matrix.svg", **_SAVE_OPTS)
    plt.close(fig)


def _plot_histograms(out: Path) -> None:
    loaded = _read(out / "star_table.csv")
    if loaded is None:
        return
    header, rows = loaded
    labels = np.asarray([int(row[1]) for row in rows])
    clusters = sorted(set(labels.tolist()))
    for column in ("R", "B", "I", "B-R", "R-I"):
        idx = header.index(column)
        values = np.asarray([float(row[idx]) for row in rows])
        fig, axes = plt.subplots(1, len(clusters),
                                 figsize=(4 * len(clusters), 3),
                                 squeeze=False, sharex=True)
        bins = np.histogram_bin_edges(values, bins=30)
        for c in clusters:
            ax = axes[0][c]
            ax.hist(values[labels == c], bins=bins,
                    color=_COLORS[c % len(_COLORS)])
            ax.set_title(f"cluster {c}")
            ax.set_xlabel(column)
        fig.tight_layout()
        safe = column.replace("-", "minus")
        fig.savefig(out / f"hist_{safe}.svg", **_SAVE_OPTS)
        plt.close(fig)


def _plot_color_magnitude(out: Path) -> None:
    loaded = _read(out / "star_table.csv")
    if loaded is None:
        return
    header, rows = loaded
    labels = np.asarray([int(row[1]) for row in rows])
    r_mag = np.asarray([float(row[header.index("R")]) for row in rows])
    b_r = np.asarray([float(row[header.index("B-R")]) for row in rows])
    fig, ax = plt.subplots(figsize=(5, 5))
    for c in sorted(set(labels.tolist())):
        sel = labels == c
        ax.scatter(b_r[sel], r_mag[sel], s=5,
                   color=_COLORS[c % len(_COLORS)], label=f"cluster {c}")
    ax.invert_yaxis()  # brighter stars up
    ax.set_xlabel("B-R")
    ax.set_ylabel("R")
    ax.legend()
    fig.savefig(out / "color_magnitude.svg", **_SAVE_OPTS)
    plt.close(fig)


def emit_plots(out_dir: str | Path) -> list[Path]:
    """Render every plot whose source artifact exists; returns written paths."""
    out = Path(out_dir)
    _plot_mean_curves(out)
    _plot_score_matrix(out)
    _plot_histograms(out)
    _plot_color_magnitude(out)
    return sorted(set(out.glob("*.svg")))
