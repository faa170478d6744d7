"""Figure rendering for score tables and cutoff sweeps.

PNG files land in a figures/ directory next to the delimited output. The
delimited tables stay the byte-deterministic source of truth; figures are a
convenience view of the same rows.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .metrics import ScoreReport
from .truncation import BOTTOM, TOP, CurveRow

_METRIC_LABELS = {"mw": "MW", "ew": "EW", "tse": "TSE"}
_DPI = 150


def _save(fig, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def render_score_report(report: ScoreReport, outdir: Path) -> list[Path]:
    """Grouped bar chart of MW/EW/TSE means per construction."""
    constructions = [r.construction for r in report.rows]
    if not constructions:
        return []
    metrics = ("mw", "ew", "tse")
    width = 0.8 / len(metrics)
    fig, ax = plt.subplots(figsize=(max(6.0, 1.2 * len(constructions)), 4.0))
    xs = range(len(constructions))
    for i, metric in enumerate(metrics):
        values = [getattr(r, f"{metric}_mean") for r in report.rows]
        offsets = [x + (i - (len(metrics) - 1) / 2) * width for x in xs]
        heights = [v if v is not None else 0.0 for v in values]
        ax.bar(offsets, heights, width=width, label=_METRIC_LABELS[metric])
    ax.set_xticks(list(xs))
    ax.set_xticklabels(constructions, rotation=30, ha="right", fontsize=8)
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("score")
    ax.legend()
    fig.tight_layout()
    path = outdir / "score_by_construction.png"
    _save(fig, path)
    return [path]


def _rows_for(rows: Sequence[CurveRow], kind: str, metric: str) -> dict[str, list[CurveRow]]:
    out: dict[str, list[CurveRow]] = {}
    for row in rows:
        if row.kind == kind and row.metric == metric:
            out.setdefault(row.construction, []).append(row)
    for series in out.values():
        series.sort(key=lambda r: r.p)
    return out


def render_curves(rows: Sequence[CurveRow], outdir: Path) -> list[Path]:
    """Score-vs-cutoff curves plus coverage diagnostics, one figure per kind."""
    paths: list[Path] = []
    for kind in (TOP, BOTTOM):
        if not any(r.kind == kind for r in rows):
            continue

        fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.6), sharey=True)
        for ax, metric in zip(axes, ("ew", "mw")):
            for construction, series in sorted(_rows_for(rows, kind, metric).items()):
                pts = [(r.p, r.value) for r in series if r.value is not None]
                if pts:
                    ax.plot([p for p, _ in pts], [v for _, v in pts],
                            marker="o", markersize=3, label=construction)
            if kind == BOTTOM:
                ax.set_xscale("log")
            ax.set_xlabel(f"{kind} p (%)")
            ax.set_title(_METRIC_LABELS[metric])
            ax.set_ylim(0.0, 1.05)
        axes[0].set_ylabel("score")
        handles, labels = axes[0].get_legend_handles_labels()
        if handles:
            fig.legend(handles, labels, loc="lower center",
                       ncol=min(4, len(labels)), fontsize=7)
        fig.tight_layout(rect=(0, 0.12, 1, 1))
        path = outdir / f"curves_{kind}.png"
        _save(fig, path)
        paths.append(path)

        fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.6))
        seen = _rows_for(rows, kind, "ew")  # diagnostics repeat per metric row
        for construction, series in sorted(seen.items()):
            axes[0].plot([r.p for r in series], [r.mass_counted for r in series],
                         marker="o", markersize=3, label=construction)
            axes[1].plot([r.p for r in series], [r.invalid_proportion for r in series],
                         marker="o", markersize=3, label=construction)
        for ax, title in zip(axes, ("probability mass counted", "invalid template proportion")):
            if kind == BOTTOM:
                ax.set_xscale("log")
            ax.set_xlabel(f"{kind} p (%)")
            ax.set_title(title)
        axes[0].set_ylim(bottom=0.0)
        axes[1].set_ylim(0.0, 1.05)
        handles, labels = axes[0].get_legend_handles_labels()
        if handles:
            fig.legend(handles, labels, loc="lower center",
                       ncol=min(4, len(labels)), fontsize=7)
        fig.tight_layout(rect=(0, 0.12, 1, 1))
        path = outdir / f"diagnostics_{kind}.png"
        _save(fig, path)
        paths.append(path)
    return paths
