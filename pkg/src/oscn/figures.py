"""Matplotlib renderings of a component report, written next to the text output."""

from __future__ import annotations

from pathlib import Path
from typing import Union

from .ranking import ComponentReport

_MAX_ANNOTATED_ROWS = 50
_MAX_BAR_COMPONENTS = 20


def render_report_figures(report: ComponentReport, outdir: Union[str, Path],
                          prefix: str = "report") -> list[Path]:
    """Write a similarity heatmap and a component score chart as PNG files.

    Returns the written paths; draws nothing for an empty report.
    """
    import numpy as np
    from matplotlib.figure import Figure

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    if report.table_components and report.query_paths:
        names = [cs.name for cs in report.table_components]
        matrix = np.array([[cell.sim for cell in row] for row in report.table])
        n_rows, n_cols = matrix.shape
        fig = Figure(figsize=(2.0 + 1.6 * n_cols, 1.6 + 0.32 * n_rows))
        ax = fig.add_subplot(1, 1, 1)
        im = ax.imshow(matrix, cmap="viridis", vmin=0.0, vmax=1.0, aspect="auto")
        ax.set_xticks(range(n_cols), labels=names, rotation=30, ha="right")
        ax.set_yticks(range(n_rows), labels=report.query_paths)
        ax.set_xlabel("component")
        ax.set_ylabel("query file")
        ax.set_title("best-match similarity per query file")
        if n_rows <= _MAX_ANNOTATED_ROWS:
            for i in range(n_rows):
                for j in range(n_cols):
                    color = "white" if matrix[i, j] < 0.6 else "black"
                    ax.text(j, i, f"{matrix[i, j]:.3f}", ha="center", va="center",
                            color=color, fontsize=8)
        fig.colorbar(im, ax=ax, label="similarity")
        path = outdir / f"{prefix}_similarity_table.png"
        fig.savefig(path, dpi=150, bbox_inches="tight")
        written.append(path)

    if report.filtered:
        top = report.filtered[:_MAX_BAR_COMPONENTS]
        names = [cs.name for cs in top]
        totals = [cs.total for cs in top]
        fig = Figure(figsize=(7.0, 1.2 + 0.4 * len(top)))
        ax = fig.add_subplot(1, 1, 1)
        positions = range(len(top))
        ax.barh(positions, totals, color="#3b6ea5")
        ax.set_yticks(positions, labels=names)
        ax.invert_yaxis()
        ax.set_xlim(0, max(report.query_file_count, 1))
        ax.axvline(report.query_file_count, color="grey", linewidth=1, linestyle="--")
        ax.set_xlabel(f"aggregated similarity (query has {report.query_file_count} files)")
        ax.set_title("filtered components by aggregated score")
        for pos, total in zip(positions, totals):
            ax.text(total, pos, f" {total:.3f}", va="center", fontsize=8)
        path = outdir / f"{prefix}_component_scores.png"
        fig.savefig(path, dpi=150, bbox_inches="tight")
        written.append(path)

    return written
