"""Render a component report as text, JSON, or a TSV similarity table."""

from __future__ import annotations

import json
from typing import Optional

from .ranking import ComponentReport, ComponentScore
from .search import SearchStats


def format_score(value: float) -> str:
    """Aggregated scores print with up to three decimals, trailing zeros dropped."""
    text = f"{value:.3f}".rstrip("0").rstrip(".")
    return text if text else "0"


def _component_line(cs: ComponentScore, name_width: int, query_count: int) -> str:
    name = cs.name.ljust(name_width)
    return f"{name}  ({format_score(cs.total)} / {query_count})  {cs.file_count} files"


def render_text(report: ComponentReport) -> str:
    lines: list[str] = []
    nq = report.query_file_count
    if not report.full:
        lines.append("No components found.")
    else:
        width = max(len(cs.name) for cs in report.full)
        lines.append("Components (filtered):")
        for cs in report.filtered:
            lines.append("  " + _component_line(cs, width, nq))
        lines.append("")
        lines.append("All components:")
        for cs in report.full:
            lines.append("  " + _component_line(cs, width, nq))
        if report.table_components:
            lines.append("")
            lines.append(f"Similarity table (top {len(report.table_components)} filtered components):")
            lines.extend(_text_table(report))
    lines.append("")
    lines.append(f"Unmatched query files ({len(report.unmatched)}):")
    for path in report.unmatched:
        lines.append(f"  {path}")
    return "\n".join(lines) + "\n"


def _cell_text(sim: float, path: Optional[str]) -> str:
    return f"{sim:.3f} ({path})" if path else f"{sim:.3f}"


def _text_table(report: ComponentReport) -> list[str]:
    header = ["Q"] + [cs.name for cs in report.table_components]
    rows = [header]
    for path, cells in zip(report.query_paths, report.table):
        rows.append([path] + [_cell_text(c.sim, c.path) for c in cells])
    rows.append(["S_Q(C)"] + [f"{cs.total:.3f}" for cs in report.table_components])
    rows.append(["|C|"] + [str(cs.file_count) for cs in report.table_components])
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    return ["  " + "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
            for row in rows]


def render_tsv(report: ComponentReport) -> str:
    """The similarity table alone: one row per query file, footer rows for
    the aggregated score and component size."""
    lines = ["\t".join(["Q"] + [cs.name for cs in report.table_components])]
    for path, cells in zip(report.query_paths, report.table):
        lines.append("\t".join([path] + [_cell_text(c.sim, c.path) for c in cells]))
    lines.append("\t".join(["S_Q(C)"] + [f"{cs.total:.3f}" for cs in report.table_components]))
    lines.append("\t".join(["|C|"] + [str(cs.file_count) for cs in report.table_components]))
    return "\n".join(lines) + "\n"


def _score_entry(cs: ComponentScore) -> dict:
    return {"name": cs.name, "score": cs.total, "file_count": cs.file_count}


def report_to_dict(report: ComponentReport, query: dict, params: dict,
                   stats: Optional[SearchStats]) -> dict:
    payload = {
        "query": query,
        "params": params,
        "full": [_score_entry(cs) for cs in report.full],
        "filtered": [_score_entry(cs) for cs in report.filtered],
        "table": {
            "components": [cs.name for cs in report.table_components],
            "rows": [
                {"query": path,
                 "cells": [{"sim": c.sim, "path": c.path} for c in cells]}
                for path, cells in zip(report.query_paths, report.table)
            ],
            "scores": [cs.total for cs in report.table_components],
            "file_counts": [cs.file_count for cs in report.table_components],
        },
        "unmatched": list(report.unmatched),
        "stats": {
            "pairs_considered": stats.pairs_considered,
            "size_pruned": stats.size_pruned,
            "estimate_pruned": stats.estimate_pruned,
            "exact_computed": stats.exact_computed,
        } if stats is not None else None,
    }
    return payload


def render_json(payload: dict) -> str:
    return json.dumps(payload, indent=2) + "\n"
