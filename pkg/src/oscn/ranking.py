"""Component filtering by similarity dominance and ranking by aggregated score."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .corpus import DatabaseView
from .search import QuerySet, SearchOutcome


@dataclass
class ComponentScore:
    component_id: int
    name: str
    total: float  # sum of per-file best similarities
    file_count: int
    per_file: list[float]  # aligned with the query's file order, zeros included


@dataclass
class TableCell:
    sim: float
    path: Optional[str]  # matched corpus file path, None when sim is 0


@dataclass
class ComponentReport:
    query_paths: list[str]
    full: list[ComponentScore]
    filtered: list[ComponentScore]
    table_components: list[ComponentScore]
    table: list[list[TableCell]]  # rows follow query_paths, columns table_components
    unmatched: list[str]

    @property
    def query_file_count(self) -> int:
        return len(self.query_paths)


def dominates(s1: Sequence[float], s2: Sequence[float], size1: int, size2: int) -> bool:
    """Whether the first component is a strictly better candidate.

    Either it is at least as similar on every query file and strictly better
    on one, or the similarity vectors are tied and it is the smaller
    component (likely a simpler version).
    """
    ge_all = all(a >= b for a, b in zip(s1, s2))
    if not ge_all:
        return False
    if any(a > b for a, b in zip(s1, s2)):
        return True
    return size1 < size2


def select_representatives(scores: Sequence[ComponentScore]) -> list[ComponentScore]:
    """Non-dominated components, in the input order.

    Vectors are compared only on query files where some component scored
    above zero; all-zero columns cannot change the relation.
    """
    if not scores:
        return []
    active = [qi for qi in range(len(scores[0].per_file))
              if any(cs.per_file[qi] > 0.0 for cs in scores)]
    vectors = [[cs.per_file[qi] for qi in active] for cs in scores]
    kept = []
    for i, cs in enumerate(scores):
        dominated = any(
            j != i and dominates(vectors[j], vectors[i], scores[j].file_count, cs.file_count)
            for j in range(len(scores)))
        if not dominated:
            kept.append(cs)
    return kept


def rank_scores(scores: Sequence[ComponentScore]) -> list[ComponentScore]:
    """Descending by total score; ties go to the smaller, then lexically earlier name."""
    return sorted(scores, key=lambda cs: (-cs.total, cs.file_count, cs.name))


def component_scores(outcome: SearchOutcome, query: QuerySet,
                     view: DatabaseView) -> list[ComponentScore]:
    scores = []
    for cid in sorted(outcome.components):
        comp = view.component(cid)
        per_file = [outcome.scores.get((qi, cid), 0.0) for qi in range(len(query.files))]
        scores.append(ComponentScore(
            component_id=cid, name=comp.name, total=sum(per_file),
            file_count=comp.file_count, per_file=per_file))
    return scores


def build_report(outcome: SearchOutcome, query: QuerySet, view: DatabaseView,
                 top_n: int = 5) -> ComponentReport:
    """Assemble the ranked lists, the similarity table, and the unmatched files.

    The table covers the top `top_n` filtered components; every query file
    gets a row even when all its cells are zero.
    """
    ranked = rank_scores(component_scores(outcome, query, view))
    filtered_ids = {cs.component_id for cs in select_representatives(ranked)}
    filtered = [cs for cs in ranked if cs.component_id in filtered_ids]
    table_components = filtered[:top_n] if top_n > 0 else []

    table: list[list[TableCell]] = []
    for qi, qf in enumerate(query.files):
        row = []
        for cs in table_components:
            sim = cs.per_file[qi]
            match = outcome.matches.get((qi, cs.component_id))
            row.append(TableCell(sim=sim, path=match.path if match and sim > 0.0 else None))
        table.append(row)

    unmatched = [qf.path for qi, qf in enumerate(query.files)
                 if all(cs.per_file[qi] == 0.0 for cs in ranked)]
    return ComponentReport(
        query_paths=[qf.path for qf in query.files],
        full=ranked,
        filtered=filtered,
        table_components=table_components,
        table=table,
        unmatched=unmatched,
    )
