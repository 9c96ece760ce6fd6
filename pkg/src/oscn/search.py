"""Query execution: the pruned per-file scan and the exact-digest baseline.

A query file is compared against every candidate corpus file through three
stages: a trigram-count ratio bound that can never reject a qualifying
pair, the bit-signature estimate with a safety margin, and finally the
exact trigram Jaccard. Components owning any qualifying file collect the
best per-query-file similarity.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from . import minhash
from .corpus import DatabaseView
from .errors import ConfigError, SignatureMismatchError
from .lexer import (Language, SourceFile, Trigram, jaccard, language_for_path,
                    tokenize, trigrams)
from .minhash import FileSignature, HashFamily


@dataclass(frozen=True)
class SearchParams:
    th: float = 0.9
    m: float = 0.1

    def __post_init__(self) -> None:
        if not (0.0 < self.th <= 1.0):
            raise ConfigError(f"threshold must be in (0, 1], got {self.th}")
        if self.m < 0.0:
            raise ConfigError(f"estimator margin must be >= 0, got {self.m}")


@dataclass
class QueryFile:
    path: str
    tokens: list[str]
    trigram_set: frozenset[Trigram]
    bases: np.ndarray  # sorted unique uint64
    signature: FileSignature


@dataclass
class QuerySet:
    files: list[QueryFile] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)  # unsupported or unreadable

    def __len__(self) -> int:
        return len(self.files)


@dataclass
class SearchStats:
    pairs_considered: int = 0
    size_pruned: int = 0
    estimate_pruned: int = 0
    exact_computed: int = 0

    def merge(self, other: "SearchStats") -> None:
        self.pairs_considered += other.pairs_considered
        self.size_pruned += other.size_pruned
        self.estimate_pruned += other.estimate_pruned
        self.exact_computed += other.exact_computed


@dataclass(frozen=True)
class Match:
    file_id: int
    path: str  # path of the matched file within the owning component
    sim: float


@dataclass
class SearchOutcome:
    components: set[int] = field(default_factory=set)  # R
    scores: dict[tuple[int, int], float] = field(default_factory=dict)  # (q_idx, cid) -> S
    matches: dict[tuple[int, int], Match] = field(default_factory=dict)
    stats: SearchStats = field(default_factory=SearchStats)
    size_pruned_pairs: Optional[list[tuple[int, int]]] = None  # (q_idx, file_id), on request


def build_query_file(source: SourceFile, family: HashFamily) -> QueryFile:
    seq = tokenize(source)
    trigram_set = trigrams(seq)
    return QueryFile(
        path=source.path,
        tokens=seq.tokens,
        trigram_set=trigram_set,
        bases=minhash.base_hash_array(trigram_set),
        signature=minhash.build_signature(trigram_set, family, source.content),
    )


def build_query_set(root: Union[str, Path, None], family: HashFamily,
                    files: Optional[Iterable[Union[str, Path]]] = None) -> QuerySet:
    """Lex and sign the query files under a directory tree or an explicit list."""
    query = QuerySet()
    sources: list[SourceFile] = []
    if root is not None:
        root = Path(root)
        for p in sorted((p for p in root.rglob("*") if p.is_file()),
                        key=lambda p: p.relative_to(root).as_posix()):
            if language_for_path(p) is Language.UNKNOWN:
                query.skipped.append(p.relative_to(root).as_posix())
                continue
            sources.append(SourceFile.from_path(p, relative_to=root))
    for p in files or []:
        p = Path(p)
        if language_for_path(p) is Language.UNKNOWN:
            query.skipped.append(p.as_posix())
            continue
        sources.append(SourceFile.from_path(p))
    for source in sources:
        query.files.append(build_query_file(source, family))
    return query


def _check_family(query: QuerySet, view: DatabaseView) -> None:
    key = view.family.key
    for qf in query.files:
        if qf.signature.family_key != key:
            raise SignatureMismatchError(
                f"query file {qf.path!r} signed with family {qf.signature.family_key}, "
                f"database uses {key}")


def _intersection_size(a: np.ndarray, b: np.ndarray) -> int:
    """|a & b| for sorted unique uint64 arrays."""
    if len(a) == 0 or len(b) == 0:
        return 0
    if len(a) > len(b):
        a, b = b, a
    idx = np.searchsorted(b, a)
    inside = idx < len(b)
    return int(np.count_nonzero(b[idx[inside]] == a[inside]))


def _exact_similarity(qf: QueryFile, view: DatabaseView, file_id: int,
                      from_tokens: bool) -> float:
    if from_tokens:
        return jaccard(qf.trigram_set, view.db.trigram_set_of(file_id))
    bases = view.entry(file_id).bases
    inter = _intersection_size(qf.bases, bases)
    union = len(qf.bases) + len(bases) - inter
    return inter / union if union else 1.0


def _scan_query_file(q_idx: int, qf: QueryFile, view: DatabaseView,
                     params: SearchParams, from_tokens: bool,
                     collect_pruned: bool) -> SearchOutcome:
    out = SearchOutcome()
    if collect_pruned:
        out.size_pruned_pairs = []
    q_count = qf.signature.trigram_count
    if q_count == 0:
        return out
    ids, counts, block = view.candidates()
    out.stats.pairs_considered = len(ids)
    if len(ids) == 0:
        return out

    ratio = np.minimum(q_count, counts) / np.maximum(q_count, counts)
    size_ok = ratio >= params.th
    out.stats.size_pruned = int(np.count_nonzero(~size_ok))
    if collect_pruned:
        out.size_pruned_pairs.extend((q_idx, int(fid)) for fid in ids[~size_ok])
    if not size_ok.any():
        return out

    survivor_ids = ids[size_ok]
    estimates = minhash.estimate_similarity_block(
        qf.signature.bits, block[size_ok], view.family.k)
    estimate_ok = estimates >= params.th - params.m
    out.stats.estimate_pruned = int(np.count_nonzero(~estimate_ok))

    for fid in survivor_ids[estimate_ok]:
        fid = int(fid)
        out.stats.exact_computed += 1
        sim = _exact_similarity(qf, view, fid, from_tokens)
        if sim < params.th:
            continue
        for cid, owner_path in view.owners(fid):
            out.components.add(cid)
            key = (q_idx, cid)
            if sim > out.scores.get(key, 0.0):
                out.scores[key] = sim
                out.matches[key] = Match(file_id=fid, path=owner_path, sim=sim)
    return out


def component_search(query: QuerySet, view: DatabaseView, params: SearchParams,
                     from_tokens: bool = False, threads: int = 1,
                     collect_pruned: bool = False) -> SearchOutcome:
    """Find every component owning a file with similarity >= th to some query file.

    `from_tokens` switches the exact stage from stored base hashes to trigram
    tuples rebuilt from stored token streams (collision-free audit mode;
    requires a database indexed with tokens). `threads` fans query files out
    to a thread pool; results merge deterministically in query order.
    """
    _check_family(query, view)
    if from_tokens and not view.db.store_tokens:
        raise ConfigError("exact-from-tokens requested but the database stores no tokens")

    def scan(item: tuple[int, QueryFile]) -> SearchOutcome:
        q_idx, qf = item
        return _scan_query_file(q_idx, qf, view, params, from_tokens, collect_pruned)

    indexed = list(enumerate(query.files))
    if threads > 1 and len(indexed) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(scan, indexed))
    else:
        partials = [scan(item) for item in indexed]

    out = SearchOutcome()
    if collect_pruned:
        out.size_pruned_pairs = []
    for part in partials:
        out.components |= part.components
        out.scores.update(part.scores)
        out.matches.update(part.matches)
        out.stats.merge(part.stats)
        if collect_pruned and part.size_pruned_pairs:
            out.size_pruned_pairs.extend(part.size_pruned_pairs)
    return out


def baseline_search(query: QuerySet, view: DatabaseView) -> SearchOutcome:
    """Exact content-digest search: S(q, C) is 1 when C owns a byte-identical file."""
    out = SearchOutcome()
    for q_idx, qf in enumerate(query.files):
        entry = view.db.entry_by_digest(qf.signature.digest)
        if entry is None:
            continue
        for cid, owner_path in view.owners(entry.file_id):
            out.components.add(cid)
            key = (q_idx, cid)
            if out.scores.get(key, 0.0) < 1.0:
                out.scores[key] = 1.0
                out.matches[key] = Match(file_id=entry.file_id, path=owner_path, sim=1.0)
    return out


def baseline_digest(content: bytes) -> bytes:
    return hashlib.sha1(content).digest()


@dataclass(frozen=True)
class SimilarFile:
    file_id: int
    owners: tuple[tuple[int, str], ...]
    sim: float


def find_similar_files(qf: QueryFile, view: DatabaseView, params: SearchParams,
                       from_tokens: bool = False) -> list[SimilarFile]:
    """All corpus files with similarity >= th to one query file, best first."""
    if qf.signature.family_key != view.family.key:
        raise SignatureMismatchError(
            f"query file {qf.path!r} signed with family {qf.signature.family_key}, "
            f"database uses {view.family.key}")
    if from_tokens and not view.db.store_tokens:
        raise ConfigError("exact-from-tokens requested but the database stores no tokens")
    rows: list[SimilarFile] = []
    if qf.signature.trigram_count == 0:
        return rows
    ids, counts, block = view.candidates()
    if len(ids) == 0:
        return rows
    ratio = np.minimum(qf.signature.trigram_count, counts) / np.maximum(
        qf.signature.trigram_count, counts)
    size_ok = ratio >= params.th
    survivor_ids = ids[size_ok]
    estimates = minhash.estimate_similarity_block(qf.signature.bits, block[size_ok],
                                                  view.family.k)
    for fid in survivor_ids[estimates >= params.th - params.m]:
        fid = int(fid)
        sim = _exact_similarity(qf, view, fid, from_tokens)
        if sim < params.th:
            continue
        owners = tuple(view.owners(fid))
        if owners:
            rows.append(SimilarFile(file_id=fid, owners=owners, sim=sim))
    rows.sort(key=lambda r: (-r.sim, r.file_id))
    return rows
