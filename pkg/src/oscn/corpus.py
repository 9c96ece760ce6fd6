"""Component ingest, content-hash deduplication, and the on-disk signature database.

A database is one binary file: a fixed header (magic "OSCN", version, k, b,
seed, then the k hash-parameter pairs as little-endian 64-bit words), a
string table for names and paths, the per-file records, the packed
signature block, and a whole-file SHA-256 checksum in the trailer. All
iteration orders are deterministic, so indexing the same inputs with the
same seed twice produces byte-identical files.
"""

from __future__ import annotations

import fnmatch
import hashlib
import struct
import tarfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator, Optional, Union

import numpy as np

from . import minhash
from .errors import DuplicateComponentError, FormatError, IngestError, IntegrityError
from .lexer import Language, SourceFile, Trigram, language_for_path, tokenize, trigrams
from .minhash import DEFAULT_K, HashFamily, FileSignature

MAGIC = b"OSCN"
DB_VERSION = 1
DEFAULT_SEED = 1

_FLAG_STORE_TOKENS = 1
_DIGEST_LEN = 20
_CHECKSUM_LEN = 32
_MASK64 = 0xFFFFFFFFFFFFFFFF


@dataclass
class Component:
    component_id: int
    name: str
    file_refs: list[tuple[int, str]] = field(default_factory=list)  # (file_id, path)

    @property
    def file_count(self) -> int:
        return len(self.file_refs)


@dataclass(eq=False)
class FileEntry:
    file_id: int
    digest: bytes
    trigram_count: int
    bases: np.ndarray  # sorted unique uint64 base hashes of the trigram set
    owners: list[tuple[int, str]] = field(default_factory=list)  # (component_id, path)
    tokens: Optional[list[str]] = None  # retained only when the db stores tokens


@dataclass
class IngestSummary:
    component: str
    files_seen: int = 0
    files_indexed: int = 0
    files_deduped: int = 0
    files_skipped: int = 0
    files_flagged: int = 0  # decoded leniently (invalid byte sequences replaced)
    errors: list[tuple[str, str]] = field(default_factory=list)

    @property
    def error_count(self) -> int:
        return len(self.errors)


class SignatureDatabase:
    """All indexed components and file signatures, resident in memory."""

    def __init__(self, family: HashFamily, store_tokens: bool = False):
        self.family = family
        self.store_tokens = store_tokens
        self.components: list[Component] = []
        self.entries: list[FileEntry] = []
        self._sig_rows: list[np.ndarray] = []
        self._sig_block: Optional[np.ndarray] = None
        self._tri_counts: Optional[np.ndarray] = None
        self._by_digest: dict[bytes, int] = {}
        self._by_name: dict[str, int] = {}

    @classmethod
    def create(cls, seed: int = DEFAULT_SEED, k: int = DEFAULT_K,
               store_tokens: bool = False) -> "SignatureDatabase":
        return cls(minhash.make_family(seed & _MASK64, k), store_tokens=store_tokens)

    def __len__(self) -> int:
        return len(self.entries)

    def component_by_name(self, name: str) -> Optional[Component]:
        cid = self._by_name.get(name)
        return self.components[cid] if cid is not None else None

    def entry_by_digest(self, digest: bytes) -> Optional[FileEntry]:
        fid = self._by_digest.get(digest)
        return self.entries[fid] if fid is not None else None

    def sig_block(self) -> np.ndarray:
        """(n, k // 64) uint64 matrix of all signature bit vectors."""
        if self._sig_block is None:
            if self._sig_rows:
                self._sig_block = np.vstack(self._sig_rows)
            else:
                self._sig_block = np.empty((0, self.family.words), dtype=np.uint64)
        return self._sig_block

    def tri_counts(self) -> np.ndarray:
        if self._tri_counts is None:
            self._tri_counts = np.asarray([e.trigram_count for e in self.entries], dtype=np.int64)
        return self._tri_counts

    def signature_of(self, file_id: int) -> FileSignature:
        entry = self.entries[file_id]
        return FileSignature(bits=self.sig_block()[file_id], trigram_count=entry.trigram_count,
                             digest=entry.digest, family_key=self.family.key)

    def trigram_set_of(self, file_id: int) -> frozenset[Trigram]:
        """Rebuild the trigram 4-tuples from the stored token stream."""
        entry = self.entries[file_id]
        if entry.tokens is None:
            raise IngestError("database was built without --store-tokens")
        return trigrams(entry.tokens)

    def view(self) -> "DatabaseView":
        return DatabaseView(self)

    def _invalidate(self) -> None:
        self._sig_block = None
        self._tri_counts = None

    def _add_entry(self, digest: bytes, trigram_count: int, bases: np.ndarray,
                   bits: np.ndarray, tokens: Optional[list[str]]) -> FileEntry:
        entry = FileEntry(file_id=len(self.entries), digest=digest,
                          trigram_count=trigram_count, bases=bases, tokens=tokens)
        self.entries.append(entry)
        self._sig_rows.append(bits)
        self._by_digest[digest] = entry.file_id
        self._invalidate()
        return entry


class DatabaseView:
    """A read-only slice of a database with some components hidden.

    File entries remain visible while at least one owner is visible; their
    hidden owners never reach search results. The underlying database is
    untouched.
    """

    def __init__(self, db: SignatureDatabase, hidden: frozenset[int] = frozenset()):
        self.db = db
        self.hidden = hidden
        self._candidates: Optional[tuple[np.ndarray, np.ndarray, np.ndarray]] = None

    @property
    def family(self) -> HashFamily:
        return self.db.family

    def is_visible(self, component_id: int) -> bool:
        return component_id not in self.hidden

    def visible_components(self) -> list[Component]:
        return [c for c in self.db.components if c.component_id not in self.hidden]

    def component(self, component_id: int) -> Component:
        return self.db.components[component_id]

    def owners(self, file_id: int) -> list[tuple[int, str]]:
        return [(cid, path) for cid, path in self.db.entries[file_id].owners
                if cid not in self.hidden]

    def entry(self, file_id: int) -> FileEntry:
        return self.db.entries[file_id]

    def candidates(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(file_ids, trigram_counts, signature_rows) of searchable entries.

        Zero-trigram files are indexed but are never search candidates; this
        keeps the size prune sound for any threshold in (0, 1].
        """
        if self._candidates is None:
            counts = self.db.tri_counts()
            if self.hidden:
                visible = np.asarray(
                    [any(cid not in self.hidden for cid, _ in e.owners) for e in self.db.entries],
                    dtype=bool) if self.db.entries else np.empty(0, dtype=bool)
                keep = visible & (counts > 0)
            else:
                keep = counts > 0
            ids = np.nonzero(keep)[0]
            self._candidates = (ids, counts[ids], self.db.sig_block()[ids])
        return self._candidates


def exclude_components(db: SignatureDatabase, patterns: Iterable[str]) -> DatabaseView:
    """View of the database without components whose names match any glob pattern."""
    patterns = list(patterns)
    if not patterns:
        return db.view()
    hidden = frozenset(
        c.component_id for c in db.components
        if any(fnmatch.fnmatchcase(c.name, pat) for pat in patterns))
    return DatabaseView(db, hidden)


FileRecord = tuple[str, Callable[[], bytes]]


def _walk_directory(root: Path) -> Iterator[FileRecord]:
    paths = sorted((p for p in root.rglob("*") if p.is_file()),
                   key=lambda p: p.relative_to(root).as_posix())
    for p in paths:
        rel = p.relative_to(root).as_posix()
        yield rel, p.read_bytes


def _walk_tarball(archive: Path) -> Iterator[FileRecord]:
    tf = tarfile.open(archive, "r:gz")
    members = sorted((m for m in tf.getmembers() if m.isfile()), key=lambda m: m.name)

    def loader(member: tarfile.TarInfo) -> Callable[[], bytes]:
        def load() -> bytes:
            fh = tf.extractfile(member)
            if fh is None:
                raise OSError(f"cannot extract {member.name}")
            with fh:
                return fh.read()
        return load

    for m in members:
        yield m.name, loader(m)


def ingest_component(db: SignatureDatabase, name: str,
                     root: Union[str, Path]) -> IngestSummary:
    """Index one component from a directory tree or a .tar.gz archive.

    Files already present under another component (same content digest) are
    only recorded as additional owners. Per-file read problems are collected
    in the summary; only an unreadable root is fatal.
    """
    root = Path(root)
    if root.is_dir():
        records: Iterable[FileRecord] = _walk_directory(root)
    elif root.is_file() and root.name.endswith((".tar.gz", ".tgz")):
        try:
            records = list(_walk_tarball(root))
        except (tarfile.TarError, OSError) as exc:
            raise IngestError(f"cannot read archive {root}: {exc}") from exc
    else:
        raise IngestError(f"component root {root} is neither a directory nor a .tar.gz archive")
    return ingest_file_records(db, name, records)


def ingest_file_records(db: SignatureDatabase, name: str,
                        records: Iterable[FileRecord]) -> IngestSummary:
    """Index a component given as (relative path, bytes loader) records."""
    if name in db._by_name:
        raise DuplicateComponentError(f"component {name!r} already indexed")
    component = Component(component_id=len(db.components), name=name)
    db.components.append(component)
    db._by_name[name] = component.component_id
    summary = IngestSummary(component=name)
    for rel_path, load in records:
        summary.files_seen += 1
        if language_for_path(rel_path) is Language.UNKNOWN:
            summary.files_skipped += 1
            continue
        try:
            content = load()
        except OSError as exc:
            summary.errors.append((rel_path, str(exc)))
            continue
        digest = hashlib.sha1(content).digest()
        existing = db._by_digest.get(digest)
        if existing is not None:
            entry = db.entries[existing]
        else:
            seq = tokenize(SourceFile.from_bytes(rel_path, content))
            if seq.had_decode_errors:
                summary.files_flagged += 1
            trigram_set = trigrams(seq)
            bases = minhash.base_hash_array(trigram_set)
            if len(bases) == 0:
                bits = np.zeros(db.family.words, dtype=np.uint64)
            else:
                bits = minhash.signature_bit_matrix(db.family, bases[None, :])[0]
            entry = db._add_entry(digest, len(trigram_set), bases, bits,
                                  tokens=seq.tokens if db.store_tokens else None)
            summary.files_indexed += 1
        if existing is not None:
            summary.files_deduped += 1
        entry.owners.append((component.component_id, rel_path))
        component.file_refs.append((entry.file_id, rel_path))
    return summary


class _Writer:
    def __init__(self) -> None:
        self.buf = bytearray()

    def raw(self, data: bytes) -> None:
        self.buf += data

    def u32(self, value: int) -> None:
        self.buf += struct.pack("<I", value)

    def u64(self, value: int) -> None:
        self.buf += struct.pack("<Q", value)

    def u64_array(self, values: np.ndarray) -> None:
        self.buf += np.ascontiguousarray(values, dtype="<u8").tobytes()


class _Reader:
    def __init__(self, data: bytes) -> None:
        self.data = data
        self.pos = 0

    def _take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise IntegrityError("database file is truncated")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def raw(self, n: int) -> bytes:
        return self._take(n)

    def u32(self) -> int:
        return struct.unpack("<I", self._take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self._take(8))[0]

    def u64_array(self, count: int) -> np.ndarray:
        raw = self._take(count * 8)
        return np.frombuffer(raw, dtype="<u8").astype(np.uint64)


class _StringTable:
    def __init__(self) -> None:
        self.index: dict[str, int] = {}
        self.strings: list[str] = []

    def intern(self, s: str) -> int:
        sid = self.index.get(s)
        if sid is None:
            sid = len(self.strings)
            self.index[s] = sid
            self.strings.append(s)
        return sid


def save_database(db: SignatureDatabase, path: Union[str, Path]) -> None:
    """Serialize the database; the trailer checksum covers every preceding byte."""
    table = _StringTable()
    for comp in db.components:
        table.intern(comp.name)
        for _, ref_path in comp.file_refs:
            table.intern(ref_path)
    if db.store_tokens:
        for entry in db.entries:
            for token in entry.tokens or []:
                table.intern(token)

    w = _Writer()
    w.raw(MAGIC)
    w.u32(DB_VERSION)
    w.u32(db.family.k)
    w.u32(minhash.SIGNATURE_BITS_PER_SAMPLE)
    w.u32(_FLAG_STORE_TOKENS if db.store_tokens else 0)
    w.u64(db.family.seed & _MASK64)
    params = np.empty(db.family.k * 2, dtype=np.uint64)
    params[0::2] = db.family.a
    params[1::2] = db.family.b
    w.u64_array(params)

    blobs = [s.encode("utf-8") for s in table.strings]
    w.u64(len(blobs))
    for blob in blobs:
        w.u32(len(blob))
    for blob in blobs:
        w.raw(blob)

    w.u64(len(db.components))
    for comp in db.components:
        w.u64(table.index[comp.name])
        w.u64(len(comp.file_refs))
        for file_id, ref_path in comp.file_refs:
            w.u64(file_id)
            w.u64(table.index[ref_path])

    w.u64(len(db.entries))
    for entry in db.entries:
        w.raw(entry.digest)
        w.u64(entry.trigram_count)
        w.u64(len(entry.bases))
        w.u64_array(entry.bases)
        if db.store_tokens:
            tokens = entry.tokens or []
            w.u64(len(tokens))
            for token in tokens:
                w.u64(table.index[token])

    w.u64_array(db.sig_block().reshape(-1))
    payload = bytes(w.buf)
    Path(path).write_bytes(payload + hashlib.sha256(payload).digest())


def load_database(path: Union[str, Path]) -> SignatureDatabase:
    """Read a database file back; the header alone decides k, b and seed."""
    data = Path(path).read_bytes()
    if len(data) < 4 or data[:4] != MAGIC:
        raise FormatError(f"{path} is not a signature database (bad magic)")
    if len(data) < 4 + 4 + _CHECKSUM_LEN:
        raise IntegrityError("database file is truncated")
    payload, checksum = data[:-_CHECKSUM_LEN], data[-_CHECKSUM_LEN:]
    version = struct.unpack("<I", data[4:8])[0]
    if version != DB_VERSION:
        raise FormatError(f"unsupported database version {version}")
    if hashlib.sha256(payload).digest() != checksum:
        raise IntegrityError("database checksum mismatch (corrupt or truncated file)")

    r = _Reader(payload)
    r.raw(4 + 4)  # magic + version, already validated
    k = r.u32()
    bits_per_sample = r.u32()
    flags = r.u32()
    seed = r.u64()
    if bits_per_sample != minhash.SIGNATURE_BITS_PER_SAMPLE:
        raise FormatError(f"unsupported signature sample width b={bits_per_sample}")
    if k <= 0 or k % 64 != 0:
        raise FormatError(f"header k={k} is not a positive multiple of 64")
    params = r.u64_array(k * 2)
    family = minhash.from_params(seed, k, params[0::2].copy(), params[1::2].copy())
    store_tokens = bool(flags & _FLAG_STORE_TOKENS)

    n_strings = r.u64()
    lengths = [r.u32() for _ in range(n_strings)]
    strings = [r.raw(n).decode("utf-8") for n in lengths]

    db = SignatureDatabase(family, store_tokens=store_tokens)
    n_components = r.u64()
    refs: list[list[tuple[int, int]]] = []
    for cid in range(n_components):
        name = strings[r.u64()]
        comp = Component(component_id=cid, name=name)
        n_refs = r.u64()
        refs.append([(r.u64(), r.u64()) for _ in range(n_refs)])
        db.components.append(comp)
        db._by_name[name] = cid

    n_entries = r.u64()
    for fid in range(n_entries):
        digest = r.raw(_DIGEST_LEN)
        trigram_count = r.u64()
        n_bases = r.u64()
        bases = r.u64_array(n_bases)
        tokens: Optional[list[str]] = None
        if store_tokens:
            tokens = [strings[r.u64()] for _ in range(r.u64())]
        entry = FileEntry(file_id=fid, digest=digest, trigram_count=trigram_count,
                          bases=bases, tokens=tokens)
        db.entries.append(entry)
        db._by_digest[digest] = fid

    block = r.u64_array(n_entries * family.words).reshape(n_entries, family.words)
    if r.pos != len(payload):
        raise IntegrityError("trailing bytes after signature block")
    db._sig_rows = [block[i] for i in range(n_entries)]
    db._sig_block = block

    for cid, comp_refs in enumerate(refs):
        comp = db.components[cid]
        for file_id, path_sid in comp_refs:
            if file_id >= n_entries:
                raise IntegrityError("component references a missing file entry")
            ref_path = strings[path_sid]
            comp.file_refs.append((file_id, ref_path))
            db.entries[file_id].owners.append((cid, ref_path))
    return db
