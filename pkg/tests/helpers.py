"""Shared fixture builders and brute-force oracles for the test suite."""

from __future__ import annotations

import random
from pathlib import Path

from oscn import (QuerySet, SignatureDatabase, SourceFile, ingest_file_records,
                  jaccard, tokenize, trigrams)


def tokens(prefix: str, n: int) -> list[str]:
    return [f"{prefix}{i:03d}" for i in range(n)]


def token_text(toks: list[str], per_line: int = 8) -> str:
    lines = [" ".join(toks[i:i + per_line]) for i in range(0, len(toks), per_line)]
    return "\n".join(lines) + "\n"


# --- the worked example corpus -------------------------------------------------
#
# Engineered similarities: two files sharing an n-token prefix and differing in
# one trailing token have trigram intersection n and union n + 6, so
# n = 14 gives 14/20 = 0.7 and n = 54 gives 54/60 = 0.9.

_PC = tokens("pc", 14)
_PH = tokens("ph", 54)
_QC = tokens("qc", 54)
_RC = tokens("rc", 30)
_SC = tokens("sc", 25)
_YX = tokens("yx", 20)

EXAMPLE_QUERY_FILES = {
    "P.c": token_text(_PC + ["pcq"]),
    "P.h": token_text(_PH + ["phq"]),
    "Q.c": token_text(_QC + ["qcq"]),
    "R.c": token_text(_RC),
    "S.c": token_text(_SC),
}

EXAMPLE_COMPONENTS = {
    "X-1.0": {
        "P.c": EXAMPLE_QUERY_FILES["P.c"],          # 1.0
        "P.h": token_text(_PH + ["pha"]),           # 0.9
        "Q.c": token_text(_QC + ["qca"]),           # 0.9
    },
    "X-1.1": {
        "P.c": token_text(_PC + ["pcx"]),           # 0.7
        "P.h": EXAMPLE_QUERY_FILES["P.h"],          # 1.0
        "Q.c": EXAMPLE_QUERY_FILES["Q.c"],          # 1.0
    },
    "Y-0.2": {
        "P.c": EXAMPLE_QUERY_FILES["P.c"],          # 1.0 (content shared with X-1.0)
        "P.h": token_text(_PH + ["phb"]),           # 0.9
        "Q.c": token_text(_QC + ["qcb"]),           # 0.9
        "R.c": EXAMPLE_QUERY_FILES["R.c"],          # 1.0
        "extra.c": token_text(_YX),                 # matches nothing
    },
}

# Table I, rows P.c, P.h, Q.c, R.c, S.c
EXAMPLE_SCORES = {
    "X-1.0": [1.0, 0.9, 0.9, 0.0, 0.0],
    "X-1.1": [0.7, 1.0, 1.0, 0.0, 0.0],
    "Y-0.2": [1.0, 0.9, 0.9, 1.0, 0.0],
}


def write_tree(root: Path, files: dict[str, str]) -> Path:
    for rel, text in files.items():
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    return root


def write_example_corpus(base: Path) -> tuple[dict[str, Path], Path]:
    component_dirs = {}
    for name, files in EXAMPLE_COMPONENTS.items():
        component_dirs[name] = write_tree(base / name.replace(".", "_"), files)
    query_dir = write_tree(base / "query", EXAMPLE_QUERY_FILES)
    return component_dirs, query_dir


def example_database(seed: int = 7, store_tokens: bool = False) -> SignatureDatabase:
    """The worked-example corpus ingested from in-memory records."""
    db = SignatureDatabase.create(seed=seed, store_tokens=store_tokens)
    for name, files in EXAMPLE_COMPONENTS.items():
        records = [(rel, (lambda t=text: t.encode("utf-8"))) for rel, text in files.items()]
        ingest_file_records(db, name, records)
    return db


# --- randomized corpora with mutation-generated near-duplicates -----------------

def random_tokens(rng: random.Random, vocab: list[str], length: int) -> list[str]:
    return [rng.choice(vocab) for _ in range(length)]


def mutate_tokens(rng: random.Random, toks: list[str], vocab: list[str],
                  rate: float) -> list[str]:
    out = []
    for tok in toks:
        roll = rng.random()
        if roll < rate / 3:
            continue  # delete
        if roll < 2 * rate / 3:
            out.append(rng.choice(vocab))  # substitute
            continue
        out.append(tok)
        if roll < rate:
            out.append(rng.choice(vocab))  # insert after
    if not out:
        out = [rng.choice(vocab)]
    return out


def make_random_corpus(rng: random.Random, n_components: int, files_per_component: int,
                       vocab_size: int = 150, clone_rate: float = 0.4,
                       min_len: int = 20, max_len: int = 160):
    """Synthetic ecosystem: fresh files plus mutated copies of shared upstreams.

    Returns ({component: {path: text}}, flat list of (component, path, text)).
    """
    vocab = [f"v{i}" for i in range(vocab_size)]
    upstream: list[list[str]] = [
        random_tokens(rng, vocab, rng.randint(min_len, max_len)) for _ in range(12)]
    components: dict[str, dict[str, str]] = {}
    for ci in range(n_components):
        name = f"comp-{ci:02d}"
        files: dict[str, str] = {}
        for fi in range(files_per_component):
            if rng.random() < clone_rate:
                base = rng.choice(upstream)
                toks = mutate_tokens(rng, base, vocab, rng.uniform(0.0, 0.25))
            else:
                toks = random_tokens(rng, vocab, rng.randint(min_len, max_len))
            files[f"src/f{fi:03d}.c"] = token_text(toks)
        components[name] = files
    return components


def ingest_corpus(db: SignatureDatabase, components: dict[str, dict[str, str]]) -> None:
    for name in components:
        records = [(rel, (lambda t=text: t.encode("utf-8")))
                   for rel, text in components[name].items()]
        ingest_file_records(db, name, records)


def make_random_query(rng: random.Random, components: dict[str, dict[str, str]],
                      n_clones: int, n_fresh: int, vocab_size: int = 150):
    """Query files: mutated copies of corpus files plus unrelated fresh ones."""
    vocab = [f"v{i}" for i in range(vocab_size)]
    flat = [(name, rel, text) for name, files in components.items()
            for rel, text in files.items()]
    query_files: dict[str, str] = {}
    for i in range(n_clones):
        _, _, text = rng.choice(flat)
        toks = text.split()
        query_files[f"q{i:03d}.c"] = token_text(
            mutate_tokens(rng, toks, vocab, rng.uniform(0.0, 0.3)))
    for i in range(n_fresh):
        fresh = random_tokens(rng, [f"w{j}" for j in range(80)], rng.randint(20, 120))
        query_files[f"fresh{i:03d}.c"] = token_text(fresh)
    return query_files


# --- independent brute-force oracle ---------------------------------------------

def oracle_search(query_files: dict[str, str], components: dict[str, dict[str, str]],
                  th: float):
    """All-pairs exact-Jaccard search straight from raw text, no pruning, no db.

    Zero-trigram files on either side never match (empty files are not search
    candidates). Returns (R: set of component names, S: {(query, comp): sim}).
    """
    query_sets = {
        path: trigrams(tokenize(SourceFile.from_text(path, text)))
        for path, text in query_files.items()
    }
    result_r: set[str] = set()
    scores: dict[tuple[str, str], float] = {}
    for comp, files in components.items():
        for rel, text in files.items():
            f_set = trigrams(tokenize(SourceFile.from_text(rel, text)))
            if not f_set:
                continue
            for q_path, q_set in query_sets.items():
                if not q_set:
                    continue
                sim = jaccard(q_set, f_set)
                if sim >= th:
                    result_r.add(comp)
                    key = (q_path, comp)
                    if sim > scores.get(key, 0.0):
                        scores[key] = sim
    return result_r, scores


def outcome_by_name(outcome, query: QuerySet, db: SignatureDatabase):
    """Rekey a SearchOutcome on (query path, component name) for oracle comparison."""
    names = {c.component_id: c.name for c in db.components}
    r = {names[cid] for cid in outcome.components}
    s = {(query.files[qi].path, names[cid]): sim
         for (qi, cid), sim in outcome.scores.items()}
    return r, s
