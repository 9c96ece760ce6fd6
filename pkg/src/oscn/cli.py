"""Command-line interface: index corpora, query them, run the baseline, inspect.

Exit codes are a stable contract for scripting: 0 success, 1 usage error,
2 data or integrity error, 3 search error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path
from typing import Optional

from .corpus import (DEFAULT_SEED, SignatureDatabase, exclude_components,
                     ingest_component, load_database, save_database)
from .errors import (ConfigError, DuplicateComponentError, FormatError,
                     IngestError, IntegrityError, SignatureMismatchError)
from .minhash import DEFAULT_K
from .ranking import build_report
from .report import render_json, render_text, render_tsv, report_to_dict
from .search import (SearchParams, SearchStats, baseline_search, build_query_set,
                     component_search)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_SEARCH = 3

DB_ENV_VAR = "OSCN_DB"
DEFAULT_TOP = 5


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oscn",
        description="Search a corpus of indexed components for the likely origin "
                    "of a set of source files.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_db(p: argparse.ArgumentParser) -> None:
        p.add_argument("--db", default=os.environ.get(DB_ENV_VAR),
                       help=f"signature database path (default: ${DB_ENV_VAR})")

    p_index = sub.add_parser("index", help="create or extend a signature database")
    add_db(p_index)
    p_index.add_argument("components", nargs="*", metavar="NAME=PATH",
                         help="component name and its directory or .tar.gz archive")
    p_index.add_argument("--manifest", help="file with one NAME=PATH spec per line")
    p_index.add_argument("--seed", type=int, default=DEFAULT_SEED,
                         help="hash family seed for a new database (default: %(default)s)")
    p_index.add_argument("--k", type=int, default=DEFAULT_K,
                         help="signature bits for a new database (default: %(default)s)")
    p_index.add_argument("--store-tokens", action="store_true",
                         help="keep token streams for collision-free exact similarity audits")
    p_index.set_defaults(func=cmd_index)

    def add_query_output(p: argparse.ArgumentParser) -> None:
        p.add_argument("query_dir", nargs="?", help="directory tree of query source files")
        p.add_argument("--files", nargs="+", metavar="FILE",
                       help="explicit query files instead of (or besides) a directory")
        p.add_argument("--exclude", action="append", default=[], metavar="GLOB",
                       help="hide components whose names match this pattern (repeatable)")
        p.add_argument("--top", type=int, default=DEFAULT_TOP,
                       help="components covered by the similarity table (default: %(default)s)")
        p.add_argument("--format", choices=("text", "json", "tsv"), default="text")
        p.add_argument("--output", help="write the report here instead of stdout")
        p.add_argument("--figures", metavar="DIR",
                       help="also render report figures (PNG) into this directory")
        p.add_argument("--stats", action="store_true",
                       help="print scan statistics and wall time to stderr")

    p_query = sub.add_parser("query", help="similarity search for a query file set")
    add_db(p_query)
    add_query_output(p_query)
    p_query.add_argument("--th", type=float, default=SearchParams.th,
                         help="similarity threshold in (0, 1] (default: %(default)s)")
    p_query.add_argument("--m", type=float, default=SearchParams.m,
                         help="estimator margin (default: %(default)s)")
    p_query.add_argument("--threads", type=int, default=1,
                         help="worker threads across query files (default: %(default)s)")
    p_query.add_argument("--exact-from-tokens", action="store_true",
                         help="compute exact similarity from stored token streams")
    p_query.set_defaults(func=cmd_query)

    p_base = sub.add_parser("baseline", help="exact content-digest search")
    add_db(p_base)
    add_query_output(p_base)
    p_base.set_defaults(func=cmd_baseline)

    p_inspect = sub.add_parser("inspect", help="show database header and components")
    add_db(p_inspect)
    p_inspect.add_argument("--format", choices=("text", "json"), default="text")
    p_inspect.set_defaults(func=cmd_inspect)
    return parser


def _require_db_path(args: argparse.Namespace) -> Path:
    if not args.db:
        raise ConfigError(f"no database given; use --db or set ${DB_ENV_VAR}")
    return Path(args.db)


def _parse_spec(spec: str) -> tuple[str, str]:
    name, sep, root = spec.partition("=")
    if not sep or not name or not root:
        raise ConfigError(f"component spec must look like NAME=PATH, got {spec!r}")
    return name, root


def _read_manifest(path: str) -> list[tuple[str, str]]:
    specs = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        specs.append(_parse_spec(line))
    return specs


def cmd_index(args: argparse.Namespace) -> int:
    db_path = _require_db_path(args)
    specs = [_parse_spec(s) for s in args.components]
    if args.manifest:
        specs.extend(_read_manifest(args.manifest))
    if not specs:
        raise ConfigError("nothing to index; give NAME=PATH specs or --manifest")

    if db_path.exists():
        db = load_database(db_path)
        if args.k != db.family.k or (args.seed & 0xFFFFFFFFFFFFFFFF) != db.family.seed:
            print(f"note: extending existing database; header k={db.family.k} "
                  f"seed={db.family.seed} wins over command-line values", file=sys.stderr)
    else:
        db = SignatureDatabase.create(seed=args.seed, k=args.k,
                                      store_tokens=args.store_tokens)

    failures = 0
    for name, root in specs:
        try:
            summary = ingest_component(db, name, root)
        except (DuplicateComponentError, IngestError) as exc:
            print(f"error: {name}: {exc}", file=sys.stderr)
            failures += 1
            continue
        print(f"indexed {name}: {summary.files_indexed} new, "
              f"{summary.files_deduped} shared, {summary.files_skipped} skipped, "
              f"{summary.error_count} errors ({summary.files_seen} files seen)")
        for path, message in summary.errors:
            print(f"  warning: {name}/{path}: {message}", file=sys.stderr)
    save_database(db, db_path)
    return EXIT_DATA if failures else EXIT_OK


def _load_query(args: argparse.Namespace, db: SignatureDatabase):
    if not args.query_dir and not args.files:
        raise ConfigError("give a query directory or --files")
    if args.query_dir and not Path(args.query_dir).is_dir():
        raise IngestError(f"query directory {args.query_dir!r} is not readable")
    return build_query_set(args.query_dir, db.family, files=args.files)


def _emit(args: argparse.Namespace, report, payload: dict) -> None:
    if args.format == "json":
        text = render_json(payload)
    elif args.format == "tsv":
        text = render_tsv(report)
    else:
        text = render_text(report)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.figures:
        from .figures import render_report_figures
        for path in render_report_figures(report, args.figures, prefix=args.command):
            print(f"wrote figure: {path}", file=sys.stderr)


def _print_stats(stats: SearchStats, elapsed: float) -> None:
    estimated = stats.pairs_considered - stats.size_pruned
    ratio = stats.exact_computed / stats.pairs_considered if stats.pairs_considered else 0.0
    print(f"pairs considered:    {stats.pairs_considered}", file=sys.stderr)
    print(f"size-pruned:         {stats.size_pruned}", file=sys.stderr)
    print(f"estimates computed:  {estimated}", file=sys.stderr)
    print(f"estimate-pruned:     {stats.estimate_pruned}", file=sys.stderr)
    print(f"exact computed:      {stats.exact_computed} ({ratio:.4%} of pairs)", file=sys.stderr)
    print(f"elapsed:             {elapsed:.3f} s", file=sys.stderr)


def cmd_query(args: argparse.Namespace) -> int:
    params = SearchParams(th=args.th, m=args.m)
    db = load_database(_require_db_path(args))
    view = exclude_components(db, args.exclude)
    query = _load_query(args, db)
    started = time.perf_counter()
    outcome = component_search(query, view, params,
                               from_tokens=args.exact_from_tokens,
                               threads=max(1, args.threads))
    elapsed = time.perf_counter() - started
    report = build_report(outcome, query, view, top_n=args.top)
    payload = report_to_dict(
        report,
        query={"root": args.query_dir, "file_count": len(query.files),
               "files": [qf.path for qf in query.files], "skipped": query.skipped},
        params={"mode": "similarity", "th": params.th, "m": params.m, "top": args.top,
                "exclude": list(args.exclude)},
        stats=outcome.stats)
    _emit(args, report, payload)
    if args.stats:
        _print_stats(outcome.stats, elapsed)
    return EXIT_OK


def cmd_baseline(args: argparse.Namespace) -> int:
    db = load_database(_require_db_path(args))
    view = exclude_components(db, args.exclude)
    query = _load_query(args, db)
    started = time.perf_counter()
    outcome = baseline_search(query, view)
    elapsed = time.perf_counter() - started
    report = build_report(outcome, query, view, top_n=args.top)
    payload = report_to_dict(
        report,
        query={"root": args.query_dir, "file_count": len(query.files),
               "files": [qf.path for qf in query.files], "skipped": query.skipped},
        params={"mode": "baseline", "top": args.top, "exclude": list(args.exclude)},
        stats=None)
    _emit(args, report, payload)
    if args.stats:
        _print_stats(outcome.stats, elapsed)
    return EXIT_OK


def cmd_inspect(args: argparse.Namespace) -> int:
    db_path = _require_db_path(args)
    db = load_database(db_path)
    total_refs = sum(c.file_count for c in db.components)
    if args.format == "json":
        payload = {
            "path": str(db_path),
            "k": db.family.k,
            "b": 1,
            "seed": db.family.seed,
            "store_tokens": db.store_tokens,
            "unique_files": len(db.entries),
            "file_references": total_refs,
            "components": [{"name": c.name, "file_count": c.file_count}
                           for c in db.components],
        }
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")
        return EXIT_OK
    print(f"database: {db_path}")
    print(f"  k: {db.family.k}  b: 1  seed: {db.family.seed}")
    print(f"  components: {len(db.components)}")
    print(f"  unique files: {len(db.entries)}")
    print(f"  file references: {total_refs} "
          f"({total_refs - len(db.entries)} deduplicated by content)")
    print(f"  store-tokens: {'yes' if db.store_tokens else 'no'}")
    if db.components:
        print("components:")
        for comp in db.components:
            print(f"  {comp.name}  {comp.file_count} files")
    return EXIT_OK


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage and 0 for --help; fold into our contract
        return EXIT_OK if not exc.code else EXIT_USAGE
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, IntegrityError, IngestError, DuplicateComponentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SignatureMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEARCH


if __name__ == "__main__":
    sys.exit(main())
