"""Origin search for clone-and-own component reuse.

Index corpora of C/C++/Java source files as compact minwise bit signatures,
then rank which indexed components most likely contain the originals of a
query file set.
"""

from .corpus import (Component, DatabaseView, FileEntry, IngestSummary,
                     SignatureDatabase, exclude_components, ingest_component,
                     ingest_file_records, load_database, save_database)
from .errors import (ConfigError, DuplicateComponentError, FormatError,
                     IngestError, IntegrityError, OscnError,
                     SignatureMismatchError, UnsupportedLanguageError)
from .lexer import (SENTINEL, Language, SourceFile, TokenSequence, Trigram,
                    jaccard, language_for_path, tokenize, trigrams)
from .minhash import (DEFAULT_K, FileSignature, HashFamily, base_hash,
                      build_signature, estimate_similarity, make_family,
                      string_hash32)
from .ranking import (ComponentReport, ComponentScore, build_report, dominates,
                      rank_scores, select_representatives)
from .search import (Match, QueryFile, QuerySet, SearchOutcome, SearchParams,
                     SearchStats, SimilarFile, baseline_search, build_query_set,
                     component_search, find_similar_files)

__version__ = "0.1.0"

__all__ = [
    "Component", "ComponentReport", "ComponentScore", "ConfigError", "DEFAULT_K",
    "DatabaseView", "DuplicateComponentError", "FileEntry", "FileSignature",
    "FormatError", "HashFamily", "IngestError", "IngestSummary", "IntegrityError",
    "Language", "Match", "OscnError", "QueryFile", "QuerySet", "SENTINEL",
    "SearchOutcome", "SearchParams", "SearchStats", "SignatureDatabase",
    "SignatureMismatchError", "SimilarFile", "SourceFile", "TokenSequence",
    "Trigram", "UnsupportedLanguageError", "base_hash", "baseline_search",
    "build_query_set", "build_report", "build_signature", "component_search",
    "dominates", "estimate_similarity", "exclude_components", "find_similar_files",
    "ingest_component", "ingest_file_records", "jaccard", "language_for_path",
    "load_database", "make_family", "rank_scores", "save_database",
    "select_representatives", "string_hash32", "tokenize", "trigrams",
]
