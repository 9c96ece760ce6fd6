"""Min-hash signatures over trigram sets and the 1-bit similarity estimator.

Each trigram is folded to a 64-bit integer, k linear hash functions
h_i(t) = a_i * t + b_i (wrapping 64-bit) sample one minimum per function,
and only the least significant bit of each minimum is kept. A file is thus
a k-bit vector; the similarity of two files is recovered from the fraction
of agreeing bits.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np

from .errors import ConfigError, SignatureMismatchError
from .lexer import Trigram

DEFAULT_K = 2048
SIGNATURE_BITS_PER_SAMPLE = 1  # only the LSB of each min-hash is retained

_MASK32 = 0xFFFFFFFF
_MASK64 = 0xFFFFFFFFFFFFFFFF
_MULT = 65537

# Memory cap for the (hash functions x trigrams) intermediate, in elements.
_CHUNK_ELEMS = 1 << 22


@lru_cache(maxsize=1 << 16)
def string_hash32(s: str) -> int:
    """32-bit polynomial hash with multiplier 31 over UTF-16 code units.

    Returns the signed 32-bit value so that sign extension to 64 bits is a
    plain Python int conversion. Pinned to these semantics so signatures are
    portable across implementations.
    """
    data = s.encode("utf-16-be")
    h = 0
    for i in range(0, len(data), 2):
        h = (31 * h + ((data[i] << 8) | data[i + 1])) & _MASK32
    if h >= 0x80000000:
        h -= 0x100000000
    return h


def base_hash(trigram: Trigram) -> int:
    """Fold one occurrence-indexed trigram into an unsigned 64-bit integer."""
    a, b, c, occ = trigram
    v = occ * _MULT + string_hash32(a)
    v = v * _MULT + string_hash32(b)
    v = v * _MULT + string_hash32(c)
    return v & _MASK64


def base_hash_array(trigrams: Iterable[Trigram]) -> np.ndarray:
    """Sorted, deduplicated uint64 base hashes of a trigram set."""
    values = [base_hash(t) for t in trigrams]
    if not values:
        return np.empty(0, dtype=np.uint64)
    return np.unique(np.asarray(values, dtype=np.uint64))


@dataclass(frozen=True, eq=False)
class HashFamily:
    seed: int
    k: int
    a: np.ndarray  # uint64, shape (k,), all nonzero
    b: np.ndarray  # uint64, shape (k,)

    @property
    def key(self) -> tuple[int, int]:
        return (self.seed, self.k)

    @property
    def words(self) -> int:
        return self.k // 64

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HashFamily):
            return NotImplemented
        return (
            self.seed == other.seed
            and self.k == other.k
            and np.array_equal(self.a, other.a)
            and np.array_equal(self.b, other.b)
        )


def make_family(seed: int, k: int = DEFAULT_K) -> HashFamily:
    """Draw k (a_i, b_i) pairs from a PRNG seeded with `seed`.

    The same (seed, k) always produces the same family. Even multipliers are
    rejected and redrawn: with an even a_i the least significant bit of
    a_i * x + b_i is LSB(b_i) for every x, so that sample would always agree
    between any two files and bias the estimate upward. k must be a positive
    multiple of 64 so bit vectors pack into whole words.
    """
    if k <= 0 or k % 64 != 0:
        raise ConfigError(f"k must be a positive multiple of 64, got {k}")
    rng = random.Random(seed)
    a = np.empty(k, dtype=np.uint64)
    b = np.empty(k, dtype=np.uint64)
    for i in range(k):
        ai = rng.getrandbits(64)
        while ai % 2 == 0:
            ai = rng.getrandbits(64)
        a[i] = ai
        b[i] = rng.getrandbits(64)
    return HashFamily(seed=seed, k=k, a=a, b=b)


def from_params(seed: int, k: int, a: np.ndarray, b: np.ndarray) -> HashFamily:
    """Rebuild a family from persisted parameters (header wins over defaults)."""
    if k <= 0 or k % 64 != 0 or len(a) != k or len(b) != k:
        raise ConfigError(f"inconsistent family parameters for k={k}")
    if np.any(a % 2 == 0):
        raise ConfigError("hash family has an even multiplier")
    return HashFamily(seed=seed, k=k, a=np.ascontiguousarray(a, dtype=np.uint64),
                      b=np.ascontiguousarray(b, dtype=np.uint64))


@dataclass(frozen=True, eq=False)
class FileSignature:
    bits: np.ndarray  # uint64 words, little-endian bit order, shape (k // 64,)
    trigram_count: int
    digest: bytes  # SHA-1 of the raw file bytes
    family_key: tuple[int, int]  # (seed, k)

    @property
    def k(self) -> int:
        return self.family_key[1]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FileSignature):
            return NotImplemented
        return (
            self.family_key == other.family_key
            and self.trigram_count == other.trigram_count
            and self.digest == other.digest
            and np.array_equal(self.bits, other.bits)
        )


_WORD_SHIFTS = np.arange(64, dtype=np.uint64)


def _pack_bits(lsb: np.ndarray) -> np.ndarray:
    """Pack a (..., k) array of 0/1 values into (..., k // 64) uint64 words."""
    shaped = lsb.astype(np.uint64).reshape(*lsb.shape[:-1], -1, 64)
    return np.bitwise_or.reduce(shaped << _WORD_SHIFTS, axis=-1)


def signature_bit_matrix(family: HashFamily, rows: np.ndarray) -> np.ndarray:
    """Bit vectors for a batch of base-hash sets, one row per set.

    `rows` is a (n, width) uint64 array; duplicate values within a row are
    harmless (the min ignores them), which lets callers pad variable-length
    sets to a common width. Returns (n, k // 64) packed words.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=np.uint64))
    n, width = rows.shape
    if width == 0:
        return np.zeros((n, family.words), dtype=np.uint64)
    out = np.empty((n, family.words), dtype=np.uint64)
    k_chunk = 256
    col_chunk = max(1, _CHUNK_ELEMS // (k_chunk * n))
    u64_max = np.uint64(0xFFFFFFFFFFFFFFFF)
    for ks in range(0, family.k, k_chunk):
        a = family.a[ks:ks + k_chunk]
        b = family.b[ks:ks + k_chunk]
        mins = np.full((len(a), n), u64_max, dtype=np.uint64)
        for cs in range(0, width, col_chunk):
            chunk = rows[:, cs:cs + col_chunk]
            h = a[:, None, None] * chunk[None, :, :] + b[:, None, None]
            np.minimum(mins, h.min(axis=2), out=mins)
        lsb = (mins & np.uint64(1)).T  # (n, chunk of k)
        out[:, ks // 64:(ks + len(a)) // 64] = _pack_bits(lsb)
    return out


def build_signature(trigram_set: frozenset[Trigram] | Iterable[Trigram],
                    family: HashFamily, content: bytes) -> FileSignature:
    """Signature of one file: packed LSBs of the k min-hashes, plus metadata.

    An empty trigram set gets an all-zero bit vector and count 0.
    """
    digest = hashlib.sha1(content).digest()
    bases = base_hash_array(trigram_set)
    count = len(trigram_set) if hasattr(trigram_set, "__len__") else len(bases)
    if len(bases) == 0:
        bits = np.zeros(family.words, dtype=np.uint64)
    else:
        bits = signature_bit_matrix(family, bases[None, :])[0]
    return FileSignature(bits=bits, trigram_count=count, digest=digest, family_key=family.key)


def signature_from_bases(bases: np.ndarray, trigram_count: int,
                         family: HashFamily, digest: bytes) -> FileSignature:
    """Signature from precomputed base hashes (used when rebuilding from disk)."""
    if len(bases) == 0:
        bits = np.zeros(family.words, dtype=np.uint64)
    else:
        bits = signature_bit_matrix(family, np.asarray(bases, dtype=np.uint64)[None, :])[0]
    return FileSignature(bits=bits, trigram_count=trigram_count, digest=digest, family_key=family.key)


def estimate_similarity(s1: FileSignature, s2: FileSignature) -> float:
    """Similarity estimate from two bit vectors.

    With agreement probability P_o observed over the k sampled bits, the
    estimate is (P_o - 1/2) * 2; negative estimates are clamped to zero.
    """
    if s1.family_key != s2.family_key:
        raise SignatureMismatchError(
            f"signatures from different hash families: {s1.family_key} vs {s2.family_key}")
    k = s1.k
    differing = int(np.bitwise_count(s1.bits ^ s2.bits).sum())
    p_observed = 1.0 - differing / k
    return max(0.0, (p_observed - 0.5) * 2.0)


def estimate_similarity_block(bits: np.ndarray, block: np.ndarray, k: int) -> np.ndarray:
    """Vectorized estimator of one bit vector against a block of rows."""
    if block.size == 0:
        return np.zeros(len(block), dtype=np.float64)
    differing = np.bitwise_count(block ^ bits[None, :]).sum(axis=1, dtype=np.int64)
    p_observed = 1.0 - differing / k
    return np.maximum(0.0, (p_observed - 0.5) * 2.0)
