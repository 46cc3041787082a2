# src/domain/scoring/patterns.py
"""
Activation-pattern cardinalities.

Patterns are bit-packed at 2 bits per entry (value + 1 in {0, 1, 2}), hashed to
64 bits and deduplicated with a full-row equality check inside every hash
bucket, so the counts are exact regardless of hash quality.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from swap_nas.domain.entities.network import ActivationRecord
from swap_nas.domain.enums.pattern_orientation import PatternOrientation
from swap_nas.domain.exceptions.base_exception import AppRuntimeException
from swap_nas.domain.schemas.score_schema import PatternSet

RowHasher = Callable[[np.ndarray], np.ndarray]

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX_1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX_2 = np.uint64(0x94D049BB133111EB)


def pack_rows(matrix: np.ndarray) -> np.ndarray:
    """(R, L) array over {-1, 0, 1} -> (R, W) uint64 words, 2 bits per entry."""
    rows, length = matrix.shape
    codes = (matrix.astype(np.int16) + 1).astype(np.uint8)
    planes = np.stack([codes & 1, codes >> 1], axis=2).reshape(rows, 2 * length)
    packed = np.packbits(planes, axis=1, bitorder="little")
    pad = (-packed.shape[1]) % 8
    if pad:
        packed = np.pad(packed, ((0, 0), (0, pad)))
    return np.ascontiguousarray(packed).view("<u8")


def row_hash64(words: np.ndarray) -> np.ndarray:
    """splitmix64-style fold over the words of each row."""
    h = np.full(words.shape[0], _GOLDEN, dtype=np.uint64)
    for j in range(words.shape[1]):
        h ^= words[:, j]
        h *= _MIX_1
        h ^= h >> np.uint64(31)
        h *= _MIX_2
        h ^= h >> np.uint64(29)
    return h


def count_distinct_rows(words: np.ndarray, hasher: RowHasher = row_hash64) -> int:
    hashes = hasher(words)
    order = np.argsort(hashes, kind="stable")
    hs, ws = hashes[order], words[order]

    group_start = np.ones(len(hs), dtype=bool)
    group_start[1:] = hs[1:] != hs[:-1]
    group_id = np.cumsum(group_start) - 1
    group_count = int(group_id[-1]) + 1 if len(group_id) else 0

    # Rows sharing a hash with a different neighbour mark a collided bucket.
    differs = np.zeros(len(hs), dtype=bool)
    differs[1:] = (ws[1:] != ws[:-1]).any(axis=1)
    collided = np.unique(group_id[differs & ~group_start])

    distinct = group_count - len(collided)
    for g in collided:
        distinct += len(np.unique(ws[group_id == g], axis=0))
    return distinct


def _require_populated(record: ActivationRecord) -> None:
    if record.matrix.ndim != 2 or record.site_count == 0 or record.sample_count == 0:
        raise AppRuntimeException("empty activation matrix")


def swap_score(record: ActivationRecord, *, hasher: RowHasher = row_hash64) -> PatternSet:
    """Distinct sample-wise patterns: one row per activation site, length S."""
    _require_populated(record)
    return PatternSet(
        orientation=PatternOrientation.SAMPLE_WISE,
        distinct_count=count_distinct_rows(pack_rows(record.matrix), hasher),
        row_length=record.sample_count,
    )


def standard_pattern_score(record: ActivationRecord, *, hasher: RowHasher = row_hash64) -> PatternSet:
    """Distinct value-wise patterns: one column per sample, length V."""
    _require_populated(record)
    return PatternSet(
        orientation=PatternOrientation.VALUE_WISE,
        distinct_count=count_distinct_rows(pack_rows(record.matrix.T), hasher),
        row_length=record.site_count,
    )


# ---- Brute-force oracles ---------------------------------------------------
def _naive_distinct(matrix: np.ndarray) -> int:
    distinct = 0
    for i in range(matrix.shape[0]):
        if i == 0 or not (matrix[:i] == matrix[i]).all(axis=1).any():
            distinct += 1
    return distinct


def naive_swap_score(record: ActivationRecord) -> int:
    """O(V^2) pairwise dedup of rows."""
    _require_populated(record)
    return _naive_distinct(record.matrix)


def naive_standard_score(record: ActivationRecord) -> int:
    _require_populated(record)
    return _naive_distinct(record.matrix.T)
