# src/infrastructure/persistence/ground_truth.py
from __future__ import annotations

import os

import pandas as pd
from pydantic import ValidationError

from swap_nas.domain.exceptions.base_exception import AppBadRequestException
from swap_nas.domain.schemas.harness_schema import GroundTruthRow, GroundTruthTable

COLUMNS = ("arch_id", "encoding", "accuracy")


def read_ground_truth(path: str) -> GroundTruthTable:
    """UTF-8 CSV with a header holding at least arch_id, encoding and accuracy."""
    if not os.path.isfile(path):
        raise AppBadRequestException(f"ground-truth CSV not found: {path} (expected columns {', '.join(COLUMNS)})")
    try:
        frame = pd.read_csv(path, encoding="utf-8", dtype={"arch_id": str, "encoding": str})
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise AppBadRequestException(f"unreadable ground-truth CSV {path}: {exc}") from exc

    missing = [c for c in COLUMNS if c not in frame.columns]
    if missing:
        raise AppBadRequestException(f"ground-truth CSV {path} lacks columns: {', '.join(missing)}")

    try:
        rows = [
            GroundTruthRow(arch_id=str(r.arch_id), encoding=str(r.encoding), accuracy=float(r.accuracy))
            for r in frame[list(COLUMNS)].itertuples(index=False)
        ]
        return GroundTruthTable(rows=rows)
    except (ValidationError, ValueError) as exc:
        raise AppBadRequestException(f"invalid ground-truth CSV {path}: {exc}") from exc


def write_ground_truth(path: str, table: GroundTruthTable) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    frame = pd.DataFrame([row.model_dump() for row in table.rows], columns=list(COLUMNS))
    frame.to_csv(path, index=False, encoding="utf-8")
    return path
