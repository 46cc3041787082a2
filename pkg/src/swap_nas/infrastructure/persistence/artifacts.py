# src/infrastructure/persistence/artifacts.py
"""Run outputs: JSONL records, long-format CSV tables and plain-text files."""
from __future__ import annotations

import json
import logging
import os
from typing import Iterable, Mapping

import pandas as pd

logger = logging.getLogger(__name__)


def _ensure_parent(path: str) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)


def to_json_line(record: Mapping) -> str:
    return json.dumps(record, separators=(",", ":"), allow_nan=False)


def write_jsonl(path: str, records: Iterable[Mapping]) -> str:
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8") as file:
        for record in records:
            file.write(to_json_line(record) + "\n")
    logger.debug(f"Wrote {path}")
    return path


def read_jsonl(path: str) -> list[dict]:
    with open(path, encoding="utf-8") as file:
        return [json.loads(line) for line in file if line.strip()]


def write_csv(path: str, rows: Iterable[Mapping], columns: list[str] | None = None) -> str:
    _ensure_parent(path)
    frame = pd.DataFrame(list(rows), columns=columns)
    frame.to_csv(path, index=False, encoding="utf-8")
    logger.debug(f"Wrote {path} ({len(frame)} rows)")
    return path


def write_text(path: str, text: str) -> str:
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8") as file:
        file.write(text if text.endswith("\n") else text + "\n")
    return path
