# src/infrastructure/persistence/run_config.py
"""
Flat key=value run configuration.

Keys are the long CLI flags in snake case (population_size=10 <-> --population-size 10).
Blank lines and lines starting with # are ignored.
"""
from __future__ import annotations

import os
from enum import Enum
from typing import Mapping

from decouple import RepositoryEnv

from swap_nas.domain.exceptions.base_exception import AppBadRequestException

EFFECTIVE_CONFIG = "effective_config.env"


def read_run_config(path: str, allowed: set[str] | None = None) -> dict[str, str]:
    if not os.path.isfile(path):
        raise AppBadRequestException(f"config file not found: {path}")
    try:
        data = dict(RepositoryEnv(path).data)
    except (OSError, ValueError) as exc:
        raise AppBadRequestException(f"malformed config file {path}: {exc}") from exc

    if allowed is not None:
        unknown = sorted(set(data) - allowed)
        if unknown:
            raise AppBadRequestException(f"unknown config keys in {path}: {', '.join(unknown)}")
    return data


def write_effective_config(out_dir: str, values: Mapping[str, object], header: str = "") -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, EFFECTIVE_CONFIG)
    lines = [f"# {header}"] if header else []
    for key in sorted(values):
        value = values[key]
        if value is None:
            continue
        if isinstance(value, (list, tuple)):
            value = ",".join(str(v) for v in value)
        elif isinstance(value, bool):
            value = str(value).lower()
        elif isinstance(value, Enum):
            value = value.value
        lines.append(f"{key}={value}")
    with open(path, "w", encoding="utf-8") as file:
        file.write("\n".join(lines) + "\n")
    return path
