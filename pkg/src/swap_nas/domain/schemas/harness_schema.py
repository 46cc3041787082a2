from __future__ import annotations

import math
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# Metrics correlated against ground truth, in report order
METRICS = ("swap", "reg_swap", "standard", "params", "flops", "reg_params", "reg_flops")


class GroundTruthRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    arch_id: str = Field(..., min_length=1)
    encoding: str
    accuracy: float

    @field_validator("accuracy")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("accuracy must be finite")
        return value


class GroundTruthTable(BaseModel):
    rows: list[GroundTruthRow]

    @model_validator(mode="after")
    def _unique_ids(self) -> "GroundTruthTable":
        seen: set[str] = set()
        for row in self.rows:
            if row.arch_id in seen:
                raise ValueError(f"duplicate arch_id '{row.arch_id}'")
            seen.add(row.arch_id)
        return self


class CorrelationReport(BaseModel):
    metric: str
    rho: Optional[float] = Field(None, ge=-1.0, le=1.0)  # mean over seeds
    n: int = 0
    seeds: list[int] = []
    per_seed: list[Optional[float]] = []
    std_err: Optional[float] = None
    skipped: int = 0
    setting: str = ""
    error: Optional[str] = None


class AblationRow(BaseModel):
    """One long-format observation: (metric, setting, seed, value)."""

    metric: str
    setting: str
    seed: int
    value: float


class OracleReport(BaseModel):
    space: str
    requested: int
    checked: int = 0
    over_cap: int = 0
    v_cap: int
    passed: bool = True
    vacuous: bool = False
    mismatch: Optional[dict] = None
    error: Optional[str] = None


class AblationSummary(BaseModel):
    """Mean and standard error of one metric at one ablation setting."""

    setting: str
    metric: str
    mean: Optional[float] = None
    std_err: Optional[float] = None
    n: int = 0
    error: Optional[str] = None
