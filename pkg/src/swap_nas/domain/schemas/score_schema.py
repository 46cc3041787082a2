from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from swap_nas.domain.enums.pattern_orientation import PatternOrientation
from swap_nas.domain.enums.regularisation_mode import RegularisationMode

# Serialisation order of the fixed ScoreReport fields
REPORT_FIELDS = ("genome", "seed", "S", "V", "swap", "reg_swap", "standard", "params_m", "flops", "f_theta")


class PatternSet(BaseModel):
    model_config = ConfigDict(frozen=True)

    orientation: PatternOrientation
    distinct_count: int = Field(..., ge=0)
    row_length: int = Field(..., ge=1)


class RegularisationParams(BaseModel):
    """mu and sigma of the size regulariser, in millions of parameters."""

    model_config = ConfigDict(frozen=True)

    mu: float = Field(1.0, ge=0.0)
    sigma: float = Field(1.0, gt=0.0)
    mode: RegularisationMode = RegularisationMode.STATIC


class ScoreReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    genome: str
    seed: int
    samples: int = Field(..., alias="S", ge=1)
    sites: int = Field(..., alias="V", ge=0)
    swap: int = Field(..., ge=0)
    reg_swap: float = Field(..., ge=0.0)
    standard: int = Field(..., ge=0)
    params_m: float = Field(..., ge=0.0)
    flops: int = Field(..., ge=0)
    f_theta: float = Field(..., ge=0.0, le=1.0)

    # Extension fields
    reg_params: float = 0.0
    reg_flops: float = 0.0
    batch: str = ""
    cycle: Optional[int] = None
    mu: Optional[float] = None
    sigma: Optional[float] = None

    def to_record(self) -> dict:
        """Fixed fields first, then extensions that are set."""
        data = self.model_dump(by_alias=True)
        record = {name: data[name] for name in REPORT_FIELDS}
        for name in ("reg_params", "reg_flops", "batch", "cycle", "mu", "sigma"):
            if data[name] is not None:
                record[name] = data[name]
        return record
