from typing import Optional

from pydantic import BaseModel, Field

from swap_nas.domain.enums.norm_mode import NormMode
from swap_nas.domain.schemas.batch_schema import BatchSpec
from swap_nas.domain.schemas.score_schema import RegularisationParams


class ScoreRequestSchema(BaseModel):
    genome: str = Field(..., min_length=1, description="Encoded genome, e.g. space=NB201;C=8,N=2;|conv3x3~0|+...")
    batch: BatchSpec = BatchSpec()
    reg: RegularisationParams = RegularisationParams()
    init_seed: int = 0
    norm: Optional[NormMode] = None
