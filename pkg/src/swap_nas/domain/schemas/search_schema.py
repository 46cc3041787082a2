from __future__ import annotations

from typing import Any

from pydantic import BaseModel, ConfigDict, Field, model_validator

from swap_nas.domain.enums.space_id import SpaceId
from swap_nas.domain.schemas.batch_schema import BatchSpec
from swap_nas.domain.schemas.score_schema import RegularisationParams


class SearchConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    space: SpaceId = SpaceId.NB201
    population_size: int = Field(10, ge=2)
    cycles: int = Field(20, ge=1)
    tournament_size: int = Field(5, ge=2)  # max(2, P // 2) when omitted
    mutation_times: int = Field(5, ge=1)
    crossover_prob: float = Field(0.5, ge=0.0, le=1.0)
    retries: int = Field(2, ge=0)
    reg: RegularisationParams = RegularisationParams()
    master_seed: int = 0
    init_seed: int = 0
    batch: BatchSpec = BatchSpec()

    @model_validator(mode="before")
    @classmethod
    def _default_tournament(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("tournament_size") is None:
            data = dict(data)
            data["tournament_size"] = max(2, int(data.get("population_size", 10)) // 2)
        return data

    @model_validator(mode="after")
    def _tournament_fits(self) -> "SearchConfig":
        if self.tournament_size > self.population_size:
            raise ValueError(
                f"tournament_size must lie in [2, {self.population_size}], got {self.tournament_size}"
            )
        return self
