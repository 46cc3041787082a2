from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from swap_nas.domain.entities.genome import Genome
from swap_nas.domain.schemas.score_schema import RegularisationParams, ScoreReport


class Individual(BaseModel):
    model_config = ConfigDict(frozen=True)

    genome: Genome
    report: ScoreReport
    birth: int  # order of insertion, used for oldest-first tie breaks

    @property
    def score(self) -> float:
        return self.report.reg_swap


class SearchState(BaseModel):
    population: list[Individual]
    history: list[ScoreReport] = Field(default_factory=list)
    cycle: int = 0
    best: Optional[Individual] = None
    reg: RegularisationParams = Field(default_factory=RegularisationParams)
    trace: list[dict] = Field(default_factory=list)  # one summary per cycle
    births: int = 0

    def next_birth(self) -> int:
        self.births += 1
        return self.births - 1

    def offer_best(self, candidate: Individual) -> None:
        if self.best is None or candidate.score > self.best.score:
            self.best = candidate
