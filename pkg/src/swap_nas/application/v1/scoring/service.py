# src/application/v1/scoring/service.py
from __future__ import annotations

import asyncio

from swap_nas.application.services.scoring_service import score_genome, token_vocab
from swap_nas.application.v1.scoring.schema import ScoreRequestSchema
from swap_nas.domain.exceptions.base_exception import AppBadRequestException
from swap_nas.domain.netgraph.codec import decode
from swap_nas.domain.schemas.score_schema import ScoreReport
from swap_nas.infrastructure.persistence.batches import load_batch


class ScoringService:
    async def score(self, request: ScoreRequestSchema) -> ScoreReport:
        """Decode, build the batch and score off the event loop."""
        if request.batch.path:
            raise AppBadRequestException("batch files are not accepted over HTTP; describe a generated batch")
        genome = decode(request.genome)
        batch = load_batch(request.batch, vocab=token_vocab([genome]))
        return await asyncio.to_thread(
            score_genome, genome, batch, request.reg, init_seed=request.init_seed, norm=request.norm
        )


def scoring_service() -> ScoringService:
    return ScoringService()
