from __future__ import annotations

from fastapi import APIRouter, Depends, status

from swap_nas.application.v1.scoring.schema import ScoreRequestSchema
from swap_nas.application.v1.scoring.service import ScoringService, scoring_service
from swap_nas.domain.schemas.common_schema import BaseResponseSchema

router = APIRouter(
    prefix="/scoring",
    tags=["Scoring"],
    responses={
        400: {"description": "Bad Request"},
        422: {"description": "Unprocessable Network"},
        500: {"description": "Internal Server Error"},
    },
)


@router.post(
    "/score",
    response_model=BaseResponseSchema[dict],
    status_code=status.HTTP_200_OK,
    summary="Score one genome",
    description="Builds the network, runs one forward capture and returns every metric.",
    responses={
        200: {
            "description": "Scored",
            "content": {
                "application/json": {
                    "example": {
                        "data": {"genome": "space=NB201;...", "seed": 0, "S": 8, "V": 4096, "swap": 812},
                        "success": True,
                        "message": "Genome scored",
                    }
                }
            },
        }
    },
)
async def score_genome(
    request: ScoreRequestSchema,
    _service: ScoringService = Depends(scoring_service),
) -> BaseResponseSchema[dict]:
    report = await _service.score(request)
    return BaseResponseSchema(
        data=report.to_record(),
        success=True,
        message="Genome scored",
    )
