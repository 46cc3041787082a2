"""Fixed operation alphabets and structural constants of the architecture spaces."""
from __future__ import annotations

from swap_nas.domain.enums.space_id import SpaceId

NB201_OPS: tuple[str, ...] = ("none", "skip", "conv1x1", "conv3x3", "avgpool3x3")

DARTS_LITE_OPS: tuple[str, ...] = (
    "none",
    "maxpool3x3",
    "avgpool3x3",
    "sepconv3x3",
    "sepconv5x5",
    "dilconv3x3",
    "dilconv5x5",
    "skip",
)

OP_ALPHABETS: dict[SpaceId, tuple[str, ...]] = {
    SpaceId.NB201: NB201_OPS,
    SpaceId.DARTS_LITE: DARTS_LITE_OPS,
}

# Input nodes per cell; computed nodes follow them.
CELL_INPUTS: dict[SpaceId, int] = {
    SpaceId.NB201: 1,
    SpaceId.DARTS_LITE: 2,
}

# Incoming edges per computed node in DARTS-lite cells
DARTS_LITE_FAN_IN = 2


def alphabet_for(space_id: SpaceId) -> tuple[str, ...]:
    return OP_ALPHABETS[space_id]
