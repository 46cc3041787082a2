from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from swap_nas.domain.enums.batch_kind import BatchKind


class BatchSpec(BaseModel):
    """
    How to obtain an input batch: either generated from (kind, size, dims, seed)
    or read from a binary batch file at `path`.
    """

    model_config = ConfigDict(frozen=True)

    kind: BatchKind = BatchKind.IMAGE
    size: int = Field(8, ge=1)
    dims: tuple[int, ...] = (3, 32, 32)
    seed: int = 0
    path: Optional[str] = None

    @field_validator("dims")
    @classmethod
    def _positive_dims(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        if not value or any(d < 1 for d in value):
            raise ValueError(f"dims must be non-empty and positive, got {value}")
        return value

    def describe(self) -> str:
        if self.path:
            return f"file:{self.path}:S={self.size}"
        return f"{self.kind.value}:{'x'.join(map(str, self.dims))}:S={self.size}:seed={self.seed}"
