from __future__ import annotations

from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from swap_nas.domain.entities.genome import Genome
from swap_nas.domain.enums.batch_kind import BatchKind


class LayerShape(BaseModel):
    """Geometry of one convolution as seen by its input feature map."""

    model_config = ConfigDict(frozen=True)

    c: int
    k: int
    t: int
    w: int
    h: int
    pad: int = 0

    @property
    def out_w(self) -> int:
        return (self.w + 2 * self.pad - self.k) // self.t + 1

    @property
    def out_h(self) -> int:
        return (self.h + 2 * self.pad - self.k) // self.t + 1

    @property
    def is_degenerate(self) -> bool:
        return self.k > self.w + 2 * self.pad or self.k > self.h + 2 * self.pad


class InputBatch(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: BatchKind
    data: np.ndarray  # (S, *dims); float32 for image/noise, uint32 for tokens
    seed: Optional[int] = None
    source_path: Optional[str] = None

    @model_validator(mode="after")
    def _check_shape(self) -> "InputBatch":
        if self.data.ndim < 2 or self.data.shape[0] < 1:
            raise ValueError("a batch needs at least one sample and one dimension")
        if any(d < 1 for d in self.data.shape):
            raise ValueError(f"batch dims must be positive, got {self.data.shape}")
        return self

    @property
    def size(self) -> int:
        return int(self.data.shape[0])

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(int(d) for d in self.data.shape[1:])

    def describe(self) -> str:
        origin = self.source_path if self.source_path else f"seed={self.seed}"
        return f"{self.kind.value}:{'x'.join(map(str, self.dims))}:S={self.size}:{origin}"


class ActivationRecord(BaseModel):
    """Signum-indicated post-activation values, site-major (V rows x S columns)."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    matrix: np.ndarray
    per_layer_sites: list[tuple[str, int]] = Field(default_factory=list)

    @property
    def site_count(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def sample_count(self) -> int:
        return int(self.matrix.shape[1])


class NetworkInstance(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    genome: Genome
    init_seed: int
    module: Any  # torch.nn.Module, kept untyped so the domain layer does not import torch
    input_dims: tuple[int, ...]
    param_count: int
    flop_count: int
    theta_scale: float = 1e6
    layer_shapes: list[LayerShape] = Field(default_factory=list)

    @property
    def params_m(self) -> float:
        return self.param_count / self.theta_scale
