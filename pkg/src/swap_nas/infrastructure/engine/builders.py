from __future__ import annotations

import torch
import torch.nn as nn

from swap_nas.domain.entities.genome import CellGenome, ConvChainGenome, Genome, TransformerGenome
from swap_nas.domain.entities.network import LayerShape
from swap_nas.domain.enums.norm_mode import NormMode
from swap_nas.domain.enums.space_id import SpaceId
from swap_nas.domain.exceptions.base_exception import AppRuntimeException
from swap_nas.infrastructure.engine.layers import (
    DartsLiteCell,
    EncoderLayer,
    NB201Cell,
    ResidualReduction,
    norm2d,
)

STAGES = 3


class CellNetwork(nn.Module):
    """stem -> 3 stages of stacked cells, a residual reduction between stages -> BN/ReLU -> pool -> linear."""

    def __init__(self, genome: CellGenome, in_channels: int, num_classes: int, norm: NormMode):
        super().__init__()
        self.genome = genome
        c = genome.stem_channels
        self.stem = nn.Sequential(nn.Conv2d(in_channels, c, 3, padding=1, bias=False), norm2d(c, norm))

        blocks: list[nn.Module] = []
        c_prev = c
        for stage in range(STAGES):
            c_stage = c * 2**stage
            if stage > 0:
                blocks.append(ResidualReduction(c_prev, c_stage, norm))
            for _ in range(genome.stack_depth):
                if genome.space_id is SpaceId.NB201:
                    blocks.append(NB201Cell(genome, c_stage, norm))
                else:
                    blocks.append(DartsLiteCell(genome, c_stage, c_stage, c_stage, norm))
            c_prev = c_stage
        self.blocks = nn.ModuleList(blocks)

        self.lastact = nn.Sequential(norm2d(c_prev, norm), nn.ReLU())
        self.pool = nn.AdaptiveAvgPool2d(1)
        self.classifier = nn.Linear(c_prev, num_classes)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        s1 = self.stem(x)
        s0 = s1
        for block in self.blocks:
            if isinstance(block, DartsLiteCell):
                s0, s1 = s1, block(s0, s1)
            else:
                s1 = block(s1)
                s0 = s1
        out = self.pool(self.lastact(s1)).flatten(1)
        return self.classifier(out)


class ConvChainNetwork(nn.Module):
    def __init__(self, genome: ConvChainGenome, in_channels: int, num_classes: int):
        super().__init__()
        layers: list[nn.Module] = []
        c_prev = in_channels
        for layer in genome.layers:
            layers += [nn.Conv2d(c_prev, layer.channels, layer.kernel, stride=layer.stride), nn.ReLU()]
            c_prev = layer.channels
        self.features = nn.Sequential(*layers)
        self.pool = nn.AdaptiveAvgPool2d(1)
        self.classifier = nn.Linear(c_prev, num_classes)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.classifier(self.pool(self.features(x)).flatten(1))


class TransformerNetwork(nn.Module):
    """Post-LN encoder. Token ids go through the embedding; float (S, T, d_model) inputs skip it."""

    def __init__(self, genome: TransformerGenome, num_classes: int):
        super().__init__()
        self.embedding = nn.Embedding(genome.vocab, genome.d_model)
        self.position = nn.Embedding(genome.seq_len, genome.d_model)
        self.layers = nn.ModuleList(
            EncoderLayer(genome.d_model, genome.heads, genome.d_ff) for _ in range(genome.layers)
        )
        self.classifier = nn.Linear(genome.d_model, num_classes)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if not torch.is_floating_point(x):
            x = self.embedding(x)
        positions = torch.arange(x.shape[1], device=x.device)
        x = x + self.position(positions)
        for layer in self.layers:
            x = layer(x)
        return self.classifier(x.mean(dim=1))


def chain_layer_shapes(genome: ConvChainGenome, input_dims: tuple[int, ...]) -> list[LayerShape]:
    _, h, w = input_dims
    shapes = []
    for layer in genome.layers:
        shape = LayerShape(c=layer.channels, k=layer.kernel, t=layer.stride, w=w, h=h)
        if shape.is_degenerate:
            raise AppRuntimeException(
                f"degenerate shape: kernel {layer.kernel} exceeds the {h}x{w} feature map"
            )
        shapes.append(shape)
        h, w = shape.out_h, shape.out_w
    return shapes


def build_network(
    genome: Genome,
    input_dims: tuple[int, ...],
    *,
    num_classes: int,
    norm: NormMode,
) -> tuple[nn.Module, list[LayerShape]]:
    if isinstance(genome, TransformerGenome):
        if tuple(input_dims) != (genome.seq_len,):
            raise AppRuntimeException(f"shape mismatch: transformer expects dims ({genome.seq_len},), got {input_dims}")
        return TransformerNetwork(genome, num_classes), []

    if len(input_dims) != 3 or min(input_dims) < 1:
        raise AppRuntimeException(f"shape mismatch: convolutional networks expect CxHxW dims, got {input_dims}")
    if isinstance(genome, ConvChainGenome):
        shapes = chain_layer_shapes(genome, input_dims)
        return ConvChainNetwork(genome, input_dims[0], num_classes), shapes
    return CellNetwork(genome, input_dims[0], num_classes, norm), []
