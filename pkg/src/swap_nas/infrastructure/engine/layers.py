"""Building blocks of the decoded networks. Activation modules are never shared."""
from __future__ import annotations

import math
from typing import Callable

import torch
import torch.nn as nn

from swap_nas.domain.entities.genome import CellGenome
from swap_nas.domain.enums.norm_mode import NormMode


def norm2d(channels: int, mode: NormMode) -> nn.Module:
    if mode is NormMode.NONE:
        return nn.Identity()
    # Untrained networks have no running statistics to fall back on.
    return nn.BatchNorm2d(channels, affine=True, track_running_stats=False)


class Zero(nn.Module):
    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return torch.zeros_like(x)


class ReLUConvBN(nn.Sequential):
    def __init__(self, c_in: int, c_out: int, kernel: int, stride: int, padding: int, norm: NormMode, dilation: int = 1):
        super().__init__(
            nn.ReLU(),
            nn.Conv2d(c_in, c_out, kernel, stride=stride, padding=padding, dilation=dilation, bias=False),
            norm2d(c_out, norm),
        )


class DilConv(nn.Sequential):
    def __init__(self, channels: int, kernel: int, padding: int, dilation: int, norm: NormMode):
        super().__init__(
            nn.ReLU(),
            nn.Conv2d(channels, channels, kernel, padding=padding, dilation=dilation, groups=channels, bias=False),
            nn.Conv2d(channels, channels, 1, bias=False),
            norm2d(channels, norm),
        )


class SepConv(nn.Sequential):
    def __init__(self, channels: int, kernel: int, padding: int, norm: NormMode):
        super().__init__(
            DilConv(channels, kernel, padding, 1, norm),
            DilConv(channels, kernel, padding, 1, norm),
        )


OpFactory = Callable[[int, NormMode], nn.Module]

OPS: dict[str, OpFactory] = {
    "none": lambda c, norm: Zero(),
    "skip": lambda c, norm: nn.Identity(),
    "conv1x1": lambda c, norm: ReLUConvBN(c, c, 1, 1, 0, norm),
    "conv3x3": lambda c, norm: ReLUConvBN(c, c, 3, 1, 1, norm),
    "avgpool3x3": lambda c, norm: nn.AvgPool2d(3, stride=1, padding=1, count_include_pad=False),
    "maxpool3x3": lambda c, norm: nn.MaxPool2d(3, stride=1, padding=1),
    "sepconv3x3": lambda c, norm: SepConv(c, 3, 1, norm),
    "sepconv5x5": lambda c, norm: SepConv(c, 5, 2, norm),
    "dilconv3x3": lambda c, norm: DilConv(c, 3, 2, 2, norm),
    "dilconv5x5": lambda c, norm: DilConv(c, 5, 4, 2, norm),
}


class NB201Cell(nn.Module):
    def __init__(self, genome: CellGenome, channels: int, norm: NormMode):
        super().__init__()
        self.genome = genome
        self.edges = nn.ModuleList(OPS[e.op](channels, norm) for e in genome.edges)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        states = [x]
        for node in self.genome.node_ids:
            states.append(sum(
                self.edges[i](states[e.src]) for i, e in enumerate(self.genome.edges) if e.dst == node
            ))
        return states[-1]


class DartsLiteCell(nn.Module):
    """Normal cell over two inputs; output is the projected concat of all computed nodes."""

    def __init__(self, genome: CellGenome, c_prev_prev: int, c_prev: int, channels: int, norm: NormMode):
        super().__init__()
        self.genome = genome
        self.pre0 = ReLUConvBN(c_prev_prev, channels, 1, 1, 0, norm)
        self.pre1 = ReLUConvBN(c_prev, channels, 1, 1, 0, norm)
        self.edges = nn.ModuleList(OPS[e.op](channels, norm) for e in genome.edges)
        self.project = ReLUConvBN(genome.nodes * channels, channels, 1, 1, 0, norm)

    def forward(self, s0: torch.Tensor, s1: torch.Tensor) -> torch.Tensor:
        states = [self.pre0(s0), self.pre1(s1)]
        for node in self.genome.node_ids:
            states.append(sum(
                self.edges[i](states[e.src]) for i, e in enumerate(self.genome.edges) if e.dst == node
            ))
        return self.project(torch.cat(states[self.genome.inputs:], dim=1))


class ResidualReduction(nn.Module):
    """Halves the resolution between stages; the shortcut is a strided 1x1 conv."""

    def __init__(self, c_in: int, c_out: int, norm: NormMode):
        super().__init__()
        self.conv_a = ReLUConvBN(c_in, c_out, 3, 2, 1, norm)
        self.conv_b = ReLUConvBN(c_out, c_out, 3, 1, 1, norm)
        self.shortcut = nn.Conv2d(c_in, c_out, 1, stride=2, bias=False)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.conv_b(self.conv_a(x)) + self.shortcut(x)


class SelfAttention(nn.Module):
    def __init__(self, d_model: int, heads: int):
        super().__init__()
        self.heads = heads
        self.qkv = nn.Linear(d_model, 3 * d_model)
        self.out = nn.Linear(d_model, d_model)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        batch, seq, d_model = x.shape
        head_dim = d_model // self.heads
        q, k, v = self.qkv(x).view(batch, seq, 3, self.heads, head_dim).permute(2, 0, 3, 1, 4)
        weights = torch.softmax(q @ k.transpose(-2, -1) / math.sqrt(head_dim), dim=-1)
        context = (weights @ v).transpose(1, 2).reshape(batch, seq, d_model)
        return self.out(context)


class FeedForward(nn.Module):
    def __init__(self, d_model: int, d_ff: int):
        super().__init__()
        self.layers = nn.Sequential(
            nn.Linear(d_model, d_ff),
            nn.GELU(),
            nn.Linear(d_ff, d_model),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.layers(x)


class EncoderLayer(nn.Module):
    def __init__(self, d_model: int, heads: int, d_ff: int):
        super().__init__()
        self.attention = SelfAttention(d_model, heads)
        self.norm1 = nn.LayerNorm(d_model)
        self.ffn = FeedForward(d_model, d_ff)
        self.norm2 = nn.LayerNorm(d_model)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        x = self.norm1(x + self.attention(x))
        return self.norm2(x + self.ffn(x))
