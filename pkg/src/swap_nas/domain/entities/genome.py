from __future__ import annotations

from typing import Literal, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from swap_nas.domain.enums.space_id import SpaceId
from swap_nas.domain.netgraph.spaces import CELL_INPUTS, DARTS_LITE_FAN_IN, alphabet_for


class GenomeBase(BaseModel):
    model_config = ConfigDict(frozen=True)


class Edge(GenomeBase):
    src: int = Field(..., ge=0)
    dst: int = Field(..., ge=1)
    op: str = Field(..., min_length=1)


class CellGenome(GenomeBase):
    """
    Cell DAG stacked into a macro network.

    `nodes` counts computed nodes (every non-input node, the last one being the
    cell output). Edges are kept in non-decreasing dst order; the order inside a
    dst group is part of the genome.
    """

    space_id: Literal[SpaceId.NB201, SpaceId.DARTS_LITE]
    edges: tuple[Edge, ...] = Field(..., min_length=1)
    nodes: int = Field(..., ge=1)
    stem_channels: int = Field(..., ge=1)
    stack_depth: int = Field(..., ge=1)

    @property
    def inputs(self) -> int:
        return CELL_INPUTS[self.space_id]

    @property
    def node_ids(self) -> range:
        return range(self.inputs, self.inputs + self.nodes)

    def incoming(self, node: int) -> list[Edge]:
        return [e for e in self.edges if e.dst == node]

    @model_validator(mode="after")
    def _check_structure(self) -> "CellGenome":
        alphabet = alphabet_for(self.space_id)
        last_dst = -1
        for edge in self.edges:
            if edge.op not in alphabet:
                raise ValueError(f"op '{edge.op}' not in the {self.space_id.value} alphabet")
            if edge.src >= edge.dst:
                raise ValueError(f"edge {edge.src}->{edge.dst} is not forward")
            if edge.dst not in self.node_ids:
                raise ValueError(f"edge dst {edge.dst} outside computed nodes")
            if edge.dst < last_dst:
                raise ValueError("edges must be in dst-node order")
            last_dst = edge.dst
        for node in self.node_ids:
            fan_in = len(self.incoming(node))
            if fan_in < 1:
                raise ValueError(f"node {node} has no incoming edge")
            if self.space_id is SpaceId.DARTS_LITE and fan_in != DARTS_LITE_FAN_IN:
                raise ValueError(f"node {node} needs exactly {DARTS_LITE_FAN_IN} incoming edges")
        return self


class TransformerGenome(GenomeBase):
    space_id: Literal[SpaceId.TRANSFORMER] = SpaceId.TRANSFORMER
    layers: int = Field(..., ge=1)
    heads: int = Field(..., ge=1)
    d_model: int = Field(..., ge=1)
    d_ff: int = Field(..., ge=1)
    seq_len: int = Field(..., ge=1)
    vocab: int = Field(..., ge=1)

    @model_validator(mode="after")
    def _check_heads(self) -> "TransformerGenome":
        if self.d_model % self.heads:
            raise ValueError(f"d_model {self.d_model} is not divisible by heads {self.heads}")
        return self


class ConvLayer(GenomeBase):
    channels: int = Field(..., ge=1)
    kernel: int = Field(..., ge=1)
    stride: int = Field(..., ge=1)


class ConvChainGenome(GenomeBase):
    """Plain stack of unpadded Conv->ReLU layers."""

    space_id: Literal[SpaceId.CONV_CHAIN] = SpaceId.CONV_CHAIN
    layers: tuple[ConvLayer, ...] = ()


Genome = Union[CellGenome, TransformerGenome, ConvChainGenome]
