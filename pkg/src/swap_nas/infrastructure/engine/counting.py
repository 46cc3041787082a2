"""
Parameter, MAC and activation-site counting.

MAC convention (1 MAC = 1 FLOP unit, per sample):
    conv       C_in/groups * k_h * k_w * C_out * H_out * W_out
    linear     in * out per position
    attention  2 * T^2 * d_model for the score and mixing products
    pooling, normalisation, activations and embeddings count 0
"""
from __future__ import annotations

from typing import Sequence

import torch
import torch.nn as nn

from swap_nas.domain.entities.genome import ConvChainGenome, TransformerGenome
from swap_nas.domain.entities.network import NetworkInstance
from swap_nas.domain.exceptions.base_exception import AppRuntimeException
from swap_nas.infrastructure.engine.layers import SelfAttention

# BatchNorm in batch-statistics mode needs more than one value per channel
_PROBE_BATCH = 2


def count_parameters(module: nn.Module) -> int:
    return sum(p.numel() for p in module.parameters())


def _conv_macs(module: nn.Conv2d, inputs, output: torch.Tensor) -> int:
    k_h, k_w = module.kernel_size
    _, c_out, h_out, w_out = output.shape
    return (module.in_channels // module.groups) * k_h * k_w * c_out * h_out * w_out


def _linear_macs(module: nn.Linear, inputs, output: torch.Tensor) -> int:
    x = inputs[0]
    positions = x.numel() // (x.shape[0] * module.in_features)
    return module.in_features * module.out_features * positions


def _attention_macs(module: SelfAttention, inputs, output: torch.Tensor) -> int:
    _, seq, d_model = inputs[0].shape
    return 2 * seq * seq * d_model


_MAC_RULES = (
    (nn.Conv2d, _conv_macs),
    (nn.Linear, _linear_macs),
    (SelfAttention, _attention_macs),
)


def count_macs(module: nn.Module, input_dims: Sequence[int], *, token_input: bool = False) -> int:
    """Per-sample MACs of one forward pass at `input_dims`."""
    total = [0]
    handles = []

    def _make_hook(rule):
        def _hook(mod, inputs, output):
            total[0] += rule(mod, inputs, output)
        return _hook

    for sub in module.modules():
        for kind, rule in _MAC_RULES:
            if isinstance(sub, kind):
                handles.append(sub.register_forward_hook(_make_hook(rule)))
                break

    reference = next(module.parameters(), None)
    dtype = reference.dtype if reference is not None else torch.float32
    shape = (_PROBE_BATCH, *input_dims)
    probe = torch.zeros(shape, dtype=torch.long) if token_input else torch.zeros(shape, dtype=dtype)
    try:
        with torch.no_grad():
            module(probe)
    finally:
        for handle in handles:
            handle.remove()
    return total[0]


def count_flops(n: NetworkInstance, input_dims: Sequence[int] | None = None) -> int:
    dims = tuple(input_dims) if input_dims is not None else n.input_dims
    return count_macs(n.module, dims, token_input=isinstance(n.genome, TransformerGenome))


def count_sites_formula(n: NetworkInstance) -> int:
    """
    Closed-form activation-site count per sample.

    CNN branch: sum over conv layers of c * ((w - k) / t + 1) * ((h - k) / t + 1),
    valid for unpadded convolutions only. Transformer branch: sum over layers of T * d_ff.
    """
    if isinstance(n.genome, TransformerGenome):
        return n.genome.layers * n.genome.seq_len * n.genome.d_ff
    if isinstance(n.genome, ConvChainGenome):
        if any(shape.pad for shape in n.layer_shapes):
            raise AppRuntimeException("closed-form site count inapplicable to padded convolutions; use instrumented count")
        return sum(shape.c * shape.out_w * shape.out_h for shape in n.layer_shapes)
    raise AppRuntimeException("closed-form site count inapplicable to padded convolutions; use instrumented count")
