# src/infrastructure/engine/instance.py
from __future__ import annotations

import logging
from typing import Sequence

import numpy as np
import torch
import torch.nn as nn

from swap_nas.domain.entities.genome import Genome, TransformerGenome
from swap_nas.domain.entities.network import ActivationRecord, InputBatch, NetworkInstance
from swap_nas.domain.enums.batch_kind import BatchKind
from swap_nas.domain.enums.norm_mode import NormMode
from swap_nas.domain.exceptions.base_exception import AppRuntimeException, NumericOverflowException
from swap_nas.domain.utilities.config import settings
from swap_nas.infrastructure.engine.builders import build_network
from swap_nas.infrastructure.engine.counting import count_macs, count_parameters

logger = logging.getLogger(__name__)

# Captures are only bit-identical across runs at a fixed intra-op thread count.
torch.set_num_threads(max(1, settings.TORCH_THREADS))

ACTIVATIONS = (nn.ReLU, nn.GELU)
_DTYPES = {"float32": torch.float32, "float64": torch.float64}


def _dtype(precision: str | None) -> torch.dtype:
    name = precision or settings.ENGINE_PRECISION
    if name not in _DTYPES:
        raise AppRuntimeException(f"unsupported precision '{name}'")
    return _DTYPES[name]


def initialise(module: nn.Module, init_seed: int) -> None:
    """Fan-in scaled normal for conv/linear weights, zero biases, unit norms, N(0, 1) embeddings."""
    generator = torch.Generator().manual_seed(int(init_seed) & ((1 << 63) - 1))
    gain = nn.init.calculate_gain("relu")
    with torch.no_grad():
        for sub in module.modules():
            if isinstance(sub, (nn.Conv2d, nn.Linear)):
                fan_in = sub.weight[0].numel()
                sub.weight.normal_(0.0, gain / fan_in**0.5, generator=generator)
                if sub.bias is not None:
                    sub.bias.zero_()
            elif isinstance(sub, (nn.BatchNorm2d, nn.LayerNorm)):
                if sub.weight is not None:
                    sub.weight.fill_(1.0)
                    sub.bias.zero_()
            elif isinstance(sub, nn.Embedding):
                sub.weight.normal_(0.0, 1.0, generator=generator)


def instantiate(
    g: Genome,
    init_seed: int,
    input_dims: Sequence[int] | None = None,
    *,
    norm: NormMode | str | None = None,
    precision: str | None = None,
    num_classes: int | None = None,
    theta_scale: float | None = None,
) -> NetworkInstance:
    if input_dims is None:
        input_dims = (g.seq_len,) if isinstance(g, TransformerGenome) else tuple(settings.IMAGE_DIMS)
    dims = tuple(int(d) for d in input_dims)

    module, shapes = build_network(
        g,
        dims,
        num_classes=num_classes or settings.NUM_CLASSES,
        norm=NormMode(norm or settings.NORM_MODE),
    )
    initialise(module, init_seed)
    module = module.to(_dtype(precision))
    module.train()

    try:
        flops = count_macs(module, dims, token_input=isinstance(g, TransformerGenome))
    except (RuntimeError, ValueError) as exc:
        raise AppRuntimeException(f"degenerate shape: {exc}") from exc

    instance = NetworkInstance(
        genome=g,
        init_seed=init_seed,
        module=module,
        input_dims=dims,
        param_count=count_parameters(module),
        flop_count=flops,
        theta_scale=theta_scale or settings.THETA_SCALE,
        layer_shapes=shapes,
    )
    logger.debug(f"Instantiated {g.space_id.value} network: params={instance.param_count} flops={flops}")
    return instance


def _as_tensor(n: NetworkInstance, b: InputBatch) -> torch.Tensor:
    g = n.genome
    if isinstance(g, TransformerGenome):
        if b.kind is BatchKind.TOKENS and b.dims == (g.seq_len,):
            if int(b.data.max()) >= g.vocab:
                raise AppRuntimeException(f"shape mismatch: token id exceeds vocab {g.vocab}")
            return torch.from_numpy(b.data.astype(np.int64))
        if b.kind is BatchKind.GAUSSIAN_NOISE and b.dims == (g.seq_len, g.d_model):
            return torch.from_numpy(b.data).to(next(n.module.parameters()).dtype)
        raise AppRuntimeException(
            f"shape mismatch: transformer expects tokens ({g.seq_len},) or noise ({g.seq_len}, {g.d_model}), "
            f"got {b.kind.value} {b.dims}"
        )
    if b.kind is BatchKind.TOKENS or b.dims != n.input_dims:
        raise AppRuntimeException(f"shape mismatch: network expects {n.input_dims}, got {b.kind.value} {b.dims}")
    return torch.from_numpy(b.data).to(next(n.module.parameters()).dtype)


def forward_capture(n: NetworkInstance, b: InputBatch) -> ActivationRecord:
    """
    One forward pass; every ReLU/GELU output is mapped through sign() and stored
    site-major, one row per scalar site and one column per sample.
    """
    x = _as_tensor(n, b)
    blocks: list[np.ndarray] = []
    per_layer: list[tuple[str, int]] = []
    handles = []

    def _make_hook(name: str):
        def _hook(module, inputs, output):
            out = output.detach()
            if not torch.isfinite(out).all():
                raise NumericOverflowException(name)
            rows = torch.sign(out).to(torch.int8).reshape(out.shape[0], -1).T.contiguous()
            blocks.append(rows.numpy())
            per_layer.append((name, rows.shape[0]))
        return _hook

    for name, sub in n.module.named_modules():
        if isinstance(sub, ACTIVATIONS):
            handles.append(sub.register_forward_hook(_make_hook(name)))
    try:
        with torch.no_grad():
            n.module(x)
    except ValueError as exc:
        raise AppRuntimeException(f"degenerate shape: {exc}") from exc
    finally:
        for handle in handles:
            handle.remove()

    matrix = np.concatenate(blocks, axis=0) if blocks else np.zeros((0, b.size), dtype=np.int8)
    return ActivationRecord(matrix=matrix, per_layer_sites=per_layer)
