# src/domain/netgraph/operators.py
"""
Genome generators and variation operators used by the evolutionary search.

Every operator takes an explicit integer seed and builds its own Philox stream,
so calls are pure and can run concurrently.
"""
from __future__ import annotations

import bisect
from typing import Sequence

import numpy as np

from swap_nas.domain.entities.genome import (
    CellGenome,
    ConvChainGenome,
    ConvLayer,
    Edge,
    Genome,
    TransformerGenome,
)
from swap_nas.domain.enums.space_id import SpaceId
from swap_nas.domain.exceptions.base_exception import AppBadRequestException, AppRuntimeException
from swap_nas.domain.netgraph.spaces import CELL_INPUTS, DARTS_LITE_FAN_IN, alphabet_for
from swap_nas.domain.utilities.config import settings
from swap_nas.domain.utilities.seeding import make_rng

_TFORM_FIELDS = ("layers", "heads", "d_model", "d_ff")
_CHAIN_FIELDS = ("channels", "kernel", "stride")
_MAX_RESAMPLES = 64


def parse_space(space_id: SpaceId | str) -> SpaceId:
    if isinstance(space_id, SpaceId):
        return space_id
    token = str(space_id).strip().upper()
    for space in SpaceId:
        if token in (space.value, space.name):
            return space
    raise AppBadRequestException(f"unknown space: {space_id}")


def _pick(rng: np.random.Generator, options: Sequence):
    return options[int(rng.integers(len(options)))]


def _tform_grid(name: str) -> list[int]:
    return sorted({
        "layers": settings.TFORM_LAYERS,
        "heads": settings.TFORM_HEADS,
        "d_model": settings.TFORM_D_MODEL,
        "d_ff": settings.TFORM_D_FF,
    }[name])


def _chain_grid(name: str) -> list[int]:
    return sorted({
        "channels": settings.CHAIN_CHANNELS,
        "kernel": settings.CHAIN_KERNELS,
        "stride": settings.CHAIN_STRIDES,
    }[name])


# ---- Random generation -----------------------------------------------------
def random_genome(
    space_id: SpaceId | str,
    rng_seed: int,
    *,
    nodes: int | None = None,
    stem_channels: int | None = None,
    stack_depth: int | None = None,
    seq_len: int | None = None,
    vocab: int | None = None,
) -> Genome:
    space = parse_space(space_id)
    rng = make_rng(rng_seed)

    if space is SpaceId.NB201:
        n = nodes or settings.NB201_NODES
        edges = [
            Edge(src=src, dst=dst, op=_pick(rng, alphabet_for(space)))
            for dst in range(1, n + 1)
            for src in range(dst)
        ]
        return CellGenome(
            space_id=space,
            edges=tuple(edges),
            nodes=n,
            stem_channels=stem_channels or settings.STEM_CHANNELS,
            stack_depth=stack_depth or settings.STACK_DEPTH,
        )

    if space is SpaceId.DARTS_LITE:
        n = nodes or settings.DARTS_NODES
        first = CELL_INPUTS[space]
        edges = [
            Edge(src=int(rng.integers(dst)), dst=dst, op=_pick(rng, alphabet_for(space)))
            for dst in range(first, first + n)
            for _ in range(DARTS_LITE_FAN_IN)
        ]
        return CellGenome(
            space_id=space,
            edges=tuple(edges),
            nodes=n,
            stem_channels=stem_channels or settings.STEM_CHANNELS,
            stack_depth=stack_depth or settings.STACK_DEPTH,
        )

    if space is SpaceId.TRANSFORMER:
        heads = _pick(rng, _tform_grid("heads"))
        d_models = [d for d in _tform_grid("d_model") if d % heads == 0]
        if not d_models:
            raise AppBadRequestException(f"no d_model in the grid is divisible by {heads} heads")
        return TransformerGenome(
            layers=_pick(rng, _tform_grid("layers")),
            heads=heads,
            d_model=_pick(rng, d_models),
            d_ff=_pick(rng, _tform_grid("d_ff")),
            seq_len=seq_len or settings.TFORM_SEQ_LEN,
            vocab=vocab or settings.TFORM_VOCAB,
        )

    depth = int(rng.integers(1, settings.CHAIN_MAX_LAYERS + 1))
    return ConvChainGenome(layers=tuple(_random_conv_layer(rng) for _ in range(depth)))


def _random_conv_layer(rng: np.random.Generator) -> ConvLayer:
    return ConvLayer(
        channels=_pick(rng, _chain_grid("channels")),
        kernel=_pick(rng, _chain_grid("kernel")),
        stride=_pick(rng, _chain_grid("stride")),
    )


# ---- Mutation --------------------------------------------------------------
def mutate_operation(g: Genome, rng_seed: int, *, alphabet: Sequence[str] | None = None) -> Genome:
    """
    Change exactly one locus: one edge op (cells) or one config field moved one
    grid step (transformer, conv chain).
    """
    rng = make_rng(rng_seed)

    if isinstance(g, CellGenome):
        ops = tuple(alphabet) if alphabet is not None else alphabet_for(g.space_id)
        for pos in rng.permutation(len(g.edges)):
            edge = g.edges[int(pos)]
            choices = [op for op in ops if op != edge.op]
            if not choices:
                continue
            edges = list(g.edges)
            edges[int(pos)] = edge.model_copy(update={"op": _pick(rng, choices)})
            return CellGenome(**{**g.model_dump(), "edges": tuple(edges)})
        # Degenerate alphabet: no edge can take another label.
        try:
            return mutate_connectivity(g, int(rng.integers(2**63)))
        except AppRuntimeException:
            raise AppRuntimeException("no mutation freedom") from None

    if isinstance(g, TransformerGenome):
        for name in rng.permutation(_TFORM_FIELDS):
            grid = _tform_grid(str(name))
            for value in _neighbours(grid, getattr(g, str(name)), rng):
                candidate = g.model_dump() | {str(name): value}
                if candidate["d_model"] % candidate["heads"] == 0:
                    return TransformerGenome(**candidate)
        raise AppRuntimeException("no mutation freedom")

    if not g.layers:
        return ConvChainGenome(layers=(_random_conv_layer(rng),))
    loci = [(i, name) for i in range(len(g.layers)) for name in _CHAIN_FIELDS]
    for idx in rng.permutation(len(loci)):
        layer_idx, name = loci[int(idx)]
        layer = g.layers[layer_idx]
        options = _neighbours(_chain_grid(name), getattr(layer, name), rng)
        if options:
            layers = list(g.layers)
            layers[layer_idx] = layer.model_copy(update={name: options[0]})
            return ConvChainGenome(layers=tuple(layers))
    raise AppRuntimeException("no mutation freedom")


def _neighbours(grid: list[int], value: int, rng: np.random.Generator) -> list[int]:
    """Grid values one step away from `value`, in random order."""
    if value in grid:
        i = grid.index(value)
        found = [grid[j] for j in (i - 1, i + 1) if 0 <= j < len(grid)]
    else:
        i = bisect.bisect_left(grid, value)
        found = [grid[j] for j in (i - 1, i) if 0 <= j < len(grid)]
    return [found[int(j)] for j in rng.permutation(len(found))]


def mutate_connectivity(g: Genome, rng_seed: int) -> CellGenome:
    """Rewire exactly one edge's source to a different earlier node."""
    if not isinstance(g, CellGenome):
        raise AppRuntimeException("no connectivity freedom")
    rewirable = [i for i, e in enumerate(g.edges) if e.dst >= 2]
    if not rewirable:
        raise AppRuntimeException("no connectivity freedom")

    rng = make_rng(rng_seed)
    pos = _pick(rng, rewirable)
    edge = g.edges[pos]
    new_src = _pick(rng, [s for s in range(edge.dst) if s != edge.src])
    edges = list(g.edges)
    edges[pos] = edge.model_copy(update={"src": new_src})
    return CellGenome(**{**g.model_dump(), "edges": tuple(edges)})


def mutate(g: Genome, rng_seed: int) -> Genome:
    """Search-time mutation: operation or connectivity with equal odds for cells."""
    rng = make_rng(rng_seed)
    op_seed, wire_seed = (int(x) for x in rng.integers(2**63, size=2))
    if isinstance(g, CellGenome) and rng.random() < 0.5:
        try:
            return mutate_connectivity(g, wire_seed)
        except AppRuntimeException:
            pass
    return mutate_operation(g, op_seed)


# ---- Crossover -------------------------------------------------------------
def crossover(a: Genome, b: Genome, rng_seed: int) -> Genome:
    """Position-wise uniform crossover; each locus comes from a or b with p=0.5."""
    if a.space_id != b.space_id:
        raise AppBadRequestException(f"space mismatch: {a.space_id.value} vs {b.space_id.value}")
    rng = make_rng(rng_seed)

    if isinstance(a, CellGenome):
        if a.nodes != b.nodes or [e.dst for e in a.edges] != [e.dst for e in b.edges]:
            raise AppBadRequestException("space mismatch: parents have different cell shapes")
        edges = tuple(ea if rng.random() < 0.5 else eb for ea, eb in zip(a.edges, b.edges))
        return CellGenome(
            space_id=a.space_id,
            edges=edges,
            nodes=a.nodes,
            stem_channels=a.stem_channels if rng.random() < 0.5 else b.stem_channels,
            stack_depth=a.stack_depth if rng.random() < 0.5 else b.stack_depth,
        )

    if isinstance(a, TransformerGenome):
        if (a.seq_len, a.vocab) != (b.seq_len, b.vocab):
            raise AppBadRequestException("space mismatch: parents disagree on seq_len/vocab")
        for _ in range(_MAX_RESAMPLES):
            fields = {name: getattr(a if rng.random() < 0.5 else b, name) for name in _TFORM_FIELDS}
            if fields["d_model"] % fields["heads"] == 0:
                return TransformerGenome(**fields, seq_len=a.seq_len, vocab=a.vocab)
        return a

    length = len(a.layers) if rng.random() < 0.5 else len(b.layers)
    layers = []
    for i in range(length):
        options = [p.layers[i] for p in (a, b) if i < len(p.layers)]
        layers.append(options[0] if len(options) == 1 or rng.random() < 0.5 else options[1])
    return ConvChainGenome(layers=tuple(layers))
