"""
Single-line genome strings.

    genome := "space=" SPACE ";" body
    cell   := "C=" INT ",N=" INT ";" node ("+" node)*        NB201, DLITE
    node   := "|" (OP "~" INT "|")+
    tform  := "L=" INT ",H=" INT ",DM=" INT ",DF=" INT ",T=" INT ",V=" INT
    chain  := "|" (INT ":" INT ":" INT "|")*                  CHAIN, channels:kernel:stride
    INT    := "0" | [1-9][0-9]*

Node group i holds the incoming edges of computed node (inputs + i).
Example: space=NB201;C=16,N=5;|conv3x3~0|+|skip~0|conv1x1~1|+|none~0|avgpool3x3~1|conv3x3~2|
"""
from __future__ import annotations

import re

from pydantic import ValidationError

from swap_nas.domain.entities.genome import (
    CellGenome,
    ConvChainGenome,
    ConvLayer,
    Edge,
    Genome,
    TransformerGenome,
)
from swap_nas.domain.enums.space_id import SpaceId
from swap_nas.domain.exceptions.base_exception import GenomeParseException
from swap_nas.domain.netgraph.spaces import CELL_INPUTS

_INT = re.compile(r"0|[1-9][0-9]*")
_OP = re.compile(r"[a-z][a-z0-9]*")
_SPACE = re.compile(r"[A-Z0-9]+")
_TFORM_KEYS = (("L", "layers"), ("H", "heads"), ("DM", "d_model"), ("DF", "d_ff"), ("T", "seq_len"), ("V", "vocab"))


def encode(g: Genome) -> str:
    head = f"space={g.space_id.value};"
    if isinstance(g, CellGenome):
        groups = []
        for node in g.node_ids:
            groups.append("|" + "".join(f"{e.op}~{e.src}|" for e in g.incoming(node)))
        return f"{head}C={g.stem_channels},N={g.stack_depth};" + "+".join(groups)
    if isinstance(g, TransformerGenome):
        return head + ",".join(f"{key}={getattr(g, name)}" for key, name in _TFORM_KEYS)
    return head + "|" + "".join(f"{l.channels}:{l.kernel}:{l.stride}|" for l in g.layers)


class _Cursor:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def fail(self, msg: str, pos: int | None = None) -> GenomeParseException:
        return GenomeParseException(self.pos if pos is None else pos, msg)

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self, literal: str) -> bool:
        return self.text.startswith(literal, self.pos)

    def expect(self, literal: str) -> None:
        if not self.peek(literal):
            raise self.fail(f"expected '{literal}'")
        self.pos += len(literal)

    def token(self, pattern: re.Pattern, what: str) -> str:
        m = pattern.match(self.text, self.pos)
        if m is None:
            raise self.fail(f"expected {what}")
        self.pos = m.end()
        return m.group(0)

    def integer(self) -> int:
        return int(self.token(_INT, "integer"))


def decode(s: str) -> Genome:
    cur = _Cursor(s)
    cur.expect("space=")
    space_pos = cur.pos
    raw_space = cur.token(_SPACE, "space id")
    try:
        space = SpaceId(raw_space)
    except ValueError:
        raise cur.fail(f"unknown space '{raw_space}'", space_pos) from None
    cur.expect(";")
    body_pos = cur.pos

    try:
        if space.is_cell:
            genome = _decode_cell(cur, space)
        elif space is SpaceId.TRANSFORMER:
            genome = _decode_transformer(cur)
        else:
            genome = _decode_chain(cur)
    except ValidationError as exc:
        first = exc.errors()[0]
        raise cur.fail(f"invalid genome: {first.get('msg', exc)}", body_pos) from None

    if not cur.at_end():
        raise cur.fail("trailing characters")
    return genome


def _decode_cell(cur: _Cursor, space: SpaceId) -> CellGenome:
    cur.expect("C=")
    stem = cur.integer()
    cur.expect(",N=")
    depth = cur.integer()
    cur.expect(";")

    edges: list[Edge] = []
    dst = CELL_INPUTS[space]
    while True:
        cur.expect("|")
        while True:
            op = cur.token(_OP, "op label")
            cur.expect("~")
            src = cur.integer()
            cur.expect("|")
            edges.append(Edge(src=src, dst=dst, op=op))
            if cur.at_end() or cur.peek("+"):
                break
        if not cur.peek("+"):
            break
        cur.expect("+")
        dst += 1

    return CellGenome(
        space_id=space,
        edges=tuple(edges),
        nodes=dst - CELL_INPUTS[space] + 1,
        stem_channels=stem,
        stack_depth=depth,
    )


def _decode_transformer(cur: _Cursor) -> TransformerGenome:
    values: dict[str, int] = {}
    for i, (key, name) in enumerate(_TFORM_KEYS):
        cur.expect(("," if i else "") + key + "=")
        values[name] = cur.integer()
    return TransformerGenome(**values)


def _decode_chain(cur: _Cursor) -> ConvChainGenome:
    cur.expect("|")
    layers: list[ConvLayer] = []
    while not cur.at_end():
        channels = cur.integer()
        cur.expect(":")
        kernel = cur.integer()
        cur.expect(":")
        stride = cur.integer()
        cur.expect("|")
        layers.append(ConvLayer(channels=channels, kernel=kernel, stride=stride))
    return ConvChainGenome(layers=tuple(layers))
