from enum import Enum


class SpaceId(str, Enum):
    """Searchable architecture spaces. Values are the tokens used in genome strings."""

    NB201 = "NB201"            # NAS-Bench-201 style cell, one input node, full DAG
    DARTS_LITE = "DLITE"       # reduced DARTS normal cell, two input nodes
    TRANSFORMER = "TFORM"      # FlexiBERT-lite homogeneous encoder config
    CONV_CHAIN = "CHAIN"       # unpadded Conv->ReLU stack

    @property
    def is_cell(self) -> bool:
        return self in (SpaceId.NB201, SpaceId.DARTS_LITE)
