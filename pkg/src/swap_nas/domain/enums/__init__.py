from .batch_kind import BatchKind
from .norm_mode import NormMode
from .pattern_orientation import PatternOrientation
from .regularisation_mode import RegularisationMode
from .space_id import SpaceId

__all__ = ["BatchKind", "NormMode", "PatternOrientation", "RegularisationMode", "SpaceId"]
