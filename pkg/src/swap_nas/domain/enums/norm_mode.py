from enum import Enum


class NormMode(str, Enum):
    BATCH = "batch"  # batch statistics, no running stats
    NONE = "none"    # normalisation layers replaced by identity
