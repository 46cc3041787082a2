from enum import Enum


class PatternOrientation(str, Enum):
    SAMPLE_WISE = "sample_wise"  # one pattern per activation site, length S
    VALUE_WISE = "value_wise"    # one pattern per sample, length V
