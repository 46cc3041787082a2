from enum import Enum


class RegularisationMode(str, Enum):
    """How mu and sigma of the size regulariser are obtained."""

    STATIC = "static"      # fixed by configuration
    ADAPTIVE = "adaptive"  # mean / sample std of the search history
    OFF = "off"            # f(theta) == 1
