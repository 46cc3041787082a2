from enum import Enum


class BatchKind(str, Enum):
    IMAGE = "image"
    TOKENS = "tokens"
    GAUSSIAN_NOISE = "gaussian_noise"
