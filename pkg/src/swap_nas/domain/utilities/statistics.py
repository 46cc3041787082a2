from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy import stats

from swap_nas.domain.exceptions.base_exception import AppBadRequestException


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Spearman rank correlation with average ranks for ties."""
    if len(xs) != len(ys):
        raise AppBadRequestException(f"length mismatch: {len(xs)} vs {len(ys)}")
    if len(xs) < 3:
        raise AppBadRequestException("spearman needs at least 3 pairs")
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise AppBadRequestException("non-finite value in correlation input")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise AppBadRequestException("undefined correlation: constant vector")

    rho = float(stats.spearmanr(x, y)[0])
    return max(-1.0, min(1.0, rho))


def mean_and_stderr(values: Sequence[float]) -> tuple[float, float]:
    if len(values) == 0:
        return math.nan, math.nan
    arr = np.asarray(values, dtype=np.float64)
    if len(arr) == 1:
        return float(arr[0]), 0.0
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(len(arr)))
