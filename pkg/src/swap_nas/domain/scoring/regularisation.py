from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from swap_nas.domain.enums.regularisation_mode import RegularisationMode
from swap_nas.domain.exceptions.base_exception import AppBadRequestException
from swap_nas.domain.schemas.score_schema import RegularisationParams
from swap_nas.domain.utilities.config import settings


def regulariser(theta_m: float, p: RegularisationParams, *, sigma_min: float | None = None) -> float:
    """f(theta) = exp(-(theta - mu)^2 / sigma); 1.0 when regularisation is off."""
    if p.mode is RegularisationMode.OFF:
        return 1.0
    floor = settings.SIGMA_MIN if sigma_min is None else sigma_min
    if p.sigma < floor:
        raise AppBadRequestException(f"degenerate sigma: {p.sigma} < {floor}")
    return math.exp(-((theta_m - p.mu) ** 2) / p.sigma)


def regularised_swap(psi: int, theta_m: float, p: RegularisationParams) -> float:
    if psi < 0:
        raise AppBadRequestException("swap score must be non-negative")
    return psi * regulariser(theta_m, p)


def adaptive_update(
    history: Sequence[float],
    p: RegularisationParams,
    *,
    sigma_min: float | None = None,
) -> RegularisationParams:
    """mu <- mean(history), sigma <- max(sigma_min, sample std(history))."""
    if p.mode is not RegularisationMode.ADAPTIVE:
        raise AppBadRequestException(f"adaptive update requested in {p.mode.value} mode")
    if len(history) == 0:
        raise AppBadRequestException("no history")

    floor = settings.SIGMA_MIN if sigma_min is None else sigma_min
    values = np.asarray(history, dtype=np.float64)
    spread = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
    return RegularisationParams(mu=float(np.mean(values)), sigma=max(floor, spread), mode=p.mode)
