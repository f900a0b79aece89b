"""
Sequential one-sided Kolmogorov-Smirnov test for stochastic ordering.

Stage j (j = 1..k-1) compares the pooled first j groups with group j+1:

    D_j = sqrt(m_j n_{j+1} / (m_j + n_{j+1})) * sup_x (F_{j+1}(x) - F_{1:j}(x))^+

and S_n = max_j D_j. Stages are asymptotically independent, each with the
one-sided limit P(sup B <= s) = 1 - exp(-2 s^2).
"""
import logging
import math
import sys
from typing import Dict, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from exceptions import InvalidArgumentError
from samples import GroupedSamples

logger = logging.getLogger(__name__)

DEFAULT_ALPHAS = (0.01, 0.05, 0.10)


class SnResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    statistic: float = Field(..., ge=0, description="S_n, the largest stage statistic.")
    per_stage: Tuple[float, ...] = Field(..., description="Stage statistics D_1..D_{k-1}.")
    critical_values: Dict[float, float] = Field(default_factory=dict, description="Asymptotic critical value per alpha.")
    p_value: float = Field(..., description="Asymptotic p-value of S_n.")


def stage_statistics(arrays: Sequence[np.ndarray]) -> np.ndarray:
    """D_1..D_{k-1} from sorted group arrays."""
    if len(arrays) < 2:
        raise InvalidArgumentError("the sequential test needs at least 2 groups")
    points = np.unique(np.concatenate(arrays))
    stages = np.empty(len(arrays) - 1)
    for j in range(1, len(arrays)):
        first = np.sort(np.concatenate(arrays[:j]))
        nxt = arrays[j]
        m, n = first.size, nxt.size
        deviation = (
            np.searchsorted(nxt, points, side="right") / n
            - np.searchsorted(first, points, side="right") / m
        )
        stages[j - 1] = math.sqrt(m * n / (m + n)) * max(0.0, float(deviation.max()))
    return stages


def sn_critical(alpha: float, k: int) -> float:
    """s with (1 - exp(-2 s^2))^(k-1) = 1 - alpha."""
    if not 0.0 < alpha < 1.0:
        raise InvalidArgumentError(f"alpha must lie in (0, 1), got {alpha}")
    if k < 2:
        raise InvalidArgumentError(f"k must be at least 2, got {k}")
    stage_level = (1.0 - alpha) ** (1.0 / (k - 1))
    return math.sqrt(-math.log1p(-stage_level) / 2.0)


def sn_p_value(statistic: float, k: int) -> float:
    """Asymptotic tail probability 1 - (1 - exp(-2 s^2))^(k-1)."""
    if k < 2:
        raise InvalidArgumentError(f"k must be at least 2, got {k}")
    tail = math.exp(-2.0 * statistic ** 2) if statistic > 0 else 1.0
    if tail >= 1.0:
        return 1.0
    value = -math.expm1((k - 1) * math.log1p(-tail))
    # floored at the smallest positive double
    return max(value, sys.float_info.min)


def sn_statistic(data: GroupedSamples, alphas: Sequence[float] = DEFAULT_ALPHAS) -> SnResult:
    stages = stage_statistics(data.arrays())
    statistic = float(stages.max())
    return SnResult(
        statistic=statistic,
        per_stage=tuple(stages.tolist()),
        critical_values={float(a): sn_critical(a, data.k) for a in alphas},
        p_value=sn_p_value(statistic, data.k),
    )
